#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bmdp/model.hpp"

namespace bmdp {

/// One Jacobi sweep of robust value iteration: every non-frozen state takes the
/// controller-optimal action value, each action valued at nature's extreme distribution.
struct SweepProblem {
    const Skeleton* skeleton = nullptr;
    std::span<const IntervalRow> rows;
    std::span<const char> frozen;  ///< states whose value is fixed (0/1 seeds)
    Sense controller = Sense::Max;
    Sense nature = Sense::Max;
};

/// Value of `row` when nature plays its extreme distribution against `values`.
/// `scratch` is reused between calls to avoid allocation.
double robust_row_value(const IntervalRow& row, std::span<const double> values, Sense nature,
                        std::vector<std::size_t>& scratch);

/// Reference implementation. Writes the new iterate into `out` (which must not alias
/// `in`) and returns the sup-norm change.
double sweep_serial(const SweepProblem& problem, std::span<const double> in, std::span<double> out);

/// OpenMP version; produces exactly the same iterate as sweep_serial.
double sweep_parallel(const SweepProblem& problem, std::span<const double> in, std::span<double> out);

/// Threads the parallel sweep will use (1 when built without OpenMP).
int sweep_threads();

}  // namespace bmdp
