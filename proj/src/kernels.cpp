#include "bmdp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bmdp {

double robust_row_value(const IntervalRow& row, std::span<const double> values, Sense nature,
                        std::vector<std::size_t>& scratch) {
    const auto& entries = row.entries;
    const std::size_t n = entries.size();
    scratch.resize(n);
    std::iota(scratch.begin(), scratch.end(), std::size_t{0});
    std::stable_sort(scratch.begin(), scratch.end(), [&](std::size_t x, std::size_t y) {
        double vx = values[entries[x].target];
        double vy = values[entries[y].target];
        return nature == Sense::Max ? vx > vy : vx < vy;
    });

    // same greedy as greedy_fill, accumulated in entry order so that the result is
    // bit-identical to expectation(extreme_distribution(...))
    double mass = 0.0;
    for (const auto& e : entries) mass += e.bounds.lo;
    double remaining = 1.0 - mass;
    constexpr std::size_t kStackWidth = 16;
    double stackBuf[kStackWidth];
    std::vector<double> heapBuf;
    double* p = stackBuf;
    if (n > kStackWidth) {
        heapBuf.resize(n);
        p = heapBuf.data();
    }
    for (std::size_t i = 0; i < n; ++i) p[i] = entries[i].bounds.lo;
    for (std::size_t i : scratch) {
        if (remaining <= 0.0) break;
        double raise = std::min(entries[i].bounds.hi - entries[i].bounds.lo, remaining);
        if (raise <= 0.0) continue;
        p[i] += raise;
        remaining -= raise;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] > kZeroTolerance) total += p[i] * values[entries[i].target];
    }
    return total;
}

namespace {

inline double stateValue(const SweepProblem& problem, StateId s, std::span<const double> in,
                         std::vector<std::size_t>& scratch) {
    const bool maximize = problem.controller == Sense::Max;
    double best = maximize ? -1.0 : 2.0;
    for (ActionId a : problem.skeleton->available(s)) {
        double q = robust_row_value(problem.rows[a], in, problem.nature, scratch);
        if (maximize ? q > best : q < best) best = q;
    }
    return best;
}

}  // namespace

double sweep_serial(const SweepProblem& problem, std::span<const double> in, std::span<double> out) {
    const std::size_t n = problem.skeleton->numStates();
    std::vector<std::size_t> scratch;
    double delta = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        if (problem.frozen[s]) {
            out[s] = in[s];
            continue;
        }
        out[s] = stateValue(problem, static_cast<StateId>(s), in, scratch);
        delta = std::max(delta, std::abs(out[s] - in[s]));
    }
    return delta;
}

double sweep_parallel(const SweepProblem& problem, std::span<const double> in, std::span<double> out) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(problem.skeleton->numStates());
    double delta = 0.0;
#pragma omp parallel reduction(max : delta)
    {
        std::vector<std::size_t> scratch;
#pragma omp for schedule(static)
        for (std::ptrdiff_t s = 0; s < n; ++s) {
            if (problem.frozen[s]) {
                out[s] = in[s];
                continue;
            }
            out[s] = stateValue(problem, static_cast<StateId>(s), in, scratch);
            delta = std::max(delta, std::abs(out[s] - in[s]));
        }
    }
    return delta;
}

int sweep_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace bmdp
