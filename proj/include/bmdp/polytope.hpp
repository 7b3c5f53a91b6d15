#pragma once

#include <span>
#include <vector>

#include "bmdp/model.hpp"

namespace bmdp {

/// Corner points of {p : sum p = 1, lo <= p <= hi} for one action's row.
struct BfsSet {
    ActionId action = kNoAction;
    std::vector<Distribution> vertices;  ///< duplicate-free, lexicographic by successor coordinates
};

/// Rows wider than this are refused by the exhaustive sweep (n * 2^(n-1) candidates).
inline constexpr std::size_t kMaxBfsRowWidth = 24;

/// Enumerates the vertices by fixing every coordinate but one at a bound and solving
/// for the free one. Throws FeasibilityError for infeasible rows.
BfsSet bfs_vertices(const IntervalRow& row);

/// The distribution within `row` optimizing sum p(s') * values(s') in `sense`.
/// Greedy: start at lo, raise successors toward hi in value order (descending for
/// max, ascending for min, ties by state index) until the mass reaches 1.
Distribution extreme_distribution(const IntervalRow& row, std::span<const double> values, Sense sense);

/// Same greedy fill with an explicit successor priority (entries of `order` are
/// indices into row.entries, highest priority first).
Distribution greedy_fill(const IntervalRow& row, std::span<const std::size_t> order);

/// Expected value of `values` under `dist`.
double expectation(const Distribution& dist, std::span<const double> values);

// Mass bounds over the row polytope, used by the qualitative analyses.

/// max over feasible p of sum_{s in set} p(s).
double max_mass(const IntervalRow& row, std::span<const char> set);
/// min over feasible p of sum_{s in set} p(s).
double min_mass(const IntervalRow& row, std::span<const char> set);
/// Whether some feasible p is supported inside `set`.
bool can_stay_within(const IntervalRow& row, std::span<const char> set);
/// max of sum_{s in target} p(s) over feasible p supported inside `within`
/// (requires can_stay_within(row, within)).
double max_mass_within(const IntervalRow& row, std::span<const char> within, std::span<const char> target);

}  // namespace bmdp
