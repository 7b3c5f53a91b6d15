#include "bmdp/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace bmdp {

namespace {

constexpr double kVertexTolerance = 1e-12;

void requireFeasible(const IntervalRow& row) {
    if (row.entries.empty() || !row.feasible()) {
        std::ostringstream msg;
        msg << "infeasible interval row (action " << row.action << "): sum(lo) = " << row.lowerSum()
            << ", sum(hi) = " << row.upperSum();
        throw FeasibilityError(msg.str());
    }
}

bool lexLess(const std::vector<double>& x, const std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i] - y[i]) > kVertexTolerance) return x[i] < y[i];
    }
    return false;
}

bool nearlyEqual(const std::vector<double>& x, const std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i] - y[i]) > kVertexTolerance) return false;
    }
    return true;
}

}  // namespace

BfsSet bfs_vertices(const IntervalRow& row) {
    requireFeasible(row);
    const std::size_t n = row.entries.size();
    if (n > kMaxBfsRowWidth) throw FeasibilityError("row too wide for vertex enumeration");

    std::vector<std::vector<double>> found;
    std::vector<double> p(n);
    for (std::size_t free = 0; free < n; ++free) {
        const std::size_t others = n - 1;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << others); ++mask) {
            double fixed = 0.0;
            std::size_t bit = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == free) continue;
                const auto& b = row.entries[i].bounds;
                p[i] = ((mask >> bit) & 1u) ? b.hi : b.lo;
                fixed += p[i];
                ++bit;
            }
            const auto& b = row.entries[free].bounds;
            double rest = 1.0 - fixed;
            if (rest < b.lo - kVertexTolerance || rest > b.hi + kVertexTolerance) continue;
            if (std::abs(rest - b.lo) <= kVertexTolerance) rest = b.lo;
            if (std::abs(rest - b.hi) <= kVertexTolerance) rest = b.hi;
            p[free] = rest;
            bool duplicate = std::any_of(found.begin(), found.end(), [&](const auto& v) { return nearlyEqual(v, p); });
            if (!duplicate) found.push_back(p);
        }
    }
    if (found.empty()) throw FeasibilityError("row has no basic feasible solution");
    std::sort(found.begin(), found.end(), lexLess);

    BfsSet result{row.action, {}};
    result.vertices.reserve(found.size());
    for (const auto& v : found) {
        std::vector<std::pair<StateId, double>> entries;
        for (std::size_t i = 0; i < n; ++i) entries.emplace_back(row.entries[i].target, v[i]);
        result.vertices.push_back(Distribution::fromEntries(std::move(entries)));
    }
    return result;
}

Distribution greedy_fill(const IntervalRow& row, std::span<const std::size_t> order) {
    requireFeasible(row);
    const std::size_t n = row.entries.size();
    std::vector<double> p(n);
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = row.entries[i].bounds.lo;
        mass += p[i];
    }
    double remaining = 1.0 - mass;
    for (std::size_t i : order) {
        if (remaining <= 0.0) break;
        const auto& b = row.entries[i].bounds;
        double raise = std::min(b.hi - b.lo, remaining);
        if (raise <= 0.0) continue;
        p[i] += raise;
        remaining -= raise;
    }
    std::vector<std::pair<StateId, double>> entries;
    entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) entries.emplace_back(row.entries[i].target, p[i]);
    return Distribution::fromEntries(std::move(entries));
}

Distribution extreme_distribution(const IntervalRow& row, std::span<const double> values, Sense sense) {
    std::vector<std::size_t> order(row.entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // entries are sorted by state, so a stable sort keeps ascending-index tie-breaking
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        double vx = values[row.entries[x].target];
        double vy = values[row.entries[y].target];
        return sense == Sense::Max ? vx > vy : vx < vy;
    });
    return greedy_fill(row, order);
}

double expectation(const Distribution& dist, std::span<const double> values) {
    double total = 0.0;
    for (const auto& [s, p] : dist.entries) total += p * values[s];
    return total;
}

double max_mass(const IntervalRow& row, std::span<const char> set) {
    double hiIn = 0.0;
    double loOut = 0.0;
    for (const auto& e : row.entries) {
        if (set[e.target]) {
            hiIn += e.bounds.hi;
        } else {
            loOut += e.bounds.lo;
        }
    }
    return std::clamp(std::min(hiIn, 1.0 - loOut), 0.0, 1.0);
}

double min_mass(const IntervalRow& row, std::span<const char> set) {
    double loIn = 0.0;
    double hiOut = 0.0;
    for (const auto& e : row.entries) {
        if (set[e.target]) {
            loIn += e.bounds.lo;
        } else {
            hiOut += e.bounds.hi;
        }
    }
    return std::clamp(std::max(loIn, 1.0 - hiOut), 0.0, 1.0);
}

bool can_stay_within(const IntervalRow& row, std::span<const char> set) {
    double hiIn = 0.0;
    for (const auto& e : row.entries) {
        if (set[e.target]) {
            hiIn += e.bounds.hi;
        } else if (e.bounds.lo > kZeroTolerance) {
            return false;
        }
    }
    return hiIn >= 1.0 - kProbTolerance;
}

double max_mass_within(const IntervalRow& row, std::span<const char> within, std::span<const char> target) {
    double hiHit = 0.0;
    double loMiss = 0.0;
    for (const auto& e : row.entries) {
        if (!within[e.target]) continue;
        if (target[e.target]) {
            hiHit += e.bounds.hi;
        } else {
            loMiss += e.bounds.lo;
        }
    }
    return std::clamp(std::min(hiHit, 1.0 - loMiss), 0.0, 1.0);
}

}  // namespace bmdp
