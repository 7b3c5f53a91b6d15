#include <algorithm>
#include <cmath>
#include <set>

#include "bmdp/omega.hpp"
#include "bmdp/reach.hpp"

namespace bmdp {

namespace {

constexpr std::size_t kMaxMixtureWidth = 16;

bool supportedOn(const Distribution& d, const std::vector<StateId>& allowed) {
    return std::all_of(d.entries.begin(), d.entries.end(),
                       [&](const auto& e) { return std::binary_search(allowed.begin(), allowed.end(), e.first); });
}

}  // namespace

std::vector<Distribution> nature_options(const IntervalRow& row, Sense nature) {
    std::vector<Distribution> options = bfs_vertices(row).vertices;
    if (nature == Sense::Max || options.size() < 2) return options;
    const std::size_t width = row.entries.size();
    if (width > kMaxMixtureWidth) throw SizeGuardError("row too wide to enumerate nature mixtures");

    const std::size_t corners = options.size();
    std::set<std::vector<std::size_t>> seen;
    for (std::size_t subset = 1; subset < (std::size_t{1} << width); ++subset) {
        std::vector<StateId> allowed;
        for (std::size_t i = 0; i < width; ++i) {
            if (subset >> i & 1) allowed.push_back(row.entries[i].target);
        }
        std::vector<std::size_t> members;
        for (std::size_t k = 0; k < corners; ++k) {
            if (supportedOn(options[k], allowed)) members.push_back(k);
        }
        if (members.size() < 2 || !seen.insert(members).second) continue;
        std::vector<std::pair<StateId, double>> mixture;
        for (std::size_t k : members) {
            for (const auto& [t, p] : options[k].entries) mixture.emplace_back(t, p / static_cast<double>(members.size()));
        }
        options.push_back(Distribution::fromEntries(std::move(mixture)));
    }
    return options;
}

ValueVector brute_force_value(const Bmdp& model, Sense nature) {
    const auto& skel = model.skeleton();
    const std::size_t n = model.numStates();
    const std::size_t m = model.numActions();

    std::vector<std::vector<Distribution>> options(m);
    for (ActionId a = 0; a < m; ++a) options[a] = nature_options(model.row(a), nature);

    // combinations = prod over states of (sum over its actions of option counts)
    double combinations = 1.0;
    double controllers = 1.0;
    for (StateId s = 0; s < n; ++s) {
        double perState = 0.0;
        for (ActionId a : skel.available(s)) perState += static_cast<double>(options[a].size());
        combinations *= perState;
        controllers *= static_cast<double>(skel.available(s).size());
    }
    if (combinations > static_cast<double>(kBruteForceLimit)) {
        throw SizeGuardError("brute force refused: " + std::to_string(static_cast<long long>(combinations)) +
                             " combinations exceed the limit of " + std::to_string(kBruteForceLimit));
    }

    const auto numControllers = static_cast<long long>(controllers);
    ValueVector best(n, 0.0);
#pragma omp parallel
    {
        ValueVector localBest(n, 0.0);
        std::vector<ActionId> controller(n);
        std::vector<Distribution> perAction(m);
#pragma omp for schedule(dynamic)
        for (long long code = 0; code < numControllers; ++code) {
            long long rest = code;
            for (StateId s = 0; s < n; ++s) {
                auto acts = skel.available(s);
                controller[s] = acts[static_cast<std::size_t>(rest % static_cast<long long>(acts.size()))];
                rest /= static_cast<long long>(acts.size());
            }
            ValueVector response(n, nature == Sense::Min ? 1.0 : 0.0);
            std::vector<std::size_t> digit(n, 0);
            while (true) {
                for (StateId s = 0; s < n; ++s) perAction[controller[s]] = options[controller[s]][digit[s]];
                auto values = chain_rabin(Chain::resolve(skel, controller, perAction), model.acceptance());
                for (StateId s = 0; s < n; ++s) {
                    response[s] = nature == Sense::Min ? std::min(response[s], values[s]) : std::max(response[s], values[s]);
                }
                StateId s = 0;
                for (; s < n; ++s) {
                    if (++digit[s] < options[controller[s]].size()) break;
                    digit[s] = 0;
                }
                if (s == n) break;
            }
            for (StateId s = 0; s < n; ++s) localBest[s] = std::max(localBest[s], response[s]);
        }
#pragma omp critical
        for (StateId s = 0; s < n; ++s) best[s] = std::max(best[s], localBest[s]);
    }
    return best;
}

}  // namespace bmdp
