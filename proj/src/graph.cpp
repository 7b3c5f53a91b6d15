#include "bmdp/graph.hpp"

#include <algorithm>
#include <map>

#include "bmdp/polytope.hpp"

namespace bmdp {

SccResult strongly_connected_components(const std::vector<std::vector<StateId>>& successors,
                                        std::span<const char> active) {
    const std::size_t n = successors.size();
    auto isActive = [&](StateId v) { return active.empty() || active[v]; };

    SccResult result;
    result.component.assign(n, -1);
    std::vector<int> index(n, -1);
    std::vector<int> low(n, 0);
    std::vector<char> onStack(n, 0);
    std::vector<StateId> stack;
    std::vector<std::pair<StateId, std::size_t>> frames;
    int counter = 0;

    for (StateId root = 0; root < n; ++root) {
        if (!isActive(root) || index[root] != -1) continue;
        frames.emplace_back(root, 0);
        index[root] = low[root] = counter++;
        stack.push_back(root);
        onStack[root] = 1;
        while (!frames.empty()) {
            auto& [v, next] = frames.back();
            if (next < successors[v].size()) {
                StateId w = successors[v][next++];
                if (!isActive(w)) continue;
                if (index[w] == -1) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    onStack[w] = 1;
                    frames.emplace_back(w, 0);
                } else if (onStack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            StateId done = v;
            frames.pop_back();
            if (!frames.empty()) {
                StateId parent = frames.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
            if (low[done] == index[done]) {
                StateId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    onStack[w] = 0;
                    result.component[w] = result.count;
                } while (w != done);
                ++result.count;
            }
        }
    }
    return result;
}

std::vector<EndComponent> interval_mecs(const Skeleton& skel, std::span<const IntervalRow> rows,
                                        std::span<const char> allowedStates, std::span<const char> allowedActions) {
    const std::size_t n = skel.numStates();
    const std::size_t m = skel.numActions();

    // comp[s] is the candidate set of s, -1 once s is discarded
    std::vector<int> comp(n, -1);
    for (StateId s = 0; s < n; ++s) {
        if (allowedStates.empty() || allowedStates[s]) comp[s] = 0;
    }
    std::vector<char> activeAction(m, 0);
    for (ActionId a = 0; a < m; ++a) {
        activeAction[a] = (allowedActions.empty() || allowedActions[a]) && comp[skel.owner(a)] >= 0;
    }

    std::vector<std::vector<StateId>> succ(n);
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& list : succ) list.clear();

        for (ActionId a = 0; a < m; ++a) {
            if (!activeAction[a]) continue;
            const StateId s = skel.owner(a);
            const int c = comp[s];
            const auto& row = rows[a];
            double hiIn = 0.0;
            double loIn = 0.0;
            bool stays = c >= 0;
            for (const auto& e : row.entries) {
                if (comp[e.target] == c) {
                    hiIn += e.bounds.hi;
                    loIn += e.bounds.lo;
                } else if (e.bounds.lo > kZeroTolerance) {
                    stays = false;
                }
            }
            if (!stays || hiIn < 1.0 - kProbTolerance) {
                activeAction[a] = 0;
                changed = true;
                continue;
            }
            for (const auto& e : row.entries) {
                if (comp[e.target] != c) continue;
                double most = std::min(e.bounds.hi, 1.0 - (loIn - e.bounds.lo));
                if (most > kZeroTolerance) succ[s].push_back(e.target);
            }
        }

        std::vector<char> alive(n, 0);
        for (ActionId a = 0; a < m; ++a) {
            if (activeAction[a]) alive[skel.owner(a)] = 1;
        }
        for (StateId s = 0; s < n; ++s) {
            if (comp[s] >= 0 && !alive[s]) {
                comp[s] = -1;
                changed = true;
            }
        }

        // edges never cross candidates, so SCCs can only split a candidate
        auto scc = strongly_connected_components(succ, alive);
        std::map<int, int> oldToNew;
        for (StateId s = 0; s < n; ++s) {
            if (!alive[s]) continue;
            auto [it, inserted] = oldToNew.emplace(comp[s], scc.component[s]);
            if (!inserted && it->second != scc.component[s]) changed = true;
        }
        for (StateId s = 0; s < n; ++s) {
            if (alive[s]) comp[s] = scc.component[s];
        }
    }

    std::map<StateId, EndComponent> byFirst;
    std::map<int, StateId> firstOf;
    for (StateId s = 0; s < n; ++s) {
        if (comp[s] < 0) continue;
        auto [it, inserted] = firstOf.emplace(comp[s], s);
        byFirst[it->second].states.push_back(s);
    }
    for (ActionId a = 0; a < m; ++a) {
        if (!activeAction[a]) continue;
        byFirst[firstOf.at(comp[skel.owner(a)])].actions.push_back(a);
    }
    std::vector<EndComponent> result;
    result.reserve(byFirst.size());
    for (auto& [first, ec] : byFirst) result.push_back(std::move(ec));
    return result;
}

std::vector<EndComponent> mec_decomposition(const Mdp& mdp) { return mec_decomposition(mdp, {}); }

std::vector<EndComponent> mec_decomposition(const Mdp& mdp, std::span<const char> allowedStates) {
    auto rows = point_rows(mdp);
    return interval_mecs(mdp.skeleton(), rows, allowedStates, {});
}

std::vector<EndComponent> bmdp_mec_decomposition(const Bmdp& model) { return bmdp_mec_decomposition(model, {}); }

std::vector<EndComponent> bmdp_mec_decomposition(const Bmdp& model, std::span<const char> allowedStates) {
    return interval_mecs(model.skeleton(), model.rows(), allowedStates, {});
}

std::vector<std::vector<StateId>> bsccs(const MarkovChain& mc) {
    const std::size_t n = mc.numStates();
    std::vector<std::vector<StateId>> succ(n);
    for (StateId s = 0; s < n; ++s) {
        for (ActionId a : mc.available(s)) {
            for (const auto& [t, p] : mc.trans(a).entries) {
                if (p > kZeroTolerance) succ[s].push_back(t);
            }
        }
    }
    auto scc = strongly_connected_components(succ);
    std::vector<char> bottom(scc.count, 1);
    for (StateId s = 0; s < n; ++s) {
        for (StateId t : succ[s]) {
            if (scc.component[t] != scc.component[s]) bottom[scc.component[s]] = 0;
        }
    }
    std::map<int, std::vector<StateId>> groups;
    for (StateId s = 0; s < n; ++s) {
        if (bottom[scc.component[s]]) groups[scc.component[s]].push_back(s);
    }
    std::vector<std::vector<StateId>> result;
    for (auto& [id, states] : groups) result.push_back(std::move(states));
    std::sort(result.begin(), result.end());
    return result;
}

// -----------------------------------------------------------------------------

namespace {

bool hitsPositively(const IntervalRow& row, std::span<const char> set, Sense nature) {
    double mass = nature == Sense::Max ? max_mass(row, set) : min_mass(row, set);
    return mass > kZeroTolerance;
}

bool staysAndHits(const IntervalRow& row, std::span<const char> stay, std::span<const char> hit,
                  std::span<const char> leave, Sense nature) {
    if (nature == Sense::Max) {
        return can_stay_within(row, stay) && max_mass_within(row, stay, hit) > kZeroTolerance;
    }
    return max_mass(row, leave) <= kZeroTolerance && min_mass(row, hit) > kZeroTolerance;
}

// s joins when its chooser can (max) or must (min) use an action satisfying `ok`.
template <typename Pred>
bool chooserAgrees(const Skeleton& skel, StateId s, Sense sense, Pred&& ok) {
    auto acts = skel.available(s);
    if (sense == Sense::Max) return std::any_of(acts.begin(), acts.end(), ok);
    return std::all_of(acts.begin(), acts.end(), ok);
}

}  // namespace

QualitativeSets qualitative_reach(const Skeleton& skel, std::span<const IntervalRow> rows,
                                  std::span<const char> target, std::span<const Sense> stateSense, Sense nature) {
    const std::size_t n = skel.numStates();

    // states where maximizers can force a positive probability
    std::vector<char> positive(target.begin(), target.end());
    for (bool grew = true; grew;) {
        grew = false;
        for (StateId s = 0; s < n; ++s) {
            if (positive[s]) continue;
            if (chooserAgrees(skel, s, stateSense[s], [&](ActionId a) { return hitsPositively(rows[a], positive, nature); })) {
                positive[s] = 1;
                grew = true;
            }
        }
    }

    // almost-sure: nu Y. mu X. target | Pre(stay in Y, hit X)
    std::vector<char> outer(n, 1);
    std::vector<char> leave(n, 0);
    while (true) {
        for (StateId s = 0; s < n; ++s) leave[s] = !outer[s];
        std::vector<char> inner(target.begin(), target.end());
        for (bool grew = true; grew;) {
            grew = false;
            for (StateId s = 0; s < n; ++s) {
                if (inner[s] || !outer[s]) continue;
                if (chooserAgrees(skel, s, stateSense[s],
                                  [&](ActionId a) { return staysAndHits(rows[a], outer, inner, leave, nature); })) {
                    inner[s] = 1;
                    grew = true;
                }
            }
        }
        if (inner == outer) break;
        outer = std::move(inner);
    }

    QualitativeSets result;
    result.prob0.resize(n);
    for (StateId s = 0; s < n; ++s) result.prob0[s] = !positive[s];
    result.prob1 = std::move(outer);
    return result;
}

QualitativeSets qualitative_reach(const Skeleton& skel, std::span<const IntervalRow> rows,
                                  std::span<const char> target, Sense controller, Sense nature) {
    std::vector<Sense> senses(skel.numStates(), controller);
    return qualitative_reach(skel, rows, target, senses, nature);
}

QualitativeSets qualitative_reach(const StochasticGame& game, std::span<const StateId> target, Sense player1,
                                  Sense player2) {
    const auto& mdp = game.mdp;
    std::vector<Sense> senses(mdp.numStates());
    for (StateId s = 0; s < mdp.numStates(); ++s) senses[s] = game.owner.at(s) == Player::One ? player1 : player2;
    auto rows = point_rows(mdp);
    auto mask = state_mask(mdp.numStates(), target);
    return qualitative_reach(mdp.skeleton(), rows, mask, senses, Sense::Max);
}

}  // namespace bmdp
