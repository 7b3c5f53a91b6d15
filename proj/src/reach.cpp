#include "bmdp/reach.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>

#include "bmdp/graph.hpp"
#include "bmdp/kernels.hpp"
#include "bmdp/polytope.hpp"

namespace bmdp {

Chain Chain::from(const MarkovChain& mc) {
    Chain chain;
    chain.next.reserve(mc.numStates());
    for (StateId s = 0; s < mc.numStates(); ++s) {
        auto acts = mc.available(s);
        if (acts.size() != 1) throw ModelError("not a Markov chain: state '" + mc.skeleton().stateName(s) + "'");
        chain.next.push_back(mc.trans(acts[0]));
    }
    return chain;
}

Chain Chain::resolve(const Skeleton& skel, std::span<const ActionId> controller,
                     std::span<const Distribution> perAction) {
    Chain chain;
    chain.next.reserve(skel.numStates());
    for (StateId s = 0; s < skel.numStates(); ++s) {
        ActionId a = controller[s];
        if (a == kNoAction || skel.owner(a) != s) throw ModelError("controller choice missing or foreign at state '" + skel.stateName(s) + "'");
        chain.next.push_back(perAction[a]);
    }
    return chain;
}

ValueVector chain_reach(const Chain& chain, std::span<const char> target) {
    const std::size_t n = chain.next.size();
    std::vector<std::vector<StateId>> pred(n);
    for (StateId s = 0; s < n; ++s) {
        for (const auto& [t, p] : chain.next[s].entries) {
            if (p > kZeroTolerance) pred[t].push_back(s);
        }
    }
    auto backward = [&](std::vector<char> seed, auto&& through) {
        std::deque<StateId> queue;
        for (StateId s = 0; s < n; ++s) {
            if (seed[s]) queue.push_back(s);
        }
        while (!queue.empty()) {
            StateId t = queue.front();
            queue.pop_front();
            for (StateId s : pred[t]) {
                if (!seed[s] && through(s)) {
                    seed[s] = 1;
                    queue.push_back(s);
                }
            }
        }
        return seed;
    };

    std::vector<char> targetMask(target.begin(), target.end());
    auto reaches = backward(targetMask, [](StateId) { return true; });
    std::vector<char> zero(n);
    for (StateId s = 0; s < n; ++s) zero[s] = !reaches[s];
    auto risky = backward(zero, [&](StateId s) { return !targetMask[s]; });

    ValueVector x(n, 0.0);
    std::vector<int> index(n, -1);
    int unknowns = 0;
    for (StateId s = 0; s < n; ++s) {
        if (!risky[s]) {
            x[s] = 1.0;
        } else if (!zero[s]) {
            index[s] = unknowns++;
        }
    }
    if (unknowns == 0) return x;

    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(unknowns);
    for (StateId s = 0; s < n; ++s) {
        if (index[s] < 0) continue;
        triplets.emplace_back(index[s], index[s], 1.0);
        for (const auto& [t, p] : chain.next[s].entries) {
            if (index[t] >= 0) {
                triplets.emplace_back(index[s], index[t], -p);
            } else {
                b[index[s]] += p * x[t];
            }
        }
    }
    Eigen::SparseMatrix<double> system(unknowns, unknowns);
    system.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(system);
    if (solver.info() != Eigen::Success) throw InternalError("singular reachability system after 0/1 classification");
    Eigen::VectorXd solution = solver.solve(b);
    if (solver.info() != Eigen::Success) throw InternalError("reachability solve failed");
    for (StateId s = 0; s < n; ++s) {
        if (index[s] >= 0) x[s] = std::clamp(solution[index[s]], 0.0, 1.0);
    }
    return x;
}

std::vector<std::vector<StateId>> chain_bsccs(const Chain& chain) {
    const std::size_t n = chain.next.size();
    std::vector<std::vector<StateId>> succ(n);
    for (StateId s = 0; s < n; ++s) {
        for (const auto& [t, p] : chain.next[s].entries) {
            if (p > kZeroTolerance) succ[s].push_back(t);
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

bool bscc_accepting(std::span<const StateId> bscc, const RabinAcceptance& acc, std::size_t numStates) {
    auto inside = state_mask(numStates, bscc);
    for (const auto& pair : acc.pairs) {
        bool meetsF = std::any_of(pair.fin.begin(), pair.fin.end(), [&](StateId s) { return inside[s]; });
        bool meetsI = std::any_of(pair.inf.begin(), pair.inf.end(), [&](StateId s) { return inside[s]; });
        if (!meetsF && meetsI) return true;
    }
    return false;
}

ValueVector chain_rabin(const Chain& chain, const RabinAcceptance& acc) {
    const std::size_t n = chain.next.size();
    std::vector<char> good(n, 0);
    for (const auto& bscc : chain_bsccs(chain)) {
        if (!bscc_accepting(bscc, acc, n)) continue;
        for (StateId s : bscc) good[s] = 1;
    }
    return chain_reach(chain, good);
}

ValueVector mc_reach_exact(const MarkovChain& mc, std::span<const StateId> target) {
    for (StateId s : target) {
        if (s >= mc.numStates()) throw ModelError("reach target references unknown state");
    }
    return chain_reach(Chain::from(mc), state_mask(mc.numStates(), target));
}

ValueVector evaluate_reach_pair(const Skeleton& skel, std::span<const ActionId> controller,
                                std::span<const Distribution> nature, std::span<const char> target) {
    return chain_reach(Chain::resolve(skel, controller, nature), target);
}

// -----------------------------------------------------------------------------

namespace {

// Actions within this distance of the best value count as optimal during extraction.
constexpr double kOptimalSlack = 1e-8;
constexpr double kImprovement = 1e-12;
constexpr std::size_t kMaxPolishRounds = 100'000;

bool better(double x, double y, Sense sense, double margin) {
    return sense == Sense::Max ? x > y + margin : x < y - margin;
}

struct Extraction {
    PositionalPolicy controller;
    NaturePolicy nature;
};

// Turns (approximate) optimal values into positional strategies. Minimizers act
// locally optimally; maximizers additionally make progress toward the target along
// value-optimal choices, which rules out value-preserving cycles that never reach it.
Extraction extract(const Skeleton& skel, std::span<const IntervalRow> rows, std::span<const char> target,
                   std::span<const char> prob0, std::span<const double> v, Sense controller, Sense nature) {
    const std::size_t n = skel.numStates();
    const std::size_t m = skel.numActions();

    Extraction out;
    out.nature.choice.resize(m);
    std::vector<double> q(m);
    for (ActionId a = 0; a < m; ++a) {
        out.nature.choice[a] = extreme_distribution(rows[a], v, nature);
        q[a] = expectation(out.nature.choice[a], v);
    }
    std::vector<double> best(n);
    for (StateId s = 0; s < n; ++s) {
        auto acts = skel.available(s);
        best[s] = q[acts[0]];
        for (ActionId a : acts) {
            if (better(q[a], best[s], controller, 0.0)) best[s] = q[a];
        }
    }
    auto optimal = [&](ActionId a) { return std::abs(q[a] - best[skel.owner(a)]) <= kOptimalSlack; };

    out.controller.choice.assign(n, kNoAction);
    for (StateId s = 0; s < n; ++s) {
        for (ActionId a : skel.available(s)) {
            if (optimal(a)) {
                out.controller.choice[s] = a;
                break;
            }
        }
    }
    if (controller == Sense::Min && nature == Sense::Min) return out;

    std::vector<char> ranked(target.begin(), target.end());
    std::vector<char> natureRanked(m, 0);
    std::vector<double> perturbed(n);
    for (bool grew = true; grew;) {
        grew = false;
        for (StateId s = 0; s < n; ++s) perturbed[s] = v[s] + (ranked[s] ? kOptimalSlack / 2 : 0.0);
        for (ActionId a = 0; a < m; ++a) {
            StateId s = skel.owner(a);
            if (natureRanked[a] || ranked[s] || prob0[s]) continue;
            const auto& row = rows[a];
            if (nature == Sense::Max) {
                Distribution d = extreme_distribution(row, perturbed, Sense::Max);
                double hit = 0.0;
                for (const auto& [t, p] : d.entries) {
                    if (ranked[t]) hit += p;
                }
                if (hit > kZeroTolerance && expectation(d, v) >= q[a] - kOptimalSlack) {
                    natureRanked[a] = 1;
                    out.nature.choice[a] = std::move(d);
                }
            } else {
                // nature can avoid the ranked states optimally unless every optimal choice hits them
                IntervalRow avoiding = row;
                for (auto& e : avoiding.entries) {
                    if (ranked[e.target]) e.bounds.hi = 0.0;
                }
                bool cannotAvoid = std::any_of(avoiding.entries.begin(), avoiding.entries.end(),
                                               [](const IntervalEntry& e) { return e.bounds.lo > e.bounds.hi; }) ||
                                   !avoiding.feasible();
                if (!cannotAvoid) {
                    double avoidValue = expectation(extreme_distribution(avoiding, v, Sense::Min), v);
                    cannotAvoid = avoidValue > q[a] + kOptimalSlack;
                }
                natureRanked[a] = cannotAvoid;
            }
        }
        for (StateId s = 0; s < n; ++s) {
            if (ranked[s] || prob0[s]) continue;
            auto acts = skel.available(s);
            if (controller == Sense::Max) {
                for (ActionId a : acts) {
                    if (optimal(a) && natureRanked[a]) {
                        out.controller.choice[s] = a;
                        ranked[s] = 1;
                        grew = true;
                        break;
                    }
                }
            } else if (std::all_of(acts.begin(), acts.end(), [&](ActionId a) { return !optimal(a) || natureRanked[a]; })) {
                ranked[s] = 1;
                grew = true;
            }
        }
    }
    return out;
}

// Policy iteration on the joint (controller, nature) strategy when both optimize in
// the same direction. Starts from the extracted pair; every switch strictly improves.
void polish(const Skeleton& skel, std::span<const IntervalRow> rows, std::span<const char> target, Sense sense,
            Extraction& pair, ValueVector& values) {
    const std::size_t n = skel.numStates();
    values = evaluate_reach_pair(skel, pair.controller.choice, pair.nature.choice, target);
    for (std::size_t round = 0; round < kMaxPolishRounds; ++round) {
        bool changed = false;
        for (StateId s = 0; s < n; ++s) {
            if (target[s]) continue;
            ActionId current = pair.controller.choice[s];
            ActionId bestAction = current;
            double bestValue = values[s];
            Distribution bestDist;
            for (ActionId a : skel.available(s)) {
                Distribution d = extreme_distribution(rows[a], values, sense);
                double qa = expectation(d, values);
                if (better(qa, bestValue, sense, kImprovement)) {
                    bestValue = qa;
                    bestAction = a;
                    bestDist = std::move(d);
                }
            }
            if (bestAction != current || !bestDist.entries.empty()) {
                pair.controller.choice[s] = bestAction;
                pair.nature.choice[bestAction] = std::move(bestDist);
                changed = true;
            }
        }
        if (!changed) return;
        values = evaluate_reach_pair(skel, pair.controller.choice, pair.nature.choice, target);
    }
    throw InternalError("policy iteration did not stabilize");
}

}  // namespace

ReachResult robust_reach(const Skeleton& skel, std::span<const IntervalRow> rows, std::span<const char> target,
                         Sense controller, Sense nature, const RobustReachOptions& options) {
    const std::size_t n = skel.numStates();
    auto qual = qualitative_reach(skel, rows, target, controller, nature);

    std::vector<char> frozen(n);
    ValueVector x(n, 0.0);
    for (StateId s = 0; s < n; ++s) {
        frozen[s] = qual.prob0[s] || qual.prob1[s] || target[s];
        if (qual.prob1[s] || target[s]) x[s] = 1.0;
    }

    SweepProblem problem{&skel, rows, frozen, controller, nature};
    ValueVector y(n);
    ReachResult result;
    const bool anyOpen = std::any_of(frozen.begin(), frozen.end(), [](char f) { return !f; });
    while (anyOpen) {
        double delta = options.parallel ? sweep_parallel(problem, x, y) : sweep_serial(problem, x, y);
        if (options.checkMonotone) {
            for (StateId s = 0; s < n; ++s) {
                if (y[s] < x[s] - kZeroTolerance) {
                    std::ostringstream msg;
                    msg << "value iteration decreased at state '" << skel.stateName(s) << "': " << x[s] << " -> " << y[s];
                    throw InternalError(msg.str());
                }
            }
        }
        x.swap(y);
        ++result.iterations;
        result.residual = delta;
        if (delta < options.epsilon) break;
        if (result.iterations >= options.maxIterations) {
            std::ostringstream msg;
            msg << "value iteration did not converge within " << options.maxIterations << " sweeps (residual " << delta << ")";
            throw ConvergenceError(msg.str(), x, delta, result.iterations);
        }
    }

    Extraction pair = extract(skel, rows, target, qual.prob0, x, controller, nature);
    const bool pointModel = std::all_of(rows.begin(), rows.end(), [](const IntervalRow& r) { return r.isPoint(); });
    if (controller == nature || pointModel) {
        polish(skel, rows, target, controller, pair, result.values);
    } else {
        ValueVector exact = evaluate_reach_pair(skel, pair.controller.choice, pair.nature.choice, target);
        double gap = 0.0;
        for (StateId s = 0; s < n; ++s) gap = std::max(gap, std::abs(exact[s] - x[s]));
        result.values = gap <= 1e-6 ? std::move(exact) : x;
    }
    for (StateId s = 0; s < n; ++s) {
        if (qual.prob0[s]) result.values[s] = 0.0;
        if (qual.prob1[s] || target[s]) result.values[s] = 1.0;
    }
    result.controller = std::move(pair.controller);
    result.nature = std::move(pair.nature);
    return result;
}

namespace {

std::vector<char> checkedTarget(const ReachQuery& query, std::size_t n) {
    if (query.target.empty()) throw std::invalid_argument("reach target must be nonempty");
    if (!(query.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    for (StateId s : query.target) {
        if (s >= n) throw std::invalid_argument("reach target references unknown state");
    }
    return state_mask(n, query.target);
}

}  // namespace

ReachResult mdp_reach(const Mdp& mdp, const ReachQuery& query) {
    auto target = checkedTarget(query, mdp.numStates());
    auto rows = point_rows(mdp);
    RobustReachOptions options{query.epsilon, query.maxIterations};
    return robust_reach(mdp.skeleton(), rows, target, query.controller, query.controller, options);
}

ReachResult bmdp_reach(const Bmdp& model, const ReachQuery& query) {
    if (!query.nature) throw std::invalid_argument("bmdp_reach needs a nature optimization sense");
    auto target = checkedTarget(query, model.numStates());
    RobustReachOptions options{query.epsilon, query.maxIterations};
    return robust_reach(model.skeleton(), model.rows(), target, query.controller, *query.nature, options);
}

}  // namespace bmdp
