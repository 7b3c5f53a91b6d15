#include "bmdp/omega.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <optional>
#include <sstream>

#include "bmdp/reach.hpp"

namespace bmdp {

namespace {

constexpr double kValueGap = 1e-9;

bool meets(std::span<const StateId> states, std::span<const char> mask) {
    return std::any_of(states.begin(), states.end(), [&](StateId s) { return mask[s]; });
}

IntervalRow confinedTo(const IntervalRow& row, std::span<const char> inside) {
    IntervalRow copy = row;
    for (auto& e : copy.entries) {
        if (!inside[e.target]) e.bounds.hi = 0.0;
    }
    return copy;
}

// Inside end component `ec`, picks for each not yet assigned state an EC action and a
// distribution confined to the component such that every state moves with positive
// probability to a state closer to `goal` (or to one already assigned).
void steerWithin(const Skeleton& skel, std::span<const IntervalRow> rows, const EndComponent& ec,
                 std::span<const char> goal, std::vector<char>& assigned, PositionalPolicy& controller,
                 std::vector<Distribution>& nature) {
    const std::size_t n = skel.numStates();
    auto inside = state_mask(n, ec.states);
    auto ecAction = std::vector<char>(skel.numActions(), 0);
    for (ActionId a : ec.actions) ecAction[a] = 1;

    std::vector<char> ranked(n, 0);
    for (StateId s : ec.states) {
        if (assigned[s]) {
            ranked[s] = 1;
        } else if (goal[s]) {
            for (ActionId a : skel.available(s)) {
                if (!ecAction[a]) continue;
                std::vector<double> zeros(n, 0.0);
                controller.choice[s] = a;
                nature[a] = extreme_distribution(confinedTo(rows[a], inside), zeros, Sense::Max);
                break;
            }
            ranked[s] = 1;
            assigned[s] = 1;
        }
    }
    for (bool grew = true; grew;) {
        grew = false;
        std::vector<char> layer = ranked;
        std::vector<double> indicator(n);
        for (StateId s = 0; s < n; ++s) indicator[s] = ranked[s] ? 1.0 : 0.0;
        for (StateId s : ec.states) {
            if (ranked[s]) continue;
            for (ActionId a : skel.available(s)) {
                if (!ecAction[a] || max_mass_within(rows[a], inside, ranked) <= kZeroTolerance) continue;
                controller.choice[s] = a;
                nature[a] = extreme_distribution(confinedTo(rows[a], inside), indicator, Sense::Max);
                layer[s] = 1;
                assigned[s] = 1;
                grew = true;
                break;
            }
        }
        ranked = std::move(layer);
    }
    for (StateId s : ec.states) {
        if (!ranked[s]) throw InternalError("end component state '" + skel.stateName(s) + "' cannot reach its goal");
    }
}

}  // namespace

RabinMaxResult mdp_rabin_max(const Mdp& mdp) {
    const auto& skel = mdp.skeleton();
    const std::size_t n = mdp.numStates();
    auto rows = point_rows(mdp);

    std::vector<char> winning(n, 0);
    std::vector<char> assigned(n, 0);
    PositionalPolicy inside{std::vector<ActionId>(n, kNoAction)};
    std::vector<Distribution> unusedNature(mdp.numActions());
    for (const auto& pair : mdp.acceptance().pairs) {
        auto fin = state_mask(n, pair.fin);
        auto inf = state_mask(n, pair.inf);
        std::vector<char> allowed(n);
        for (StateId s = 0; s < n; ++s) allowed[s] = !fin[s];
        for (const auto& ec : interval_mecs(skel, rows, allowed, {})) {
            if (!meets(ec.states, inf)) continue;
            for (StateId s : ec.states) winning[s] = 1;
            steerWithin(skel, rows, ec, inf, assigned, inside, unusedNature);
        }
    }

    auto reach = robust_reach(skel, rows, winning, Sense::Max, Sense::Max);
    RabinMaxResult result{std::move(reach.values), std::move(reach.controller)};
    for (StateId s = 0; s < n; ++s) {
        if (winning[s]) result.policy.choice[s] = inside.choice[s];
    }
    return result;
}

std::vector<EndComponent> streett_good_components(const Mdp& mdp) {
    const std::size_t n = mdp.numStates();
    const auto& pairs = mdp.acceptance().pairs;
    std::vector<std::vector<char>> fin;
    std::vector<std::vector<char>> inf;
    for (const auto& pair : pairs) {
        fin.push_back(state_mask(n, pair.fin));
        inf.push_back(state_mask(n, pair.inf));
    }

    std::vector<EndComponent> good;
    std::deque<EndComponent> work;
    for (auto& ec : mec_decomposition(mdp)) work.push_back(std::move(ec));
    while (!work.empty()) {
        EndComponent ec = std::move(work.front());
        work.pop_front();
        std::size_t broken = pairs.size();
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (meets(ec.states, inf[i]) && !meets(ec.states, fin[i])) {
                broken = i;
                break;
            }
        }
        if (broken == pairs.size()) {
            good.push_back(std::move(ec));
            continue;
        }
        // staying here forever satisfies pair `broken`; avoid its I-states
        std::vector<char> allowed(n, 0);
        for (StateId s : ec.states) allowed[s] = !inf[broken][s];
        for (auto& sub : mec_decomposition(mdp, allowed)) work.push_back(std::move(sub));
    }
    std::sort(good.begin(), good.end(), [](const EndComponent& x, const EndComponent& y) { return x.states < y.states; });
    return good;
}

RabinMinResult mdp_rabin_min(const Mdp& mdp) {
    const std::size_t n = mdp.numStates();
    auto good = streett_good_components(mdp);
    std::vector<char> inGood(n, 0);
    for (const auto& ec : good) {
        for (StateId s : ec.states) inGood[s] = 1;
    }
    auto rows = point_rows(mdp);
    auto reach = robust_reach(mdp.skeleton(), rows, inGood, Sense::Max, Sense::Max);

    RabinMinResult result;
    result.values.resize(n);
    for (StateId s = 0; s < n; ++s) result.values[s] = 1.0 - reach.values[s];
    result.policy = StationaryPolicy::fromPositional(reach.controller);
    for (const auto& ec : good) {
        std::vector<std::vector<ActionId>> perState(n);
        for (ActionId a : ec.actions) perState[mdp.skeleton().owner(a)].push_back(a);
        for (StateId s : ec.states) {
            const auto& acts = perState[s];
            auto& choice = result.policy.choice[s];
            choice.clear();
            for (ActionId a : acts) choice.emplace_back(a, 1.0 / static_cast<double>(acts.size()));
        }
    }
    return result;
}

// -----------------------------------------------------------------------------

StochasticGame build_game(const Bmdp& model, GameIndex* index) {
    const auto& skel = model.skeleton();
    const std::size_t n = model.numStates();
    const std::size_t m = model.numActions();

    GameIndex idx;
    idx.numStates = n;
    idx.numActions = m;
    idx.vertices.reserve(m);
    for (ActionId a = 0; a < m; ++a) idx.vertices.push_back(bfs_vertices(model.row(a)));

    std::vector<std::string> names = skel.stateNames();
    std::vector<ActionInfo> actions = skel.actions();
    std::vector<Distribution> trans;
    std::vector<Player> owner(n, Player::One);
    for (ActionId a = 0; a < m; ++a) {
        names.push_back(skel.stateName(skel.owner(a)) + "~" + skel.actionName(a));
        owner.push_back(Player::Two);
        trans.push_back(Distribution::dirac(static_cast<StateId>(n + a)));
    }
    idx.firstVertexAction.resize(m);
    for (ActionId a = 0; a < m; ++a) {
        idx.firstVertexAction[a] = static_cast<ActionId>(actions.size());
        const auto& vertices = idx.vertices[a].vertices;
        for (std::size_t k = 0; k < vertices.size(); ++k) {
            actions.push_back({skel.actionName(a) + "/" + std::to_string(k), static_cast<StateId>(n + a)});
            trans.push_back(vertices[k]);
        }
    }
    StochasticGame game{Mdp(Skeleton(std::move(names), skel.initial(), std::move(actions)), std::move(trans),
                            model.acceptance()),
                        std::move(owner)};
    if (index) *index = std::move(idx);
    return game;
}

namespace {

struct Evaluation {
    ValueVector values;
    StationaryPolicy player2;
};

class StrategyImprovement {
public:
    explicit StrategyImprovement(const StochasticGame& game) : game_(game), mdp_(game.mdp) {
        for (StateId s = 0; s < mdp_.numStates(); ++s) {
            if (game.owner.at(s) == Player::One) playerOne_.push_back(s);
        }
    }

    GameSolution solve() {
        PositionalPolicy current{std::vector<ActionId>(mdp_.numStates(), kNoAction)};
        for (StateId s : playerOne_) current.choice[s] = mdp_.available(s)[0];
        Evaluation eval = evaluate(current);

        std::size_t rounds = 0;
        for (;; ++rounds) {
            if (rounds >= kMaxRounds) throw InternalError("strategy improvement exceeded round limit" + trace());
            auto next = improve(current, eval);
            if (!next) break;
            auto& [policy, evaluated] = *next;
            for (StateId s = 0; s < mdp_.numStates(); ++s) {
                if (evaluated.values[s] < eval.values[s] - kValueGap) {
                    std::ostringstream msg;
                    msg << "strategy improvement decreased the value at '" << mdp_.skeleton().stateName(s) << "' from "
                        << eval.values[s] << " to " << evaluated.values[s] << trace();
                    throw InternalError(msg.str());
                }
            }
            current = std::move(policy);
            eval = std::move(evaluated);
            history_.push_back(eval.values[mdp_.skeleton().initial()]);
        }

        GameSolution solution;
        solution.values = std::move(eval.values);
        solution.player1 = std::move(current);
        solution.player2 = std::move(eval.player2);
        for (StateId s : playerOne_) solution.player2.choice[s].clear();
        solution.rounds = rounds;
        return solution;
    }

private:
    static constexpr std::size_t kMaxRounds = 100'000;
    static constexpr std::size_t kEnumerationLimit = 4096;

    Evaluation evaluate(const PositionalPolicy& policy) const {
        std::vector<char> keep(mdp_.numActions(), 0);
        for (ActionId a = 0; a < mdp_.numActions(); ++a) {
            StateId s = mdp_.skeleton().owner(a);
            keep[a] = game_.owner[s] == Player::Two || policy.choice[s] == a;
        }
        std::vector<ActionId> original;
        Mdp fixed = restrict_actions(mdp_, keep, &original);
        auto min = mdp_rabin_min(fixed);
        Evaluation eval{std::move(min.values), std::move(min.policy)};
        for (auto& choice : eval.player2.choice) {
            for (auto& [a, w] : choice) a = original[a];
        }
        return eval;
    }

    double q(ActionId a, const ValueVector& v) const { return expectation(mdp_.trans(a), v); }

    static bool improves(const ValueVector& next, const ValueVector& now) {
        bool strict = false;
        for (std::size_t s = 0; s < now.size(); ++s) {
            if (next[s] < now[s] - kValueGap) return false;
            if (next[s] > now[s] + kValueGap) strict = true;
        }
        return strict;
    }

    using Candidate = std::pair<PositionalPolicy, Evaluation>;

    std::optional<Candidate> tryPolicy(PositionalPolicy policy, const Evaluation& now) const {
        Evaluation eval = evaluate(policy);
        if (!improves(eval.values, now.values)) return std::nullopt;
        return Candidate{std::move(policy), std::move(eval)};
    }

    std::optional<Candidate> improve(const PositionalPolicy& current, const Evaluation& now) const {
        const auto& v = now.values;
        PositionalPolicy switched = current;
        std::vector<StateId> changed;
        for (StateId s : playerOne_) {
            auto acts = mdp_.available(s);
            double best = -1.0;
            for (ActionId a : acts) best = std::max(best, q(a, v));
            if (best <= v[s] + kValueGap) continue;
            for (ActionId a : acts) {
                if (q(a, v) >= best - kValueGap) {
                    switched.choice[s] = a;
                    break;
                }
            }
            changed.push_back(s);
        }
        if (!changed.empty()) {
            if (auto c = tryPolicy(switched, now)) return c;
            for (StateId s : changed) {
                PositionalPolicy single = current;
                single.choice[s] = switched.choice[s];
                if (auto c = tryPolicy(std::move(single), now)) return c;
            }
        }
        return escape(current, now);
    }

    // No single profitable switch: look for a joint change among value-preserving
    // actions, first inside each class of equal value, then across all states.
    std::optional<Candidate> escape(const PositionalPolicy& current, const Evaluation& now) const {
        const auto& v = now.values;
        std::vector<std::pair<StateId, std::vector<ActionId>>> options;
        for (StateId s : playerOne_) {
            std::vector<ActionId> keep;
            for (ActionId a : mdp_.available(s)) {
                if (q(a, v) >= v[s] - kValueGap) keep.push_back(a);
            }
            if (keep.size() > 1) options.emplace_back(s, std::move(keep));
        }
        if (options.empty()) return std::nullopt;

        std::vector<std::size_t> order(options.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return v[options[x].first] < v[options[y].first]; });
        std::vector<std::vector<std::size_t>> classes;
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (k == 0 || v[options[order[k]].first] > v[options[order[k - 1]].first] + kValueGap) classes.emplace_back();
            classes.back().push_back(order[k]);
        }
        for (const auto& cls : classes) {
            if (auto c = enumerate(current, now, options, cls)) return c;
        }
        if (classes.size() > 1) {
            std::vector<std::size_t> all(options.size());
            std::iota(all.begin(), all.end(), std::size_t{0});
            if (auto c = enumerate(current, now, options, all)) return c;
        }
        return std::nullopt;
    }

    std::optional<Candidate> enumerate(const PositionalPolicy& current, const Evaluation& now,
                                       const std::vector<std::pair<StateId, std::vector<ActionId>>>& options,
                                       const std::vector<std::size_t>& members) const {
        std::size_t total = 1;
        for (std::size_t k : members) {
            total *= options[k].second.size();
            if (total > kEnumerationLimit) return std::nullopt;
        }
        std::vector<std::size_t> digit(members.size(), 0);
        for (std::size_t count = 0; count < total; ++count) {
            PositionalPolicy candidate = current;
            bool same = true;
            for (std::size_t j = 0; j < members.size(); ++j) {
                const auto& [s, acts] = options[members[j]];
                candidate.choice[s] = acts[digit[j]];
                same = same && acts[digit[j]] == current.choice[s];
            }
            if (!same) {
                if (auto c = tryPolicy(std::move(candidate), now)) return c;
            }
            for (std::size_t j = 0; j < members.size(); ++j) {
                if (++digit[j] < options[members[j]].second.size()) break;
                digit[j] = 0;
            }
        }
        return std::nullopt;
    }

    std::string trace() const {
        std::ostringstream out;
        out << " (initial-state values by round:";
        std::size_t from = history_.size() > 10 ? history_.size() - 10 : 0;
        for (std::size_t k = from; k < history_.size(); ++k) out << ' ' << history_[k];
        out << ')';
        return out.str();
    }

    const StochasticGame& game_;
    const Mdp& mdp_;
    std::vector<StateId> playerOne_;
    std::vector<double> history_;
};

}  // namespace

GameSolution sg_rabin(const StochasticGame& game, Sense player2) {
    if (game.owner.size() != game.mdp.numStates()) throw ModelError("game ownership does not cover every state");
    if (player2 == Sense::Min) return StrategyImprovement(game).solve();

    auto best = mdp_rabin_max(game.mdp);
    GameSolution solution;
    solution.values = std::move(best.values);
    PositionalPolicy p1 = best.policy;
    PositionalPolicy p2 = best.policy;
    for (StateId s = 0; s < game.mdp.numStates(); ++s) {
        (game.owner[s] == Player::One ? p2 : p1).choice[s] = kNoAction;
    }
    solution.player1 = std::move(p1);
    solution.player2 = StationaryPolicy::fromPositional(p2);
    return solution;
}

// -----------------------------------------------------------------------------

NaturePolicy nature_from_game(const GameIndex& index, const StationaryPolicy& player2) {
    NaturePolicy nature;
    nature.choice.resize(index.numActions);
    for (ActionId a = 0; a < index.numActions; ++a) {
        const auto& vertices = index.vertices[a].vertices;
        std::vector<std::pair<StateId, double>> mixture;
        for (const auto& [gameAction, w] : player2.choice.at(index.numStates + a)) {
            for (const auto& [t, p] : vertices.at(gameAction - index.firstVertexAction[a]).entries) {
                mixture.emplace_back(t, w * p);
            }
        }
        nature.choice[a] = mixture.empty() ? vertices.front() : Distribution::fromEntries(std::move(mixture));
    }
    return nature;
}

namespace {

GameResult fromGame(const Bmdp& model, Sense player2) {
    const auto n = static_cast<std::ptrdiff_t>(model.numStates());
    GameIndex index;
    auto game = build_game(model, &index);
    auto solution = sg_rabin(game, player2);

    GameResult result;
    result.values.assign(solution.values.begin(), solution.values.begin() + n);
    result.controller.choice.assign(solution.player1.choice.begin(), solution.player1.choice.begin() + n);
    result.nature = nature_from_game(index, solution.player2);
    result.witness = instantiate(model, result.nature);
    result.iterations = solution.rounds;
    return result;
}

}  // namespace

GameResult bmdp_lower(const Bmdp& model) { return fromGame(model, Sense::Min); }

GameResult bmdp_upper_game(const Bmdp& model) { return fromGame(model, Sense::Max); }

GameResult bmdp_upper(const Bmdp& model) {
    const auto& skel = model.skeleton();
    const std::size_t n = model.numStates();
    const std::size_t m = model.numActions();

    GameResult result;
    std::vector<char> winning(n, 0);
    std::vector<char> assigned(n, 0);
    PositionalPolicy inside{std::vector<ActionId>(n, kNoAction)};
    std::vector<Distribution> insideNature(m);
    for (const auto& pair : model.acceptance().pairs) {
        auto fin = state_mask(n, pair.fin);
        auto inf = state_mask(n, pair.inf);
        std::vector<IntervalRow> rows = model.rows();
        for (ActionId a = 0; a < m; ++a) {
            StateId s = skel.owner(a);
            if (fin[s]) rows[a] = IntervalRow::point(s, a, Distribution::dirac(s));
        }
        PairComponents comps;
        comps.mecs = interval_mecs(skel, rows, {}, {});
        for (const auto& ec : comps.mecs) {
            bool wins = meets(ec.states, inf);
            comps.winning.push_back(wins);
            if (!wins) continue;
            for (StateId s : ec.states) winning[s] = 1;
            steerWithin(skel, rows, ec, inf, assigned, inside, insideNature);
        }
        result.components.push_back(std::move(comps));
    }

    auto reach = robust_reach(skel, model.rows(), winning, Sense::Max, Sense::Max);
    result.values = std::move(reach.values);
    result.controller = std::move(reach.controller);
    result.nature = std::move(reach.nature);
    for (StateId s = 0; s < n; ++s) {
        if (!winning[s]) continue;
        ActionId a = inside.choice[s];
        result.controller.choice[s] = a;
        result.nature.choice[a] = insideNature[a];
    }
    result.witness = instantiate(model, result.nature);
    result.iterations = reach.iterations;
    return result;
}

Bmdp reach_as_rabin(const Bmdp& model, std::span<const StateId> target) {
    const auto& skel = model.skeleton();
    auto mask = state_mask(model.numStates(), target);
    std::vector<IntervalRow> rows = model.rows();
    for (ActionId a = 0; a < model.numActions(); ++a) {
        StateId s = skel.owner(a);
        if (mask[s]) rows[a] = IntervalRow::point(s, a, Distribution::dirac(s));
    }
    std::vector<StateId> sorted(target.begin(), target.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    return Bmdp(skel, std::move(rows), RabinAcceptance{{RabinPair{{}, std::move(sorted)}}});
}

}  // namespace bmdp
