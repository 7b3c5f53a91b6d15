#include "bmdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace bmdp {

double Distribution::probability(StateId state) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), state,
                               [](const auto& e, StateId s) { return e.first < s; });
    return (it != entries.end() && it->first == state) ? it->second : 0.0;
}

double Distribution::sum() const {
    double total = 0.0;
    for (const auto& [s, p] : entries) total += p;
    return total;
}

Distribution Distribution::fromDense(std::span<const double> dense) {
    Distribution d;
    for (std::size_t s = 0; s < dense.size(); ++s) {
        if (dense[s] > kZeroTolerance) d.entries.emplace_back(static_cast<StateId>(s), dense[s]);
    }
    return d;
}

Distribution Distribution::fromEntries(std::vector<std::pair<StateId, double>> entries) {
    std::sort(entries.begin(), entries.end());
    Distribution d;
    for (const auto& [s, p] : entries) {
        if (!d.entries.empty() && d.entries.back().first == s) {
            d.entries.back().second += p;
        } else {
            d.entries.emplace_back(s, p);
        }
    }
    std::erase_if(d.entries, [](const auto& e) { return e.second <= kZeroTolerance; });
    return d;
}

ProbInterval IntervalRow::bounds(StateId target) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), target,
                               [](const IntervalEntry& e, StateId s) { return e.target < s; });
    return (it != entries.end() && it->target == target) ? it->bounds : ProbInterval{};
}

double IntervalRow::lowerSum() const {
    double total = 0.0;
    for (const auto& e : entries) total += e.bounds.lo;
    return total;
}

double IntervalRow::upperSum() const {
    double total = 0.0;
    for (const auto& e : entries) total += e.bounds.hi;
    return total;
}

bool IntervalRow::feasible() const {
    return lowerSum() <= 1.0 + kProbTolerance && upperSum() >= 1.0 - kProbTolerance;
}

bool IntervalRow::isPoint() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.bounds.isPoint(); });
}

bool IntervalRow::contains(const Distribution& dist) const {
    if (std::abs(dist.sum() - 1.0) > kProbTolerance) return false;
    for (const auto& [s, p] : dist.entries) {
        if (!bounds(s).contains(p)) return false;
    }
    for (const auto& e : entries) {
        if (!e.bounds.contains(dist.probability(e.target))) return false;
    }
    return true;
}

IntervalRow IntervalRow::point(StateId source, ActionId action, const Distribution& dist) {
    IntervalRow row{source, action, {}};
    row.entries.reserve(dist.entries.size());
    for (const auto& [s, p] : dist.entries) row.entries.push_back({s, {p, p}});
    return row;
}

StationaryPolicy StationaryPolicy::fromPositional(const PositionalPolicy& policy) {
    StationaryPolicy result;
    result.choice.resize(policy.choice.size());
    for (std::size_t s = 0; s < policy.choice.size(); ++s) {
        if (policy.choice[s] != kNoAction) result.choice[s] = {{policy.choice[s], 1.0}};
    }
    return result;
}

// -----------------------------------------------------------------------------

Skeleton::Skeleton(std::vector<std::string> stateNames, StateId initial, std::vector<ActionInfo> actions)
    : stateNames_(std::move(stateNames)), initial_(initial), actions_(std::move(actions)) {
    if (stateNames_.empty()) throw ModelError("model has no states");
    if (initial_ >= stateNames_.size()) throw ModelError("initial state out of range");
    std::unordered_set<std::string> seen;
    for (const auto& name : stateNames_) {
        if (!seen.insert(name).second) throw ModelError("duplicate state name '" + name + "'");
    }
    available_.resize(stateNames_.size());
    for (ActionId a = 0; a < actions_.size(); ++a) {
        StateId owner = actions_[a].owner;
        if (owner >= stateNames_.size()) throw ModelError("action '" + actions_[a].name + "' has no valid owner");
        for (ActionId other : available_[owner]) {
            if (actions_[other].name == actions_[a].name) {
                throw ModelError("duplicate action '" + actions_[a].name + "' at state '" + stateNames_[owner] + "'");
            }
        }
        available_[owner].push_back(a);
    }
    for (StateId s = 0; s < stateNames_.size(); ++s) {
        if (available_[s].empty()) throw ModelError("state '" + stateNames_[s] + "' has no actions");
    }
}

std::optional<StateId> Skeleton::findState(const std::string& name) const {
    auto it = std::find(stateNames_.begin(), stateNames_.end(), name);
    if (it == stateNames_.end()) return std::nullopt;
    return static_cast<StateId>(it - stateNames_.begin());
}

std::optional<ActionId> Skeleton::findAction(StateId s, const std::string& name) const {
    for (ActionId a : available_.at(s)) {
        if (actions_[a].name == name) return a;
    }
    return std::nullopt;
}

bool Skeleton::sameShape(const Skeleton& other) const {
    if (numStates() != other.numStates() || numActions() != other.numActions()) return false;
    for (ActionId a = 0; a < numActions(); ++a) {
        if (owner(a) != other.owner(a)) return false;
    }
    return true;
}

namespace {

void checkAcceptance(const RabinAcceptance& acc, std::size_t n) {
    for (const auto& pair : acc.pairs) {
        for (StateId s : pair.fin) {
            if (s >= n) throw ModelError("acceptance references unknown state");
        }
        for (StateId s : pair.inf) {
            if (s >= n) throw ModelError("acceptance references unknown state");
        }
    }
}

}  // namespace

Mdp::Mdp(Skeleton skeleton, std::vector<Distribution> trans, RabinAcceptance acc)
    : skeleton_(std::move(skeleton)), trans_(std::move(trans)), acc_(std::move(acc)) {
    if (trans_.size() != skeleton_.numActions()) throw ModelError("transition count does not match action count");
    for (ActionId a = 0; a < trans_.size(); ++a) {
        const auto& d = trans_[a];
        if (d.entries.empty()) throw ModelError("empty distribution for action '" + skeleton_.actionName(a) + "'");
        StateId prev = kNoState;
        for (const auto& [s, p] : d.entries) {
            if (s >= skeleton_.numStates()) throw ModelError("distribution references unknown state");
            if (prev != kNoState && s <= prev) throw ModelError("distribution entries not sorted");
            if (!(p > 0.0) || p > 1.0 + kProbTolerance) throw ModelError("distribution entry outside (0,1]");
            prev = s;
        }
        if (std::abs(d.sum() - 1.0) > kProbTolerance) {
            throw ModelError("distribution of action '" + skeleton_.actionName(a) + "' at state '" +
                             skeleton_.stateName(skeleton_.owner(a)) + "' does not sum to 1");
        }
    }
    checkAcceptance(acc_, skeleton_.numStates());
}

bool Mdp::isMarkovChain() const {
    for (StateId s = 0; s < numStates(); ++s) {
        if (available(s).size() != 1) return false;
    }
    return true;
}

Bmdp::Bmdp(Skeleton skeleton, std::vector<IntervalRow> rows, RabinAcceptance acc)
    : skeleton_(std::move(skeleton)), rows_(std::move(rows)), acc_(std::move(acc)) {
    if (rows_.size() != skeleton_.numActions()) throw ModelError("row count does not match action count");
    for (ActionId a = 0; a < rows_.size(); ++a) {
        auto& row = rows_[a];
        if (row.action != a || row.source != skeleton_.owner(a)) throw ModelError("row is not attached to its action");
        std::sort(row.entries.begin(), row.entries.end(),
                  [](const IntervalEntry& x, const IntervalEntry& y) { return x.target < y.target; });
        for (std::size_t i = 0; i < row.entries.size(); ++i) {
            if (row.entries[i].target >= skeleton_.numStates()) throw ModelError("row references unknown state");
            if (i > 0 && row.entries[i].target == row.entries[i - 1].target) {
                throw ModelError("duplicate successor in row of action '" + skeleton_.actionName(a) + "'");
            }
        }
    }
    checkAcceptance(acc_, skeleton_.numStates());
}

bool Bmdp::isPointModel() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const IntervalRow& r) { return r.isPoint(); });
}

// -----------------------------------------------------------------------------

const char* to_string(Violation::Kind kind) {
    switch (kind) {
        case Violation::Kind::IntervalOrder: return "interval-order";
        case Violation::Kind::IntervalRange: return "interval-range";
        case Violation::Kind::RowFeasibility: return "row-feasibility";
        case Violation::Kind::ActionOwnership: return "action-ownership";
        case Violation::Kind::RabinOverlap: return "rabin-overlap";
        case Violation::Kind::UnknownState: return "unknown-state";
    }
    return "unknown";
}

std::vector<Violation> validate_bmdp(const Bmdp& model) {
    std::vector<Violation> out;
    const auto& skel = model.skeleton();
    auto where = [&](ActionId a) {
        return "state '" + skel.stateName(skel.owner(a)) + "' action '" + skel.actionName(a) + "'";
    };
    for (ActionId a = 0; a < model.numActions(); ++a) {
        const auto& row = model.row(a);
        if (row.source != skel.owner(a)) {
            out.push_back({Violation::Kind::ActionOwnership, row.source, a, kNoState, where(a) + ": row source differs from owner"});
        }
        for (const auto& e : row.entries) {
            const auto& [lo, hi] = e.bounds;
            if (lo > hi) {
                std::ostringstream msg;
                msg << where(a) << ": interval [" << lo << ", " << hi << "] to '" << skel.stateName(e.target)
                    << "' has lo > hi";
                out.push_back({Violation::Kind::IntervalOrder, row.source, a, e.target, msg.str()});
            }
            if (lo < 0.0 || hi > 1.0) {
                out.push_back({Violation::Kind::IntervalRange, row.source, a, e.target,
                               where(a) + ": interval to '" + skel.stateName(e.target) + "' leaves [0,1]"});
            }
        }
        double loSum = row.lowerSum();
        double hiSum = row.upperSum();
        if (loSum > 1.0 + kProbTolerance || hiSum < 1.0 - kProbTolerance) {
            std::ostringstream msg;
            msg << where(a) << ": need sum(lo) <= 1 <= sum(hi), got " << loSum << " and " << hiSum;
            out.push_back({Violation::Kind::RowFeasibility, row.source, a, kNoState, msg.str()});
        }
    }
    const auto& pairs = model.acceptance().pairs;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (StateId s : pairs[i].fin) {
            if (s >= model.numStates()) {
                out.push_back({Violation::Kind::UnknownState, s, kNoAction, kNoState, "rabin pair references unknown state"});
            } else if (std::find(pairs[i].inf.begin(), pairs[i].inf.end(), s) != pairs[i].inf.end()) {
                out.push_back({Violation::Kind::RabinOverlap, s, kNoAction, kNoState,
                               "rabin pair " + std::to_string(i) + ": state '" + skel.stateName(s) + "' is in both F and I"});
            }
        }
        for (StateId s : pairs[i].inf) {
            if (s >= model.numStates()) {
                out.push_back({Violation::Kind::UnknownState, s, kNoAction, kNoState, "rabin pair references unknown state"});
            }
        }
    }
    return out;
}

bool is_consistent(const Mdp& mdp, const Bmdp& model) {
    if (!mdp.skeleton().sameShape(model.skeleton())) throw ModelError("MDP and BMDP have different state/action skeletons");
    for (ActionId a = 0; a < mdp.numActions(); ++a) {
        if (!model.row(a).contains(mdp.trans(a))) return false;
    }
    return true;
}

Mdp instantiate(const Bmdp& model, const NaturePolicy& nature) {
    if (nature.choice.size() != model.numActions()) throw ModelError("nature policy does not cover every action");
    const auto& skel = model.skeleton();
    std::vector<Distribution> trans;
    trans.reserve(model.numActions());
    for (ActionId a = 0; a < model.numActions(); ++a) {
        if (!model.row(a).contains(nature.choice[a])) {
            throw BoundViolation("nature choice for state '" + skel.stateName(skel.owner(a)) + "' action '" +
                                 skel.actionName(a) + "' violates the interval bounds");
        }
        trans.push_back(nature.choice[a]);
    }
    return Mdp(skel, std::move(trans), model.acceptance());
}

MarkovChain induce_mc(const Mdp& mdp, const PositionalPolicy& policy) {
    const auto& skel = mdp.skeleton();
    if (policy.choice.size() != mdp.numStates()) throw ModelError("policy size does not match state count");
    std::vector<ActionInfo> actions;
    std::vector<Distribution> trans;
    actions.reserve(mdp.numStates());
    trans.reserve(mdp.numStates());
    for (StateId s = 0; s < mdp.numStates(); ++s) {
        ActionId a = policy.choice[s];
        if (a == kNoAction) throw ModelError("policy undefined at state '" + skel.stateName(s) + "'");
        if (a >= mdp.numActions() || skel.owner(a) != s) {
            throw ModelError("policy selects an action unavailable at state '" + skel.stateName(s) + "'");
        }
        actions.push_back({skel.actionName(a), s});
        trans.push_back(mdp.trans(a));
    }
    return Mdp(Skeleton(skel.stateNames(), skel.initial(), std::move(actions)), std::move(trans), mdp.acceptance());
}

std::vector<IntervalRow> point_rows(const Mdp& mdp) {
    std::vector<IntervalRow> rows;
    rows.reserve(mdp.numActions());
    for (ActionId a = 0; a < mdp.numActions(); ++a) {
        rows.push_back(IntervalRow::point(mdp.skeleton().owner(a), a, mdp.trans(a)));
    }
    return rows;
}

Bmdp as_point_bmdp(const Mdp& mdp) { return Bmdp(mdp.skeleton(), point_rows(mdp), mdp.acceptance()); }

Mdp restrict_actions(const Mdp& mdp, std::span<const char> keep, std::vector<ActionId>* originalIds) {
    const auto& skel = mdp.skeleton();
    std::vector<ActionInfo> actions;
    std::vector<Distribution> trans;
    std::vector<ActionId> ids;
    for (ActionId a = 0; a < mdp.numActions(); ++a) {
        if (!keep[a]) continue;
        actions.push_back(skel.actions()[a]);
        trans.push_back(mdp.trans(a));
        ids.push_back(a);
    }
    if (originalIds) *originalIds = std::move(ids);
    return Mdp(Skeleton(skel.stateNames(), skel.initial(), std::move(actions)), std::move(trans), mdp.acceptance());
}

std::vector<char> state_mask(std::size_t n, std::span<const StateId> states) {
    std::vector<char> mask(n, 0);
    for (StateId s : states) {
        if (s < n) mask[s] = 1;
    }
    return mask;
}

}  // namespace bmdp
