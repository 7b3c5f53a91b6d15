#include "bmdp/product.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

namespace bmdp {

std::optional<std::size_t> Alphabet::find(const std::string& letter) const {
    auto it = std::find(letters.begin(), letters.end(), letter);
    if (it == letters.end()) return std::nullopt;
    return static_cast<std::size_t>(it - letters.begin());
}

void Alphabet::check() const {
    if (letters.empty()) throw AlphabetError("alphabet is empty");
    std::set<std::string> seen;
    for (const auto& l : letters) {
        if (!seen.insert(l).second) throw AlphabetError("duplicate letter '" + l + "'");
    }
}

Dra::Dra(Alphabet alphabet, std::vector<std::string> stateNames, StateId initial,
         std::vector<std::vector<StateId>> trans, RabinAcceptance acc)
    : alphabet_(std::move(alphabet)),
      stateNames_(std::move(stateNames)),
      initial_(initial),
      trans_(std::move(trans)),
      acc_(std::move(acc)) {
    alphabet_.check();
    const std::size_t q = stateNames_.size();
    if (q == 0) throw ModelError("automaton has no states");
    if (initial_ >= q) throw ModelError("automaton initial state out of range");
    if (trans_.size() != q) throw ModelError("transition table does not cover every automaton state");
    for (StateId from = 0; from < q; ++from) {
        if (trans_[from].size() != alphabet_.letters.size()) {
            throw ModelError("transition function is not total at '" + stateNames_[from] + "'");
        }
        for (StateId to : trans_[from]) {
            if (to >= q) throw ModelError("transition into unknown automaton state");
        }
    }
    for (const auto& pair : acc_.pairs) {
        auto fin = state_mask(q, pair.fin);
        for (StateId s : pair.inf) {
            if (s >= q) throw ModelError("acceptance references unknown automaton state");
            if (fin[s]) throw ModelError("automaton state '" + stateNames_[s] + "' is in both F and I of a pair");
        }
        for (StateId s : pair.fin) {
            if (s >= q) throw ModelError("acceptance references unknown automaton state");
        }
    }
}

bool dra_accepts_lasso(const Dra& dra, const std::vector<std::string>& prefix, const std::vector<std::string>& cycle) {
    if (cycle.empty()) throw std::invalid_argument("lasso cycle must be nonempty");
    auto letterOf = [&](const std::string& l) {
        auto k = dra.alphabet().find(l);
        if (!k) throw AlphabetError("letter '" + l + "' is not in the automaton alphabet");
        return *k;
    };
    StateId q = dra.initial();
    for (const auto& l : prefix) q = dra.step(q, letterOf(l));
    std::vector<std::size_t> letters;
    for (const auto& l : cycle) letters.push_back(letterOf(l));

    // (automaton state, cycle position) repeats after at most |Q|*|cycle| steps
    std::map<std::pair<StateId, std::size_t>, std::size_t> firstSeen;
    std::vector<StateId> visited;
    std::size_t pos = 0;
    while (true) {
        auto [it, fresh] = firstSeen.emplace(std::make_pair(q, pos), visited.size());
        if (!fresh) break;
        visited.push_back(q);
        q = dra.step(q, letters[pos]);
        pos = (pos + 1) % letters.size();
    }
    std::vector<char> loop(dra.numStates(), 0);
    for (std::size_t k = firstSeen.at({q, pos}); k < visited.size(); ++k) loop[visited[k]] = 1;
    for (const auto& pair : dra.acceptance().pairs) {
        bool meetsF = std::any_of(pair.fin.begin(), pair.fin.end(), [&](StateId s) { return loop[s]; });
        bool meetsI = std::any_of(pair.inf.begin(), pair.inf.end(), [&](StateId s) { return loop[s]; });
        if (!meetsF && meetsI) return true;
    }
    return false;
}

Bmdp build_product(const LabelledBmdp& labelled, const Dra& dra) {
    const auto& model = labelled.model;
    const auto& skel = model.skeleton();
    if (labelled.label.size() != model.numStates()) throw ModelError("labelling does not cover every state");

    // model letter index -> automaton letter index
    std::vector<std::size_t> letterMap;
    for (const auto& l : labelled.alphabet.letters) {
        auto k = dra.alphabet().find(l);
        if (!k) throw AlphabetError("model letter '" + l + "' is not in the automaton alphabet");
        letterMap.push_back(*k);
    }

    std::map<std::pair<StateId, StateId>, StateId> ids;
    std::vector<std::pair<StateId, StateId>> states;
    std::deque<StateId> queue;
    auto intern = [&](StateId s, StateId q) {
        auto [it, fresh] = ids.emplace(std::make_pair(s, q), static_cast<StateId>(states.size()));
        if (fresh) {
            states.emplace_back(s, q);
            queue.push_back(it->second);
        }
        return it->second;
    };
    intern(skel.initial(), dra.initial());

    std::vector<ActionInfo> actions;
    std::vector<IntervalRow> rows;
    while (!queue.empty()) {
        StateId id = queue.front();
        queue.pop_front();
        auto [s, q] = states[id];
        StateId next = dra.step(q, letterMap.at(labelled.label[s]));
        for (ActionId a : skel.available(s)) {
            IntervalRow row;
            row.source = id;
            row.action = static_cast<ActionId>(actions.size());
            for (const auto& e : model.row(a).entries) {
                StateId target = e.bounds.hi > kZeroTolerance ? intern(e.target, next) : kNoState;
                if (target != kNoState) row.entries.push_back({target, e.bounds});
            }
            actions.push_back({skel.actionName(a), id});
            rows.push_back(std::move(row));
        }
    }

    std::vector<std::string> names;
    names.reserve(states.size());
    for (auto [s, q] : states) names.push_back(skel.stateName(s) + "." + dra.stateName(q));

    RabinAcceptance acc;
    for (const auto& pair : dra.acceptance().pairs) {
        auto fin = state_mask(dra.numStates(), pair.fin);
        auto inf = state_mask(dra.numStates(), pair.inf);
        RabinPair lifted;
        for (StateId id = 0; id < states.size(); ++id) {
            if (fin[states[id].second]) lifted.fin.push_back(id);
            if (inf[states[id].second]) lifted.inf.push_back(id);
        }
        acc.pairs.push_back(std::move(lifted));
    }
    return Bmdp(Skeleton(std::move(names), 0, std::move(actions)), std::move(rows), std::move(acc));
}

}  // namespace bmdp
