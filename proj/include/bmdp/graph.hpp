#pragma once

#include <span>
#include <vector>

#include "bmdp/model.hpp"

namespace bmdp {

struct EndComponent {
    std::vector<StateId> states;    ///< sorted
    std::vector<ActionId> actions;  ///< sorted, each owned by a state in `states`

    bool operator==(const EndComponent&) const = default;
};

/// Strongly connected components of the graph restricted to nodes with active[v] != 0.
/// Returns a component id per node (-1 for inactive nodes) and the number of components.
/// Iterative Tarjan, ids in order of completion.
struct SccResult {
    std::vector<int> component;
    int count = 0;
};
SccResult strongly_connected_components(const std::vector<std::vector<StateId>>& successors,
                                        std::span<const char> active = {});

/// Maximal end components of an MDP, ordered by smallest state.
std::vector<EndComponent> mec_decomposition(const Mdp& mdp);
/// MECs of the sub-MDP on `allowedStates` (actions that may leave are dropped).
std::vector<EndComponent> mec_decomposition(const Mdp& mdp, std::span<const char> allowedStates);

/// MECs under interval semantics: an action stays inside T iff no successor outside T
/// has positive lower bound and the upper bounds inside T reach 1. Successor t inside T
/// is an edge iff some such distribution gives t positive mass.
std::vector<EndComponent> bmdp_mec_decomposition(const Bmdp& model);
std::vector<EndComponent> bmdp_mec_decomposition(const Bmdp& model, std::span<const char> allowedStates);

/// Shared refinement loop behind both decompositions.
std::vector<EndComponent> interval_mecs(const Skeleton& skel, std::span<const IntervalRow> rows,
                                        std::span<const char> allowedStates, std::span<const char> allowedActions);

/// Bottom strongly connected components of a Markov chain.
std::vector<std::vector<StateId>> bsccs(const MarkovChain& mc);

struct QualitativeSets {
    std::vector<char> prob0;  ///< optimal reach value is exactly 0
    std::vector<char> prob1;  ///< optimal reach value is exactly 1
};

/// Exact 0/1 classification for reaching `target` in an explicit game.
QualitativeSets qualitative_reach(const StochasticGame& game, std::span<const StateId> target, Sense player1,
                                  Sense player2);

/// Same classification on the implicit game of a BMDP: the controller resolves the
/// actions with `controller`, nature resolves each row's polytope with `nature`.
QualitativeSets qualitative_reach(const Skeleton& skel, std::span<const IntervalRow> rows,
                                  std::span<const char> target, Sense controller, Sense nature);

/// Fully general form: per-state optimization sense for whoever picks the action.
QualitativeSets qualitative_reach(const Skeleton& skel, std::span<const IntervalRow> rows,
                                  std::span<const char> target, std::span<const Sense> stateSense, Sense nature);

}  // namespace bmdp
