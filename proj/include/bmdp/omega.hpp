#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "bmdp/graph.hpp"
#include "bmdp/model.hpp"
#include "bmdp/polytope.hpp"

namespace bmdp {

// ---- Rabin objectives on point MDPs ------------------------------------------

struct RabinMaxResult {
    ValueVector values;
    PositionalPolicy policy;
};

/// Maximal acceptance probability: per pair, MECs avoiding F that meet I are
/// winning; then maximal reachability of their union. Inside the winning region the
/// policy cycles through I without leaving its end component.
RabinMaxResult mdp_rabin_max(const Mdp& mdp);

struct RabinMinResult {
    ValueVector values;
    /// Uniform over end-component actions inside the good end components of the
    /// complement, deterministic elsewhere. Positional choices alone cannot always
    /// keep visiting several states infinitely often.
    StationaryPolicy policy;
};

/// Minimal acceptance probability, computed as 1 - (max probability of the
/// complementary Streett condition) via good end components.
RabinMinResult mdp_rabin_min(const Mdp& mdp);

/// States of end components in which every pair is satisfied or violated as
/// required by the Streett complement: for each pair, T misses I or meets F.
std::vector<EndComponent> streett_good_components(const Mdp& mdp);

// ---- BMDP -> stochastic game ---------------------------------------------------

/// Where the pieces of a BMDP ended up in its game.
struct GameIndex {
    std::size_t numStates = 0;   ///< original states keep ids 0..n-1
    std::size_t numActions = 0;  ///< original action a keeps id a and leads to state n+a
    std::vector<BfsSet> vertices;               ///< per original action
    std::vector<ActionId> firstVertexAction;    ///< vertex k of action a is action firstVertexAction[a]+k
};

/// Player-1 states are the original ones; each action moves surely to an
/// intermediate state (s,a) owned by player 2, whose actions are the corner points
/// of the row. Acceptance stays on original states, so intermediates are neutral.
StochasticGame build_game(const Bmdp& model, GameIndex* index = nullptr);

struct GameSolution {
    ValueVector values;
    PositionalPolicy player1;
    StationaryPolicy player2;
    std::size_t rounds = 0;  ///< strategy improvement rounds (min) or 0 (max)
};

/// sup over player-1 strategies, opt over player-2 strategies, of the acceptance
/// probability. With player2 = Max both cooperate. With Min, strategy improvement
/// over positional player-1 strategies, each evaluated by mdp_rabin_min.
GameSolution sg_rabin(const StochasticGame& game, Sense player2);

// ---- Bounds on BMDPs ------------------------------------------------------------

/// MECs of one pair's modified model and which of them meet I.
struct PairComponents {
    std::vector<EndComponent> mecs;
    std::vector<char> winning;
};

struct GameResult {
    ValueVector values;
    PositionalPolicy controller;
    NaturePolicy nature;
    Mdp witness;  ///< instantiate(model, nature)
    std::vector<PairComponents> components;  ///< filled by bmdp_upper only
    std::size_t iterations = 0;
};

/// Lower bound: optimal controller against the worst instantiation of the intervals.
GameResult bmdp_lower(const Bmdp& model);

/// Upper bound through the explicit game, sg_rabin(build_game(model), Max).
GameResult bmdp_upper_game(const Bmdp& model);

/// Nature choice per original action: the mixture of corner points that player 2
/// plays at the corresponding intermediate state.
NaturePolicy nature_from_game(const GameIndex& index, const StationaryPolicy& player2);

/// Upper bound without building the game: per pair, F made absorbing, interval MEC
/// decomposition, winning MECs meet I; then cooperative robust reachability.
GameResult bmdp_upper(const Bmdp& model);

/// Model whose row for every action of a target state is a sure self-loop, with
/// acceptance (empty, target). Reachability of target becomes a Rabin objective.
Bmdp reach_as_rabin(const Bmdp& model, std::span<const StateId> target);

// ---- Exhaustive oracle ------------------------------------------------------------

class SizeGuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kBruteForceLimit = 1'000'000;

/// Enumerates positional controllers and, for the rows they use, nature options:
/// corner points, plus for Min uniform mixtures of the corner points supported on
/// each subset of successors (a minimizer may need to keep several states alive).
/// Each combination is evaluated exactly. Throws SizeGuardError past kBruteForceLimit.
ValueVector brute_force_value(const Bmdp& model, Sense nature);

/// The nature options brute_force_value uses for one row.
std::vector<Distribution> nature_options(const IntervalRow& row, Sense nature);

}  // namespace bmdp
