#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bmdp {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;

inline constexpr StateId kNoState = std::numeric_limits<StateId>::max();
inline constexpr ActionId kNoAction = std::numeric_limits<ActionId>::max();

/// Absolute tolerance for probability sums and interval bound comparisons.
inline constexpr double kProbTolerance = 1e-9;
/// Probabilities at or below this are structurally zero (graph analyses, supports).
inline constexpr double kZeroTolerance = 1e-12;

enum class Sense { Max, Min };
enum class Player : std::uint8_t { One = 1, Two = 2 };

inline const char* to_string(Sense sense) { return sense == Sense::Max ? "max" : "min"; }

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A nature choice or point probability that leaves its interval.
class BoundViolation : public ModelError {
public:
    using ModelError::ModelError;
};

/// A row whose bounds admit no distribution.
class FeasibilityError : public ModelError {
public:
    using ModelError::ModelError;
};

/// Broken algorithmic invariant. Seeing one of these is a bug.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct ProbInterval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double p) const { return lo - kProbTolerance <= p && p <= hi + kProbTolerance; }
    bool isPoint() const { return hi - lo <= kZeroTolerance; }
};

/// Sparse distribution over successor states, sorted by state, strictly positive entries.
struct Distribution {
    std::vector<std::pair<StateId, double>> entries;

    double probability(StateId state) const;
    double sum() const;

    /// Sorts, merges duplicates and drops structurally-zero entries.
    static Distribution fromDense(std::span<const double> dense);
    static Distribution fromEntries(std::vector<std::pair<StateId, double>> entries);
    static Distribution dirac(StateId state) { return Distribution{{{state, 1.0}}}; }
};

struct IntervalEntry {
    StateId target = kNoState;
    ProbInterval bounds;
};

/// Interval constraints of one (state, action) pair. Absent successors are [0,0].
struct IntervalRow {
    StateId source = kNoState;
    ActionId action = kNoAction;
    std::vector<IntervalEntry> entries;

    ProbInterval bounds(StateId target) const;
    double lowerSum() const;
    double upperSum() const;
    /// Sum(lo) <= 1 <= Sum(hi), within kProbTolerance.
    bool feasible() const;
    bool isPoint() const;
    bool contains(const Distribution& dist) const;

    static IntervalRow point(StateId source, ActionId action, const Distribution& dist);
};

struct RabinPair {
    std::vector<StateId> fin;  ///< must be visited finitely often
    std::vector<StateId> inf;  ///< some state visited infinitely often
};

struct RabinAcceptance {
    std::vector<RabinPair> pairs;
};

struct ActionInfo {
    std::string name;
    StateId owner = kNoState;
};

/// States, initial state and per-state action sets shared by every model kind.
/// Action ids are dense and globally unique; each is owned by exactly one state.
class Skeleton {
public:
    Skeleton() = default;
    Skeleton(std::vector<std::string> stateNames, StateId initial, std::vector<ActionInfo> actions);

    std::size_t numStates() const { return stateNames_.size(); }
    std::size_t numActions() const { return actions_.size(); }
    StateId initial() const { return initial_; }

    const std::string& stateName(StateId s) const { return stateNames_.at(s); }
    const std::vector<std::string>& stateNames() const { return stateNames_; }
    const std::string& actionName(ActionId a) const { return actions_.at(a).name; }
    StateId owner(ActionId a) const { return actions_.at(a).owner; }
    const std::vector<ActionInfo>& actions() const { return actions_; }
    std::span<const ActionId> available(StateId s) const { return available_.at(s); }

    std::optional<StateId> findState(const std::string& name) const;
    std::optional<ActionId> findAction(StateId s, const std::string& name) const;

    bool sameShape(const Skeleton& other) const;

private:
    std::vector<std::string> stateNames_;
    StateId initial_ = 0;
    std::vector<ActionInfo> actions_;
    std::vector<std::vector<ActionId>> available_;
};

class Mdp {
public:
    Mdp() = default;
    /// Throws ModelError if a distribution is invalid or the acceptance references unknown states.
    Mdp(Skeleton skeleton, std::vector<Distribution> trans, RabinAcceptance acc);

    const Skeleton& skeleton() const { return skeleton_; }
    std::size_t numStates() const { return skeleton_.numStates(); }
    std::size_t numActions() const { return skeleton_.numActions(); }
    std::span<const ActionId> available(StateId s) const { return skeleton_.available(s); }
    const Distribution& trans(ActionId a) const { return trans_.at(a); }
    const std::vector<Distribution>& transitions() const { return trans_; }
    const RabinAcceptance& acceptance() const { return acc_; }

    bool isMarkovChain() const;

private:
    Skeleton skeleton_;
    std::vector<Distribution> trans_;
    RabinAcceptance acc_;
};

/// An MDP with exactly one action per state.
using MarkovChain = Mdp;

class Bmdp {
public:
    Bmdp() = default;
    /// Checks structure only (row ownership, successor ranges). Bound sanity is
    /// reported by validate_bmdp.
    Bmdp(Skeleton skeleton, std::vector<IntervalRow> rows, RabinAcceptance acc);

    const Skeleton& skeleton() const { return skeleton_; }
    std::size_t numStates() const { return skeleton_.numStates(); }
    std::size_t numActions() const { return skeleton_.numActions(); }
    std::span<const ActionId> available(StateId s) const { return skeleton_.available(s); }
    const IntervalRow& row(ActionId a) const { return rows_.at(a); }
    const std::vector<IntervalRow>& rows() const { return rows_; }
    const RabinAcceptance& acceptance() const { return acc_; }

    Bmdp withAcceptance(RabinAcceptance acc) const { return Bmdp(skeleton_, rows_, std::move(acc)); }
    bool isPointModel() const;

private:
    Skeleton skeleton_;
    std::vector<IntervalRow> rows_;
    RabinAcceptance acc_;
};

struct StochasticGame {
    Mdp mdp;
    std::vector<Player> owner;
};

/// Memoryless deterministic choice; kNoAction marks states the policy does not govern.
struct PositionalPolicy {
    std::vector<ActionId> choice;
};

/// Memoryless randomized choice: per state, a list of (action, weight) summing to 1.
struct StationaryPolicy {
    std::vector<std::vector<std::pair<ActionId, double>>> choice;

    static StationaryPolicy fromPositional(const PositionalPolicy& policy);
};

/// Nature's resolution of the intervals, one distribution per action.
struct NaturePolicy {
    std::vector<Distribution> choice;
};

using ValueVector = std::vector<double>;

// -----------------------------------------------------------------------------

struct Violation {
    enum class Kind { IntervalOrder, IntervalRange, RowFeasibility, ActionOwnership, RabinOverlap, UnknownState };
    Kind kind;
    StateId state = kNoState;
    ActionId action = kNoAction;
    StateId successor = kNoState;
    std::string message;
};

const char* to_string(Violation::Kind kind);

/// Every violated invariant of the model, with coordinates. Empty means valid.
std::vector<Violation> validate_bmdp(const Bmdp& model);

/// Whether every transition probability of `mdp` lies inside `model`'s bounds.
/// Throws ModelError when the state/action skeletons differ.
bool is_consistent(const Mdp& mdp, const Bmdp& model);

/// Materializes the MDP selected by `nature`; throws BoundViolation for out-of-bounds choices.
Mdp instantiate(const Bmdp& model, const NaturePolicy& nature);

/// The chain obtained by fixing `policy`; throws ModelError on missing or foreign choices.
MarkovChain induce_mc(const Mdp& mdp, const PositionalPolicy& policy);

/// Point-interval rows of an MDP, so interval algorithms apply to it unchanged.
std::vector<IntervalRow> point_rows(const Mdp& mdp);
Bmdp as_point_bmdp(const Mdp& mdp);

/// Keeps only actions with keep[a] != 0. `originalIds` receives new-id -> old-id.
Mdp restrict_actions(const Mdp& mdp, std::span<const char> keep, std::vector<ActionId>* originalIds = nullptr);

/// Sorted, duplicate-free state list membership mask of size n.
std::vector<char> state_mask(std::size_t n, std::span<const StateId> states);

}  // namespace bmdp
