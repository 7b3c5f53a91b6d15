#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bmdp/model.hpp"

namespace bmdp {

/// A Markov chain as one successor distribution per state; the working form for
/// exact evaluation, avoiding the naming overhead of MarkovChain.
struct Chain {
    std::vector<Distribution> next;

    static Chain from(const MarkovChain& mc);
    /// The chain of `rows` resolved by a controller choice per state and a
    /// distribution per action.
    static Chain resolve(const Skeleton& skel, std::span<const ActionId> controller,
                         std::span<const Distribution> perAction);
};

/// Reachability probabilities solved exactly: graph-based 0/1 classification, then a
/// sparse LU solve of the remaining transient system.
ValueVector chain_reach(const Chain& chain, std::span<const char> target);

/// Probability of the Rabin condition: a BSCC accepts iff some pair misses F and meets I.
ValueVector chain_rabin(const Chain& chain, const RabinAcceptance& acc);
std::vector<std::vector<StateId>> chain_bsccs(const Chain& chain);
bool bscc_accepting(std::span<const StateId> bscc, const RabinAcceptance& acc, std::size_t numStates);

ValueVector mc_reach_exact(const MarkovChain& mc, std::span<const StateId> target);

// -----------------------------------------------------------------------------

struct ReachQuery {
    std::vector<StateId> target;
    Sense controller = Sense::Max;
    std::optional<Sense> nature;  ///< ignored for point models
    double epsilon = 1e-10;
    std::size_t maxIterations = 1'000'000;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, ValueVector lastIterate, double residual, std::size_t iterations)
        : std::runtime_error(what), lastIterate_(std::move(lastIterate)), residual_(residual), iterations_(iterations) {}

    const ValueVector& lastIterate() const { return lastIterate_; }
    double residual() const { return residual_; }
    std::size_t iterations() const { return iterations_; }

private:
    ValueVector lastIterate_;
    double residual_;
    std::size_t iterations_;
};

struct ReachResult {
    ValueVector values;
    PositionalPolicy controller;
    NaturePolicy nature;  ///< one extreme distribution (a corner point) per action
    std::size_t iterations = 0;
    double residual = 0.0;
};

/// Optimal reachability in an MDP: value iteration from the qualitative 0/1 seeds,
/// then policy extraction and exact policy-iteration polishing.
ReachResult mdp_reach(const Mdp& mdp, const ReachQuery& query);

/// Robust reachability on a BMDP: each sweep resolves nature with extreme_distribution
/// and the controller with the best action. Requires query.nature.
ReachResult bmdp_reach(const Bmdp& model, const ReachQuery& query);

struct RobustReachOptions {
    double epsilon = 1e-10;
    std::size_t maxIterations = 1'000'000;
    bool parallel = true;
    bool checkMonotone = true;
};

/// Core shared by mdp_reach and bmdp_reach, on raw rows.
ReachResult robust_reach(const Skeleton& skel, std::span<const IntervalRow> rows, std::span<const char> target,
                         Sense controller, Sense nature, const RobustReachOptions& options = {});

/// Exact value of a fixed (controller, nature) pair.
ValueVector evaluate_reach_pair(const Skeleton& skel, std::span<const ActionId> controller,
                                std::span<const Distribution> nature, std::span<const char> target);

}  // namespace bmdp
