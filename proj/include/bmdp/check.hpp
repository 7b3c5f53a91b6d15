#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bmdp/io.hpp"
#include "bmdp/model.hpp"

namespace bmdp {

enum class BoundKind { Lower, Upper, Both };
enum class Method { Auto, Game, Mec, Brute };

/// Unsupported combination of analysis options (e.g. a lower bound by MEC analysis).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Objective {
    bool reach = false;
    std::vector<StateId> target;  ///< sorted, for reach objectives

    /// "rabin" or "reach:s1,s2,..." with names resolved against `skel`.
    static Objective parse(const std::string& text, const Skeleton& skel);
    std::string text(const Skeleton& skel) const;
};

struct CheckOptions {
    BoundKind bound = BoundKind::Both;
    Objective objective;
    Method method = Method::Auto;
    double epsilon = 1e-10;
};

struct CheckResult {
    CheckReport report;
    std::optional<Mdp> lowerWitness;
    std::optional<Mdp> upperWitness;
};

CheckResult run_check(const Bmdp& model, const CheckOptions& options);

/// The model a report's objective refers to: itself for Rabin, the absorbing-target
/// conversion for reachability.
Bmdp objective_model(const Bmdp& model, const Objective& objective);

struct BracketViolation {
    std::size_t trial = 0;
    StateId state = kNoState;
    double value = 0.0;
    double lower = 0.0;
    double upper = 1.0;
};

struct BracketResult {
    bool pass = true;
    std::size_t trials = 0;
    std::vector<BracketViolation> violations;
};

inline constexpr double kBracketSlack = 1e-6;

/// Draws `trials` consistent MDPs (per row: corner points mixed with weights
/// w_k = -log(1 - U_k), U_k uniform from a std::mt19937_64 seeded with `seed`,
/// normalized) and checks that each maximal acceptance probability lies within the
/// report's bounds, up to kBracketSlack.
BracketResult validate_bracket(const Bmdp& model, const CheckReport& report, std::size_t trials, std::uint64_t seed);

/// One random consistent instantiation, as used by validate_bracket.
Mdp sample_instantiation(const Bmdp& model, std::mt19937_64& rng);

}  // namespace bmdp
