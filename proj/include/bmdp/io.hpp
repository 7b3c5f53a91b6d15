#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bmdp/model.hpp"
#include "bmdp/omega.hpp"
#include "bmdp/product.hpp"

namespace bmdp {

/// Syntax, reference, duplicate and totality errors in input files.
class ParseError : public std::runtime_error {
public:
    enum class Kind { Syntax, Reference, Duplicate, Totality };

    ParseError(Kind kind, std::size_t line, std::size_t column, const std::string& message);

    Kind kind() const { return kind_; }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    Kind kind_;
    std::size_t line_;
    std::size_t column_;
};

/// A model that parses but violates a model invariant (bounds, feasibility, overlap).
class ValidationError : public ModelError {
public:
    explicit ValidationError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

using ParsedModel = std::variant<Bmdp, LabelledBmdp>;

/// Parses the line-oriented model grammar ("bmdp" or "labelled-bmdp" header).
/// Throws ParseError, or ValidationError when the parsed model is invalid.
ParsedModel parse_model(std::string_view text);
Dra parse_dra(std::string_view text);

/// Shortest round-trip decimal form of a probability.
std::string format_probability(double p);

std::string serialize_model(const Bmdp& model);
std::string serialize_model(const LabelledBmdp& model);
/// Point MDPs are written as point intervals.
std::string serialize_mdp(const Mdp& mdp);
std::string serialize_dra(const Dra& dra);
/// The game in model grammar with a "game" header and one "player2" line.
std::string serialize_game(const StochasticGame& game);

/// One "state action" line per governed state.
std::string serialize_controller(const Skeleton& skel, const PositionalPolicy& policy);
/// One "state action -> succ:p ..." line per action.
std::string serialize_nature(const Skeleton& skel, const NaturePolicy& nature);

// -----------------------------------------------------------------------------

struct BoundReport {
    std::string method;
    ValueVector values;
    PositionalPolicy controller;  ///< may be empty (brute force)
    NaturePolicy nature;          ///< may be empty (brute force)
    std::size_t iterations = 0;
    double millis = 0.0;
};

struct CheckReport {
    std::string objective;  ///< "rabin" or "reach:s1,s2"
    std::vector<std::string> stateNames;
    StateId initial = 0;
    std::optional<BoundReport> lower;
    std::optional<BoundReport> upper;
};

/// Machine-readable key/value text, values at 12 significant digits.
std::string write_report(const CheckReport& report, const Skeleton& skel);
/// Reads values, methods and policies back; names are resolved against `skel`.
CheckReport read_report(std::string_view text, const Skeleton& skel);
/// Aligned table for terminals.
std::string format_report_table(const CheckReport& report);

}  // namespace bmdp
