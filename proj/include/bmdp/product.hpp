#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmdp/model.hpp"

namespace bmdp {

class AlphabetError : public ModelError {
public:
    using ModelError::ModelError;
};

struct Alphabet {
    std::vector<std::string> letters;  ///< unique, in declaration order

    std::optional<std::size_t> find(const std::string& letter) const;
    /// Throws AlphabetError if empty or duplicated.
    void check() const;
};

/// A BMDP whose acceptance is replaced by one letter per state.
struct LabelledBmdp {
    Bmdp model;  ///< acceptance unused
    Alphabet alphabet;
    std::vector<std::size_t> label;  ///< letter index per state
};

/// Deterministic Rabin automaton with a total transition function.
class Dra {
public:
    Dra() = default;
    /// trans[q][letter]; throws AlphabetError / ModelError on malformed input.
    Dra(Alphabet alphabet, std::vector<std::string> stateNames, StateId initial,
        std::vector<std::vector<StateId>> trans, RabinAcceptance acc);

    const Alphabet& alphabet() const { return alphabet_; }
    std::size_t numStates() const { return stateNames_.size(); }
    const std::string& stateName(StateId q) const { return stateNames_.at(q); }
    const std::vector<std::string>& stateNames() const { return stateNames_; }
    StateId initial() const { return initial_; }
    StateId step(StateId q, std::size_t letter) const { return trans_.at(q).at(letter); }
    const RabinAcceptance& acceptance() const { return acc_; }

private:
    Alphabet alphabet_;
    std::vector<std::string> stateNames_;
    StateId initial_ = 0;
    std::vector<std::vector<StateId>> trans_;
    RabinAcceptance acc_;
};

/// Whether prefix . cycle^omega is accepted. Throws AlphabetError on unknown letters
/// and std::invalid_argument on an empty cycle.
bool dra_accepts_lasso(const Dra& dra, const std::vector<std::string>& prefix, const std::vector<std::string>& cycle);

/// Reachable product: state (s,q) named "s.q"; action a of s moves to (s', step(q, label(s)))
/// with the bounds of s -> s'. Acceptance pairs are (S x F_i, S x I_i).
Bmdp build_product(const LabelledBmdp& model, const Dra& dra);

}  // namespace bmdp
