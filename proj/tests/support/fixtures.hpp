#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "bmdp/io.hpp"
#include "bmdp/model.hpp"

namespace testing_support {

inline std::string model_path(const std::string& file) { return std::string(BMDP_MODELS_DIR) + "/" + file; }

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

inline bmdp::Bmdp load_bmdp(const std::string& file) {
    return std::get<bmdp::Bmdp>(bmdp::parse_model(read_text(model_path(file))));
}

inline bmdp::LabelledBmdp load_labelled(const std::string& file) {
    return std::get<bmdp::LabelledBmdp>(bmdp::parse_model(read_text(model_path(file))));
}

inline bmdp::Dra load_dra(const std::string& file) { return bmdp::parse_dra(read_text(model_path(file))); }

inline bmdp::StateId state(const bmdp::Skeleton& skel, const std::string& name) { return skel.findState(name).value(); }

inline bmdp::ActionId action(const bmdp::Skeleton& skel, const std::string& s, const std::string& a) {
    return skel.findAction(state(skel, s), a).value();
}

/// The three-state BMDP with sure choices q0 -a-> q1, q1 -c-> {q1,q2} halves, q2 -d-> {q0,q2} halves.
inline bmdp::Mdp three_state_left() {
    auto model = load_bmdp("three_state.bmdp");
    const auto& k = model.skeleton();
    bmdp::NaturePolicy n;
    n.choice = {bmdp::Distribution::dirac(state(k, "q1")),
                bmdp::Distribution::dirac(state(k, "q1")),
                bmdp::Distribution::fromEntries({{state(k, "q1"), 0.5}, {state(k, "q2"), 0.5}}),
                bmdp::Distribution::fromEntries({{state(k, "q0"), 0.5}, {state(k, "q2"), 0.5}})};
    return bmdp::instantiate(model, n);
}

/// Same skeleton: a splits halves, c gives q1 a quarter, d stays in q2 surely.
inline bmdp::Mdp three_state_right() {
    auto model = load_bmdp("three_state.bmdp");
    const auto& k = model.skeleton();
    bmdp::NaturePolicy n;
    n.choice = {bmdp::Distribution::fromEntries({{state(k, "q1"), 0.5}, {state(k, "q2"), 0.5}}),
                bmdp::Distribution::dirac(state(k, "q1")),
                bmdp::Distribution::fromEntries({{state(k, "q1"), 0.25}, {state(k, "q2"), 0.75}}),
                bmdp::Distribution::dirac(state(k, "q2"))};
    return bmdp::instantiate(model, n);
}

}  // namespace testing_support
