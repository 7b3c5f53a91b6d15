#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bmdp/omega.hpp"
#include "bmdp/product.hpp"
#include "support/fixtures.hpp"

using namespace bmdp;
using namespace testing_support;

namespace {

Dra universal(const Alphabet& alphabet) {
    std::vector<std::vector<StateId>> trans{std::vector<StateId>(alphabet.letters.size(), 0)};
    return Dra(alphabet, {"u"}, 0, trans, RabinAcceptance{{{{}, {0}}}});
}

}  // namespace

TEST_CASE("lasso acceptance of the two-state automaton") {
    auto dra = load_dra("eventually_y_or_z.dra");
    CHECK(dra.numStates() == 2);
    CHECK(dra.acceptance().pairs.size() == 2);
    CHECK(dra_accepts_lasso(dra, {}, {"y"}));
    CHECK(dra_accepts_lasso(dra, {"x", "x"}, {"z"}));
    CHECK_FALSE(dra_accepts_lasso(dra, {}, {"x", "y"}));
    CHECK_FALSE(dra_accepts_lasso(dra, {}, {"y", "z"}));
    CHECK_THROWS_AS(dra_accepts_lasso(dra, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(dra_accepts_lasso(dra, {}, {"w"}), AlphabetError);
}

TEST_CASE("lasso acceptance of the xyxz automaton") {
    auto dra = load_dra("xyxz.dra");
    CHECK(dra_accepts_lasso(dra, {}, {"x", "y", "x", "z"}));
    CHECK(dra_accepts_lasso(dra, {"x", "y"}, {"x", "z", "x", "y"}));
    CHECK_FALSE(dra_accepts_lasso(dra, {}, {"x", "y"}));
    CHECK_FALSE(dra_accepts_lasso(dra, {"y"}, {"x", "y", "x", "z"}));
}

TEST_CASE("automata without pairs reject everything") {
    Alphabet ab{{"x", "y"}};
    Dra none(ab, {"q"}, 0, {{0, 0}}, {});
    CHECK_FALSE(dra_accepts_lasso(none, {}, {"x"}));
    CHECK_FALSE(dra_accepts_lasso(none, {"y"}, {"x", "y"}));
}

TEST_CASE("malformed automata are rejected") {
    Alphabet ab{{"x", "y"}};
    CHECK_THROWS_AS(Dra(ab, {"q"}, 0, {{0}}, {}), ModelError);
    CHECK_THROWS_AS(Dra(ab, {"q"}, 0, {{0, 3}}, {}), ModelError);
    CHECK_THROWS_AS(Dra(Alphabet{{"x", "x"}}, {"q"}, 0, {{0, 0}}, {}), AlphabetError);
    CHECK_THROWS_AS(Dra(ab, {"q"}, 0, {{0, 0}}, RabinAcceptance{{{{0}, {0}}}}), ModelError);
}

TEST_CASE("adversarial upper bound on the caveat product is one") {
    auto imc = load_labelled("caveat_imc.lbmdp");
    auto product = build_product(imc, load_dra("xyxz.dra"));
    const auto& k = product.skeleton();
    CHECK(k.stateName(k.initial()) == "s0.q0");
    CHECK(bmdp_upper(product).values[k.initial()] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(bmdp_upper_game(product).values[k.initial()] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("product structure follows the source labels") {
    auto imc = load_labelled("caveat_imc.lbmdp");
    auto dra = load_dra("xyxz.dra");
    auto product = build_product(imc, dra);
    const auto& k = product.skeleton();
    // s0 is labelled x, so leaving s0.q0 moves the automaton to q1
    auto a = k.available(k.initial())[0];
    std::vector<std::string> succ;
    for (const auto& e : product.row(a).entries) succ.push_back(k.stateName(e.target));
    CHECK(succ == std::vector<std::string>{"s1.q1", "s2.q1"});
    for (const auto& pair : product.acceptance().pairs) {
        for (StateId s : pair.fin) CHECK(k.stateName(s).ends_with(".q4"));
    }
}

TEST_CASE("a universal one-state automaton accepts everything") {
    auto labelled = load_labelled("three_state.lbmdp");
    auto product = build_product(labelled, universal(labelled.alphabet));
    CHECK(product.numStates() == labelled.model.numStates());
    CHECK(product.numActions() == labelled.model.numActions());
    for (StateId s = 0; s < product.numStates(); ++s) {
        CHECK(product.skeleton().stateName(s) == labelled.model.skeleton().stateName(s) + ".u");
    }
    for (double v : bmdp_lower(product).values) CHECK(v == doctest::Approx(1.0));
    for (double v : bmdp_upper(product).values) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("alphabets must match") {
    auto labelled = load_labelled("three_state.lbmdp");
    Alphabet other{{"x", "y"}};
    CHECK_THROWS_AS(build_product(labelled, universal(other)), AlphabetError);
}
