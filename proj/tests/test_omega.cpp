#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bmdp/omega.hpp"
#include "bmdp/reach.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/random_models.hpp"

using namespace bmdp;
using namespace testing_support;

namespace {

Mdp random_point_mdp(std::mt19937_64& rng, RandomShape shape) {
    shape.pointIntervals = true;
    auto model = random_bmdp(rng, shape);
    NaturePolicy nature;
    for (const auto& row : model.rows()) nature.choice.push_back(bfs_vertices(row).vertices.at(0));
    return instantiate(model, nature);
}

/// Acceptance probability of every positional policy, folded by `sense`.
std::vector<double> exhaustive_rabin(const Mdp& mdp, Sense sense) {
    const std::size_t n = mdp.numStates();
    std::vector<double> best(n, sense == Sense::Max ? -1.0 : 2.0);
    std::vector<std::size_t> pick(n, 0);
    while (true) {
        std::vector<Distribution> next;
        for (StateId s = 0; s < n; ++s) next.push_back(mdp.trans(mdp.available(s)[pick[s]]));
        auto v = dense_rabin(dense_chain(next), mdp.acceptance());
        for (std::size_t s = 0; s < n; ++s) best[s] = sense == Sense::Max ? std::max(best[s], v[s]) : std::min(best[s], v[s]);
        std::size_t s = 0;
        while (s < n && ++pick[s] == mdp.available(static_cast<StateId>(s)).size()) pick[s++] = 0;
        if (s == n) break;
    }
    return best;
}

/// The chain of a randomized policy, as per-state successor mixtures.
Matrix stationary_chain(const Mdp& mdp, const StationaryPolicy& policy) {
    const std::size_t n = mdp.numStates();
    Matrix p(n, std::vector<double>(n, 0.0));
    for (StateId s = 0; s < n; ++s)
        for (const auto& [a, w] : policy.choice[s])
            for (const auto& [t, q] : mdp.trans(a).entries) p[s][t] += w * q;
    return p;
}

RabinAcceptance acc_of(std::vector<std::pair<std::vector<StateId>, std::vector<StateId>>> pairs) {
    RabinAcceptance acc;
    for (auto& [f, i] : pairs) acc.pairs.push_back({f, i});
    return acc;
}

Mdp with_acc(const Mdp& mdp, RabinAcceptance acc) { return Mdp(mdp.skeleton(), mdp.transitions(), std::move(acc)); }

}  // namespace

TEST_CASE("maximal acceptance on the instantiations") {
    auto left = three_state_left();
    CHECK(mdp_rabin_max(left).values[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(mdp_rabin_max(three_state_right()).values[0] == doctest::Approx(0.5).epsilon(1e-9));
    auto all = mdp_rabin_max(with_acc(left, acc_of({{{}, {0, 1, 2}}})));
    for (double v : all.values) CHECK(v == 1.0);
}

TEST_CASE("minimal acceptance on the instantiations") {
    auto left = three_state_left();
    CHECK(mdp_rabin_min(left).values[0] == doctest::Approx(0.0).epsilon(1e-9));
    auto all = mdp_rabin_min(with_acc(left, acc_of({{{}, {0, 1, 2}}})));
    for (double v : all.values) CHECK(v == doctest::Approx(1.0));
    auto none = mdp_rabin_min(with_acc(left, {}));
    for (double v : none.values) CHECK(v == 0.0);
}

TEST_CASE("maximal acceptance equals the best positional policy") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        auto mdp = random_point_mdp(rng, {.maxStates = 5, .maxActions = 2, .maxSuccessors = 3, .maxPairs = 2});
        auto r = mdp_rabin_max(mdp);
        auto want = exhaustive_rabin(mdp, Sense::Max);
        for (std::size_t s = 0; s < want.size(); ++s) CHECK(r.values[s] == doctest::Approx(want[s]).epsilon(1e-9));
        auto achieved = dense_rabin(dense_chain(Chain::from(induce_mc(mdp, r.policy)).next), mdp.acceptance());
        for (std::size_t s = 0; s < want.size(); ++s) CHECK(achieved[s] == doctest::Approx(want[s]).epsilon(1e-9));
    }
}

TEST_CASE("minimal acceptance is attained by its policy and beats every positional policy") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        auto mdp = random_point_mdp(rng, {.maxStates = 5, .maxActions = 2, .maxSuccessors = 3, .maxPairs = 2});
        auto r = mdp_rabin_min(mdp);
        auto positional = exhaustive_rabin(mdp, Sense::Min);
        auto achieved = dense_rabin(stationary_chain(mdp, r.policy), mdp.acceptance());
        for (std::size_t s = 0; s < positional.size(); ++s) {
            CHECK(r.values[s] <= positional[s] + 1e-9);
            CHECK(achieved[s] == doctest::Approx(r.values[s]).epsilon(1e-9));
        }
    }
}

TEST_CASE("the game of the three-state model") {
    auto model = load_bmdp("three_state.bmdp");
    GameIndex index;
    auto game = build_game(model, &index);
    CHECK(game.mdp.numStates() == 7);
    CHECK(index.vertices.size() == 4);
    std::vector<std::size_t> counts;
    for (const auto& set : index.vertices) counts.push_back(set.vertices.size());
    CHECK(counts == std::vector<std::size_t>{2, 1, 2, 2});
    for (StateId s = 0; s < 3; ++s) CHECK(game.owner[s] == Player::One);
    for (StateId s = 3; s < 7; ++s) {
        CHECK(game.owner[s] == Player::Two);
        CHECK(game.mdp.available(s).size() == counts[s - 3]);
    }
    CHECK(game.mdp.acceptance().pairs.size() == 1);

    CHECK(sg_rabin(game, Sense::Min).values[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sg_rabin(game, Sense::Max).values[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("point models give one corner per intermediate state") {
    auto game = build_game(as_point_bmdp(three_state_left()));
    for (StateId s = 3; s < game.mdp.numStates(); ++s) CHECK(game.mdp.available(s).size() == 1);
}

TEST_CASE("a game without player-2 states is an MDP") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        auto mdp = random_point_mdp(rng, {.maxStates = 5, .maxActions = 2, .maxSuccessors = 3});
        StochasticGame game{mdp, std::vector<Player>(mdp.numStates(), Player::One)};
        auto mx = sg_rabin(game, Sense::Max).values;
        auto mn = sg_rabin(game, Sense::Min).values;
        auto wantMax = mdp_rabin_max(mdp).values;
        auto wantMin = exhaustive_rabin(mdp, Sense::Max);
        for (std::size_t s = 0; s < mx.size(); ++s) {
            CHECK(mx[s] == doctest::Approx(wantMax[s]).epsilon(1e-9));
            CHECK(mn[s] == doctest::Approx(wantMin[s]).epsilon(1e-9));
        }
    }
}

TEST_CASE("lower bound of the three-state model") {
    auto model = load_bmdp("three_state.bmdp");
    const auto& k = model.skeleton();
    auto r = bmdp_lower(model);
    CHECK(r.values[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.witness.trans(action(k, "q2", "d")).probability(state(k, "q2")) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(is_consistent(r.witness, model));
    CHECK(mdp_rabin_max(r.witness).values[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("upper bound of the three-state model") {
    auto model = load_bmdp("three_state.bmdp");
    const auto& k = model.skeleton();
    for (const auto& r : {bmdp_upper(model), bmdp_upper_game(model)}) {
        CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(r.controller.choice[state(k, "q1")] == action(k, "q1", "b"));
        CHECK(is_consistent(r.witness, model));
        CHECK(mdp_rabin_max(r.witness).values[0] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("grid bounds") {
    auto acc1 = load_bmdp("grid_robot_acc1.bmdp");
    auto acc2 = load_bmdp("grid_robot_acc2.bmdp");
    const StateId q0 = state(acc1.skeleton(), "q0");
    CHECK(bmdp_lower(acc1).values[q0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(bmdp_upper(acc1).values[q0] == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(bmdp_lower(acc2).values[q0] == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(bmdp_upper(acc2).values[q0] == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("winning components of the first grid objective") {
    auto model = load_bmdp("grid_robot_acc1.bmdp");
    const auto& k = model.skeleton();
    auto r = bmdp_upper(model);
    REQUIRE(r.components.size() == 1);
    const auto& pc = r.components[0];
    REQUIRE(pc.mecs.size() == 3);
    EndComponent winning{{state(k, "q1"), state(k, "q4")}, {action(k, "q1", "d1"), action(k, "q4", "u4")}};
    CHECK(pc.mecs[0] == winning);
    CHECK(pc.winning == std::vector<char>{1, 0, 0});
    CHECK(pc.mecs[1].states == std::vector<StateId>{state(k, "q3")});
    CHECK(pc.mecs[2].states == std::vector<StateId>{state(k, "q5")});
}

TEST_CASE("point models: both bounds are the MDP optimum") {
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 100; ++trial) {
        auto mdp = random_point_mdp(rng, {.maxStates = 4, .maxActions = 2, .maxSuccessors = 3});
        auto model = as_point_bmdp(mdp);
        auto want = mdp_rabin_max(mdp).values;
        auto lo = bmdp_lower(model).values;
        auto hi = bmdp_upper(model).values;
        for (std::size_t s = 0; s < want.size(); ++s) {
            CHECK(lo[s] == doctest::Approx(want[s]).epsilon(1e-9));
            CHECK(hi[s] == doctest::Approx(want[s]).epsilon(1e-9));
        }
    }
}

TEST_CASE("exhaustive values") {
    auto model = load_bmdp("three_state.bmdp");
    CHECK(brute_force_value(model, Sense::Min)[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(brute_force_value(model, Sense::Max)[0] == doctest::Approx(1.0).epsilon(1e-9));

    Bmdp single(Skeleton({"s"}, 0, {{"a", 0}}), {{0, 0, {{0, {1.0, 1.0}}}}}, acc_of({{{}, {0}}}));
    CHECK(brute_force_value(single, Sense::Min)[0] == 1.0);

    std::mt19937_64 rng(45);
    auto big = random_wide_bmdp(rng, 40, 2, 6).withAcceptance(acc_of({{{}, {0}}}));
    CHECK_THROWS_AS(brute_force_value(big, Sense::Min), SizeGuardError);
}

TEST_CASE("nature options") {
    IntervalRow row{0, 0, {{0, {0.0, 0.9}}, {1, {0.1, 0.4}}, {2, {0.3, 0.7}}}};
    auto mx = nature_options(row, Sense::Max);
    CHECK(mx.size() == 5);
    auto mn = nature_options(row, Sense::Min);
    CHECK(mn.size() > mx.size());
    for (const auto& d : mn) CHECK(row.contains(d));
}

TEST_CASE("reachability as a Rabin objective") {
    auto model = load_bmdp("grid_robot_acc1.bmdp");
    const auto& k = model.skeleton();
    const StateId q0 = state(k, "q0");
    std::vector<StateId> target{state(k, "q2")};
    auto converted = reach_as_rabin(model, target);
    REQUIRE(converted.acceptance().pairs.size() == 1);
    CHECK(converted.acceptance().pairs[0].fin.empty());
    CHECK(converted.acceptance().pairs[0].inf == target);
    CHECK(bmdp_lower(converted).values[q0] == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(bmdp_upper(converted).values[q0] == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("bounds agree with exhaustive search on small random models") {
    std::mt19937_64 rng(46);
    for (int trial = 0; trial < 60; ++trial) {
        auto model = random_bmdp(rng, {.maxStates = 3, .maxActions = 2, .maxSuccessors = 3});
        auto lo = bmdp_lower(model).values;
        auto hi = bmdp_upper(model).values;
        auto bruteLo = brute_force_value(model, Sense::Min);
        auto bruteHi = brute_force_value(model, Sense::Max);
        for (std::size_t s = 0; s < lo.size(); ++s) {
            CHECK(lo[s] == doctest::Approx(bruteLo[s]).epsilon(1e-6));
            CHECK(hi[s] == doctest::Approx(bruteHi[s]).epsilon(1e-6));
        }
    }
}
