#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "bmdp/check.hpp"
#include "bmdp/cli.hpp"
#include "bmdp/io.hpp"
#include "bmdp/omega.hpp"
#include "support/fixtures.hpp"
#include "support/random_models.hpp"

using namespace bmdp;
using namespace testing_support;

namespace {

void require_same(const Bmdp& a, const Bmdp& b) {
    REQUIRE(a.skeleton().stateNames() == b.skeleton().stateNames());
    REQUIRE(a.skeleton().initial() == b.skeleton().initial());
    REQUIRE(a.numActions() == b.numActions());
    for (ActionId x = 0; x < a.numActions(); ++x) {
        CHECK(a.skeleton().actionName(x) == b.skeleton().actionName(x));
        CHECK(a.skeleton().owner(x) == b.skeleton().owner(x));
        const auto& ra = a.row(x).entries;
        const auto& rb = b.row(x).entries;
        REQUIRE(ra.size() == rb.size());
        for (std::size_t i = 0; i < ra.size(); ++i) {
            CHECK(ra[i].target == rb[i].target);
            CHECK(ra[i].bounds.lo == rb[i].bounds.lo);
            CHECK(ra[i].bounds.hi == rb[i].bounds.hi);
        }
    }
    REQUIRE(a.acceptance().pairs.size() == b.acceptance().pairs.size());
    for (std::size_t p = 0; p < a.acceptance().pairs.size(); ++p) {
        CHECK(a.acceptance().pairs[p].fin == b.acceptance().pairs[p].fin);
        CHECK(a.acceptance().pairs[p].inf == b.acceptance().pairs[p].inf);
    }
}

ParseError::Kind parse_failure(const std::string& text) {
    try {
        parse_model(text);
    } catch (const ParseError& e) {
        return e.kind();
    }
    FAIL("expected a parse error");
    return ParseError::Kind::Syntax;
}

ParseError::Kind dra_failure(const std::string& text) {
    try {
        parse_dra(text);
    } catch (const ParseError& e) {
        return e.kind();
    }
    FAIL("expected a parse error");
    return ParseError::Kind::Syntax;
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / ("bmdp_frontend_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(dir);
    return dir;
}

const std::string kTwoStateDra = R"(dra
alphabet x y z
states s0 s1
init s0
trans s0 x s1
trans s0 y s1
trans s1 x s0
trans s1 y s1
trans s1 z s0
rabin { s0 } { s1 }
)";

}  // namespace

TEST_CASE("the three-state model parses") {
    auto model = load_bmdp("three_state.bmdp");
    const auto& k = model.skeleton();
    CHECK(model.numStates() == 3);
    CHECK(model.numActions() == 4);
    REQUIRE(model.acceptance().pairs.size() == 1);
    CHECK(model.acceptance().pairs[0].fin == std::vector<StateId>{state(k, "q2")});
    CHECK(model.acceptance().pairs[0].inf == std::vector<StateId>{state(k, "q1")});
}

TEST_CASE("the two-state automaton parses") {
    auto dra = load_dra("eventually_y_or_z.dra");
    CHECK(dra.numStates() == 2);
    CHECK(dra.acceptance().pairs.size() == 2);
}

TEST_CASE("parse errors carry their kind") {
    CHECK(parse_failure("") == ParseError::Kind::Syntax);
    CHECK(parse_failure("bmdp\nstates q0\ninit q0\naction q0 a\n  to q9 [1, 1]\n") == ParseError::Kind::Reference);
    CHECK(parse_failure("bmdp\nstates q0 q0\ninit q0\naction q0 a\n  to q0 [1, 1]\n") == ParseError::Kind::Duplicate);
    CHECK(parse_failure("bmdp\nstates q0 q1\ninit q0\naction q0 a\n  to q0 [1, 1]\n") == ParseError::Kind::Totality);
    CHECK(parse_failure("bmdp\nstates q0\ninit q0\naction q0 a\n  to q0 [1 1]\n") == ParseError::Kind::Syntax);

    CHECK(dra_failure(kTwoStateDra) == ParseError::Kind::Totality);
    std::string dup = kTwoStateDra;
    dup.insert(dup.find("trans s1 x"), "trans s0 z s0\ntrans s0 x s0\n");
    CHECK(dra_failure(dup) == ParseError::Kind::Duplicate);
}

TEST_CASE("parse errors report a position") {
    try {
        parse_model("bmdp\nstates q0\ninit q0\naction q0 a\n  to q9 [1, 1]\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 5);
        CHECK(e.column() == 6);
    }
}

TEST_CASE("invalid bounds are validation errors") {
    try {
        parse_model("bmdp\nstates q0 q1\ninit q0\naction q0 a\n  to q1 [0.2, 0.4]\n  to q0 [0.1, 0.5]\naction q1 b\n  to q1 [1, 1]\n");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        REQUIRE(e.violations().size() == 1);
        CHECK(e.violations()[0].kind == Violation::Kind::RowFeasibility);
    }
}

TEST_CASE("models round-trip through text") {
    for (const char* file : {"three_state.bmdp", "grid_robot_acc1.bmdp", "grid_robot_acc2.bmdp", "corner_points.bmdp"}) {
        auto model = load_bmdp(file);
        auto text = serialize_model(model);
        auto again = std::get<Bmdp>(parse_model(text));
        require_same(model, again);
        CHECK(serialize_model(again) == text);
    }
    auto labelled = load_labelled("three_state.lbmdp");
    auto again = std::get<LabelledBmdp>(parse_model(serialize_model(labelled)));
    require_same(labelled.model, again.model);
    CHECK(again.label == labelled.label);
    CHECK(again.alphabet.letters == labelled.alphabet.letters);

    auto dra = load_dra("xyxz.dra");
    CHECK(serialize_dra(parse_dra(serialize_dra(dra))) == serialize_dra(dra));
}

TEST_CASE("random models round-trip bit-exactly") {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 200; ++trial) {
        auto model = random_wide_bmdp(rng, 6, 2, 3).withAcceptance(RabinAcceptance{{{{0, 1}, {2}}}});
        require_same(model, std::get<Bmdp>(parse_model(serialize_model(model))));
    }
}

TEST_CASE("probabilities print in shortest round-trip form") {
    CHECK(format_probability(0.1) == "0.1");
    CHECK(format_probability(1.0) == "1");
    CHECK(format_probability(0.30000000000000004) == "0.30000000000000004");
}

TEST_CASE("reports round-trip at twelve digits") {
    auto model = load_bmdp("grid_robot_acc2.bmdp");
    CheckOptions options;
    options.objective = Objective::parse("rabin", model.skeleton());
    auto result = run_check(model, options);
    auto text = write_report(result.report, model.skeleton());
    auto back = read_report(text, model.skeleton());
    REQUIRE(back.lower);
    REQUIRE(back.upper);
    CHECK(back.objective == "rabin");
    CHECK(back.initial == model.skeleton().initial());
    for (std::size_t s = 0; s < model.numStates(); ++s) {
        CHECK(std::abs(back.lower->values[s] - result.report.lower->values[s]) <= 1e-11);
        CHECK(std::abs(back.upper->values[s] - result.report.upper->values[s]) <= 1e-11);
    }
    CHECK(back.upper->controller.choice == result.report.upper->controller.choice);
    CHECK(back.upper->method == result.report.upper->method);
    CHECK(write_report(back, model.skeleton()).find("upper.value q0 0.7") != std::string::npos);

    auto reach = Objective::parse("reach:q2,q5", model.skeleton());
    CHECK(reach.text(model.skeleton()) == "reach:q2,q5");
    CheckReport r;
    r.objective = reach.text(model.skeleton());
    r.stateNames = model.skeleton().stateNames();
    CHECK(read_report(write_report(r, model.skeleton()), model.skeleton()).objective == "reach:q2,q5");
}

TEST_CASE("check computes the grid table") {
    auto acc1 = load_bmdp("grid_robot_acc1.bmdp");
    const StateId q0 = state(acc1.skeleton(), "q0");
    CheckOptions options;
    options.objective = Objective::parse("rabin", acc1.skeleton());
    auto r = run_check(acc1, options);
    CHECK(r.report.lower->values[q0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.report.upper->values[q0] == doctest::Approx(0.7).epsilon(1e-9));

    options.objective = Objective::parse("reach:q2", acc1.skeleton());
    r = run_check(acc1, options);
    CHECK(r.report.lower->values[q0] == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(r.report.upper->values[q0] == doctest::Approx(0.7).epsilon(1e-9));

    for (Method m : {Method::Game, Method::Brute}) {
        options.method = m;
        auto again = run_check(acc1, options);
        CHECK(again.report.lower->values[q0] == doctest::Approx(0.1).epsilon(1e-9));
        CHECK(again.report.upper->values[q0] == doctest::Approx(0.7).epsilon(1e-9));
    }

    options.method = Method::Mec;
    options.objective = Objective::parse("rabin", acc1.skeleton());
    options.bound = BoundKind::Lower;
    CHECK_THROWS_AS(run_check(acc1, options), UsageError);
    CHECK_THROWS_AS(Objective::parse("reach:q9", acc1.skeleton()), UsageError);
    CHECK_THROWS_AS(Objective::parse("buchi", acc1.skeleton()), UsageError);
}

TEST_CASE("bracket validation") {
    auto model = load_bmdp("three_state.bmdp");
    CheckOptions options;
    options.objective = Objective::parse("rabin", model.skeleton());
    auto report = run_check(model, options).report;
    auto pass = validate_bracket(model, report, 100, 7);
    CHECK(pass.pass);
    CHECK(pass.trials == 100);
    CHECK(pass.violations.empty());

    auto corrupted = report;
    for (auto& v : corrupted.upper->values) v /= 2.0;
    auto fail = validate_bracket(model, corrupted, 100, 7);
    CHECK_FALSE(fail.pass);
    REQUIRE_FALSE(fail.violations.empty());
    CHECK(fail.violations[0].value > fail.violations[0].upper);

    // same seed, same draws
    auto again = validate_bracket(model, corrupted, 100, 7);
    REQUIRE(again.violations.size() == fail.violations.size());
    for (std::size_t i = 0; i < fail.violations.size(); ++i) {
        CHECK(again.violations[i].trial == fail.violations[i].trial);
        CHECK(again.violations[i].value == fail.violations[i].value);
    }
}

TEST_CASE("bracket on a point model samples one value") {
    auto point = as_point_bmdp(three_state_right());
    CheckOptions options;
    options.objective = Objective::parse("rabin", point.skeleton());
    auto report = run_check(point, options).report;
    CHECK(report.lower->values == report.upper->values);
    CHECK(validate_bracket(point, report, 20, 3).pass);
    std::mt19937_64 rng(1);
    auto a = sample_instantiation(point, rng);
    auto b = sample_instantiation(point, rng);
    for (ActionId x = 0; x < a.numActions(); ++x) CHECK(a.trans(x).entries == b.trans(x).entries);

    auto shifted = report;
    shifted.lower->values[0] += 0.1;
    shifted.upper->values[0] += 0.1;
    CHECK_FALSE(validate_bracket(point, shifted, 20, 3).pass);
}

TEST_CASE("command line: check and its outputs") {
    auto dir = scratch_dir();
    auto run = cli({"check", model_path("three_state.bmdp"), "--bound", "both", "--objective", "rabin", "--policy-out",
                    (dir / "policy.txt").string(), "--witness-out", (dir / "witness").string(), "--report-out",
                    (dir / "report.txt").string()});
    CHECK(run.code == kExitOk);
    CHECK(run.out.find("q0") != std::string::npos);
    auto report = read_text((dir / "report.txt").string());
    CHECK(report.find("lower.value q0 0.5\n") != std::string::npos);
    CHECK(report.find("upper.value q0 1\n") != std::string::npos);
    CHECK(report.find("upper.controller q1 b\n") != std::string::npos);
    auto lowerWitness = std::get<Bmdp>(parse_model(read_text((dir / "witness.lower").string())));
    CHECK(lowerWitness.isPointModel());
    CHECK(std::filesystem::exists(dir / "witness.upper"));
    CHECK(read_text((dir / "policy.txt").string()).find("q1 b") != std::string::npos);

    auto bracket = cli({"bracket", model_path("three_state.bmdp"), "--report", (dir / "report.txt").string(), "--trials",
                        "50", "--seed", "3"});
    CHECK(bracket.code == kExitOk);
    CHECK(bracket.out.find("pass") != std::string::npos);

    std::string text = report;
    auto at = text.find("upper.value q0 1");
    text.replace(at, std::string("upper.value q0 1").size(), "upper.value q0 0.5");
    std::ofstream((dir / "bad.txt").string()) << text;
    auto bad = cli({"bracket", model_path("three_state.bmdp"), "--report", (dir / "bad.txt").string(), "--trials", "50",
                    "--seed", "3"});
    CHECK(bad.code == kExitValidation);
    CHECK(bad.out.find("violation") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("command line: other subcommands") {
    auto bfs = cli({"bfs", model_path("corner_points.bmdp"), "--state", "q0", "--action", "a"});
    CHECK(bfs.code == kExitOk);
    CHECK(bfs.out == "successors q0 q1 q2\n0 0.3 0.7\n0 0.4 0.6\n0.2 0.1 0.7\n0.3 0.4 0.3\n0.6 0.1 0.3\n");

    auto validate = cli({"validate", model_path("grid_robot_acc2.bmdp")});
    CHECK(validate.code == kExitOk);
    CHECK(validate.out == "valid: 6 states, 12 actions, 2 rabin pairs\n");

    auto game = cli({"game", model_path("three_state.bmdp")});
    CHECK(game.code == kExitOk);
    CHECK(game.out.rfind("game\n", 0) == 0);
    CHECK(game.out.find("player2") != std::string::npos);

    auto product = cli({"product", model_path("caveat_imc.lbmdp"), "--dra", model_path("xyxz.dra")});
    CHECK(product.code == kExitOk);
    auto parsed = std::get<Bmdp>(parse_model(product.out));
    CHECK(parsed.skeleton().stateName(parsed.skeleton().initial()) == "s0.q0");

    auto caveat = cli({"check", model_path("caveat_imc.lbmdp"), "--dra", model_path("xyxz.dra"), "--bound", "upper",
                       "--objective", "rabin"});
    CHECK(caveat.code == kExitOk);
}

TEST_CASE("command line: exit codes") {
    CHECK(cli({"check", model_path("three_state.bmdp"), "--objective", "rabin", "--frobnicate"}).code == kExitUsage);
    CHECK(cli({"check", model_path("three_state.bmdp"), "--objective", "rabin"}).code == kExitUsage);
    CHECK(cli({"check", model_path("three_state.bmdp"), "--bound", "lower", "--objective", "rabin", "--method", "mec"}).code ==
          kExitUsage);
    CHECK(cli({"check", model_path("three_state.bmdp"), "--bound", "both", "--objective", "reach:q9"}).code == kExitUsage);
    CHECK(cli({"check", model_path("three_state.lbmdp"), "--bound", "both", "--objective", "rabin"}).code == kExitUsage);
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);

    auto dir = scratch_dir();
    std::ofstream((dir / "broken.bmdp").string()) << "bmdp\nstates q0\ninit q0\naction q0 a\n  to q9 [1, 1]\n";
    std::ofstream((dir / "infeasible.bmdp").string()) << "bmdp\nstates q0\ninit q0\naction q0 a\n  to q0 [0.2, 0.4]\n";
    auto broken = cli({"validate", (dir / "broken.bmdp").string()});
    CHECK(broken.code == kExitParse);
    CHECK(broken.err.find("line 5") != std::string::npos);
    CHECK(cli({"validate", (dir / "infeasible.bmdp").string()}).code == kExitValidation);
    std::filesystem::remove_all(dir);
}
