#include "bmdp/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "bmdp/check.hpp"
#include "bmdp/io.hpp"
#include "bmdp/omega.hpp"
#include "bmdp/polytope.hpp"
#include "bmdp/product.hpp"
#include "bmdp/reach.hpp"

namespace bmdp {

namespace {

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

void writeFile(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw UsageError("cannot write '" + path + "'");
}

// The analysable model: a plain BMDP, or the product of a labelled one with `draPath`.
Bmdp loadModel(const std::string& path, const std::string& draPath) {
    auto parsed = parse_model(readFile(path));
    if (auto* plain = std::get_if<Bmdp>(&parsed)) {
        if (!draPath.empty()) throw UsageError("--dra applies to labelled models only");
        return std::move(*plain);
    }
    if (draPath.empty()) throw UsageError("labelled models need an automaton (--dra)");
    return build_product(std::get<LabelledBmdp>(parsed), parse_dra(readFile(draPath)));
}

struct CheckArgs {
    std::string model;
    std::string dra;
    std::string bound;
    std::string objective;
    double epsilon = 1e-10;
    std::string method = "auto";
    std::string policyOut;
    std::string witnessOut;
    std::string reportOut;
};

int runCheck(const CheckArgs& args, std::ostream& out, std::ostream& err) {
    Bmdp model = loadModel(args.model, args.dra);
    CheckOptions options;
    options.bound = args.bound == "lower" ? BoundKind::Lower : args.bound == "upper" ? BoundKind::Upper : BoundKind::Both;
    options.objective = Objective::parse(args.objective, model.skeleton());
    static const std::map<std::string, Method> methods{
        {"auto", Method::Auto}, {"game", Method::Game}, {"mec", Method::Mec}, {"brute", Method::Brute}};
    options.method = methods.at(args.method);
    options.epsilon = args.epsilon;

    auto result = run_check(model, options);
    const auto& skel = model.skeleton();
    out << format_report_table(result.report);
    if (!args.reportOut.empty()) writeFile(args.reportOut, write_report(result.report, skel));
    if (!args.policyOut.empty()) {
        std::string text;
        for (const auto& [name, bound] : {std::pair{"lower", &result.report.lower}, std::pair{"upper", &result.report.upper}}) {
            if (!*bound) continue;
            if ((*bound)->controller.choice.empty()) {
                err << "note: the " << name << " bound was computed without strategies\n";
                continue;
            }
            text += std::string("# ") + name + " bound: controller\n" + serialize_controller(skel, (*bound)->controller);
            text += std::string("# ") + name + " bound: nature\n" + serialize_nature(skel, (*bound)->nature);
        }
        writeFile(args.policyOut, text);
    }
    if (!args.witnessOut.empty()) {
        const bool both = result.lowerWitness.has_value() + result.upperWitness.has_value() == 2;
        for (const auto& [name, witness] : {std::pair{"lower", &result.lowerWitness}, std::pair{"upper", &result.upperWitness}}) {
            if (!*witness) continue;
            writeFile(both ? args.witnessOut + "." + name : args.witnessOut, serialize_mdp(**witness));
        }
        if (!result.lowerWitness && !result.upperWitness) err << "note: no witness available for the chosen method\n";
    }
    return kExitOk;
}

int runValidate(const std::string& path, std::ostream& out) {
    auto parsed = parse_model(readFile(path));
    const Bmdp& model = std::holds_alternative<Bmdp>(parsed) ? std::get<Bmdp>(parsed) : std::get<LabelledBmdp>(parsed).model;
    out << "valid: " << model.numStates() << " states, " << model.numActions() << " actions, "
        << model.acceptance().pairs.size() << " rabin pairs\n";
    return kExitOk;
}

int runBfs(const std::string& path, const std::string& stateName, const std::string& actionName, std::ostream& out) {
    auto parsed = parse_model(readFile(path));
    const Bmdp& model = std::holds_alternative<Bmdp>(parsed) ? std::get<Bmdp>(parsed) : std::get<LabelledBmdp>(parsed).model;
    const auto& skel = model.skeleton();
    auto s = skel.findState(stateName);
    if (!s) throw UsageError("unknown state '" + stateName + "'");
    auto a = skel.findAction(*s, actionName);
    if (!a) throw UsageError("state '" + stateName + "' has no action '" + actionName + "'");
    const auto& row = model.row(*a);
    out << "successors";
    for (const auto& e : row.entries) out << ' ' << skel.stateName(e.target);
    out << '\n';
    for (const auto& v : bfs_vertices(row).vertices) {
        for (std::size_t i = 0; i < row.entries.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.12g", v.probability(row.entries[i].target));
            out << (i ? " " : "") << buf;
        }
        out << '\n';
    }
    return kExitOk;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
    } else {
        writeFile(path, text);
    }
}

int runBracket(const std::string& path, const std::string& draPath, const std::string& reportPath, std::size_t trials,
               std::uint64_t seed, std::ostream& out) {
    Bmdp model = loadModel(path, draPath);
    auto report = read_report(readFile(reportPath), model.skeleton());
    auto result = validate_bracket(model, report, trials, seed);
    const auto& skel = model.skeleton();
    for (const auto& v : result.violations) {
        out << "violation: trial " << v.trial << ", state " << skel.stateName(v.state) << ": sampled " << v.value
            << " outside [" << v.lower << ", " << v.upper << "]\n";
    }
    out << (result.pass ? "pass" : "fail") << ": " << result.trials << " trials, " << result.violations.size()
        << " violations\n";
    return result.pass ? kExitOk : kExitValidation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bounds on the probability of Rabin objectives in bounded-parameter MDPs", "bmdpcheck"};
    app.require_subcommand(1);

    CheckArgs check;
    auto* checkCmd = app.add_subcommand("check", "compute lower and/or upper acceptance bounds");
    checkCmd->add_option("model", check.model, "model file")->required()->check(CLI::ExistingFile);
    checkCmd->add_option("--dra", check.dra, "automaton for labelled models")->check(CLI::ExistingFile);
    checkCmd->add_option("--bound", check.bound, "upper, lower or both")
        ->required()
        ->check(CLI::IsMember({"upper", "lower", "both"}));
    checkCmd->add_option("--objective", check.objective, "rabin or reach:<s1,s2,...>")->required();
    checkCmd->add_option("--epsilon", check.epsilon, "value iteration threshold")->check(CLI::PositiveNumber);
    checkCmd->add_option("--method", check.method, "auto, game, mec or brute")
        ->check(CLI::IsMember({"auto", "game", "mec", "brute"}));
    checkCmd->add_option("--policy-out", check.policyOut, "write controller and nature policies");
    checkCmd->add_option("--witness-out", check.witnessOut, "write witness MDP(s)");
    checkCmd->add_option("--report-out", check.reportOut, "write key/value report");

    std::string modelPath;
    auto* validateCmd = app.add_subcommand("validate", "parse and validate a model");
    validateCmd->add_option("model", modelPath, "model file")->required()->check(CLI::ExistingFile);

    std::string stateName;
    std::string actionName;
    auto* bfsCmd = app.add_subcommand("bfs", "list the corner points of one row");
    bfsCmd->add_option("model", modelPath, "model file")->required()->check(CLI::ExistingFile);
    bfsCmd->add_option("--state", stateName, "state")->required();
    bfsCmd->add_option("--action", actionName, "action")->required();

    std::string outPath;
    auto* gameCmd = app.add_subcommand("game", "write the stochastic game of a model");
    gameCmd->add_option("model", modelPath, "model file")->required()->check(CLI::ExistingFile);
    gameCmd->add_option("--out", outPath, "output file (default: stdout)");

    std::string draPath;
    auto* productCmd = app.add_subcommand("product", "write the product of a labelled model and an automaton");
    productCmd->add_option("model", modelPath, "labelled model file")->required()->check(CLI::ExistingFile);
    productCmd->add_option("--dra", draPath, "automaton file")->required()->check(CLI::ExistingFile);
    productCmd->add_option("--out", outPath, "output file (default: stdout)");

    std::string reportPath;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    auto* bracketCmd = app.add_subcommand("bracket", "check sampled instantiations against a report");
    bracketCmd->add_option("model", modelPath, "model file")->required()->check(CLI::ExistingFile);
    bracketCmd->add_option("--dra", draPath, "automaton for labelled models")->check(CLI::ExistingFile);
    bracketCmd->add_option("--report", reportPath, "report written by check --report-out")->required()->check(CLI::ExistingFile);
    bracketCmd->add_option("--trials", trials, "number of sampled instantiations")->required();
    bracketCmd->add_option("--seed", seed, "generator seed")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (checkCmd->parsed()) return runCheck(check, out, err);
        if (validateCmd->parsed()) return runValidate(modelPath, out);
        if (bfsCmd->parsed()) return runBfs(modelPath, stateName, actionName, out);
        if (gameCmd->parsed()) {
            auto parsed = parse_model(readFile(modelPath));
            const Bmdp& model = std::holds_alternative<Bmdp>(parsed) ? std::get<Bmdp>(parsed) : std::get<LabelledBmdp>(parsed).model;
            emit(outPath, serialize_game(build_game(model)), out);
            return kExitOk;
        }
        if (productCmd->parsed()) {
            emit(outPath, serialize_model(loadModel(modelPath, draPath)), out);
            return kExitOk;
        }
        if (bracketCmd->parsed()) return runBracket(modelPath, draPath, reportPath, trials, seed, out);
    } catch (const bmdp::ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kExitParse;
    } catch (const ValidationError& e) {
        err << e.what() << '\n';
        return kExitValidation;
    } catch (const ConvergenceError& e) {
        err << "convergence failure: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const SizeGuardError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ModelError& e) {
        err << "invalid model: " << e.what() << '\n';
        return kExitValidation;
    } catch (const InternalError& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace bmdp
