#include "bmdp/check.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "bmdp/omega.hpp"
#include "bmdp/polytope.hpp"
#include "bmdp/reach.hpp"

namespace bmdp {

Objective Objective::parse(const std::string& text, const Skeleton& skel) {
    Objective objective;
    if (text == "rabin") return objective;
    const std::string prefix = "reach:";
    if (text.rfind(prefix, 0) != 0) throw UsageError("objective must be 'rabin' or 'reach:<states>', got '" + text + "'");
    objective.reach = true;
    std::string rest = text.substr(prefix.size());
    std::size_t start = 0;
    while (start <= rest.size()) {
        std::size_t comma = rest.find(',', start);
        if (comma == std::string::npos) comma = rest.size();
        std::string name = rest.substr(start, comma - start);
        auto s = skel.findState(name);
        if (!s) throw UsageError("reach target '" + name + "' is not a state of the model");
        objective.target.push_back(*s);
        start = comma + 1;
    }
    std::sort(objective.target.begin(), objective.target.end());
    objective.target.erase(std::unique(objective.target.begin(), objective.target.end()), objective.target.end());
    return objective;
}

std::string Objective::text(const Skeleton& skel) const {
    if (!reach) return "rabin";
    std::string out = "reach:";
    for (std::size_t k = 0; k < target.size(); ++k) out += (k ? "," : "") + skel.stateName(target[k]);
    return out;
}

Bmdp objective_model(const Bmdp& model, const Objective& objective) {
    return objective.reach ? reach_as_rabin(model, objective.target) : model;
}

namespace {

struct Computed {
    BoundReport report;
    std::optional<Mdp> witness;
};

Computed fromGameResult(GameResult r, const char* method) {
    Computed c;
    c.report.method = method;
    c.report.values = std::move(r.values);
    c.report.controller = std::move(r.controller);
    c.report.nature = std::move(r.nature);
    c.report.iterations = r.iterations;
    c.witness = std::move(r.witness);
    return c;
}

Computed computeBound(const Bmdp& model, const CheckOptions& options, bool upper) {
    const Sense nature = upper ? Sense::Max : Sense::Min;
    Method method = options.method;
    if (method == Method::Auto) method = upper || options.objective.reach ? Method::Mec : Method::Game;

    if (method == Method::Brute) {
        Computed c;
        c.report.method = "brute";
        c.report.values = brute_force_value(objective_model(model, options.objective), nature);
        return c;
    }
    if (options.objective.reach && method == Method::Mec) {
        ReachQuery query{options.objective.target, Sense::Max, nature, options.epsilon};
        auto r = bmdp_reach(model, query);
        Computed c;
        c.report.method = "reach";
        c.report.values = std::move(r.values);
        c.report.controller = std::move(r.controller);
        c.report.nature = std::move(r.nature);
        c.report.iterations = r.iterations;
        c.witness = instantiate(model, c.report.nature);
        return c;
    }
    const Bmdp target = objective_model(model, options.objective);
    if (method == Method::Game) {
        Computed c = fromGameResult(upper ? bmdp_upper_game(target) : bmdp_lower(target), "game");
        if (options.objective.reach) {
            // the absorbing conversion changed target rows; report nature on the real rows
            for (StateId s : options.objective.target) {
                for (ActionId a : model.available(s)) {
                    c.report.nature.choice[a] = extreme_distribution(model.row(a), std::vector<double>(model.numStates()), nature);
                }
            }
            c.witness = instantiate(model, c.report.nature);
        }
        return c;
    }
    if (!upper) throw UsageError("the mec method computes upper bounds only; use game or brute for the lower bound");
    return fromGameResult(bmdp_upper(model), "mec");
}

}  // namespace

CheckResult run_check(const Bmdp& model, const CheckOptions& options) {
    if (options.objective.reach && options.objective.target.empty()) throw UsageError("reach objective needs a target");
    CheckResult result;
    auto& report = result.report;
    report.objective = options.objective.text(model.skeleton());
    report.stateNames = model.skeleton().stateNames();
    report.initial = model.skeleton().initial();

    auto timed = [&](bool upper) {
        auto start = std::chrono::steady_clock::now();
        Computed c = computeBound(model, options, upper);
        c.report.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return c;
    };
    if (options.bound != BoundKind::Upper) {
        auto c = timed(false);
        report.lower = std::move(c.report);
        result.lowerWitness = std::move(c.witness);
    }
    if (options.bound != BoundKind::Lower) {
        auto c = timed(true);
        report.upper = std::move(c.report);
        result.upperWitness = std::move(c.witness);
    }
    return result;
}

// -----------------------------------------------------------------------------

Mdp sample_instantiation(const Bmdp& model, std::mt19937_64& rng) {
    NaturePolicy nature;
    nature.choice.reserve(model.numActions());
    for (const auto& row : model.rows()) {
        auto vertices = bfs_vertices(row).vertices;
        std::vector<double> weight(vertices.size());
        double total = 0.0;
        for (auto& w : weight) {
            w = -std::log(1.0 - std::generate_canonical<double, 53>(rng));
            total += w;
        }
        std::vector<std::pair<StateId, double>> mixture;
        for (std::size_t k = 0; k < vertices.size(); ++k) {
            for (const auto& [t, p] : vertices[k].entries) mixture.emplace_back(t, p * weight[k] / total);
        }
        nature.choice.push_back(Distribution::fromEntries(std::move(mixture)));
    }
    return instantiate(model, nature);
}

BracketResult validate_bracket(const Bmdp& model, const CheckReport& report, std::size_t trials, std::uint64_t seed) {
    const Bmdp analysed = objective_model(model, Objective::parse(report.objective.empty() ? "rabin" : report.objective,
                                                                  model.skeleton()));
    std::mt19937_64 rng(seed);
    BracketResult result;
    result.trials = trials;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        auto values = mdp_rabin_max(sample_instantiation(analysed, rng)).values;
        for (StateId s = 0; s < values.size(); ++s) {
            double lo = report.lower ? report.lower->values.at(s) : 0.0;
            double hi = report.upper ? report.upper->values.at(s) : 1.0;
            if (values[s] < lo - kBracketSlack || values[s] > hi + kBracketSlack) {
                result.pass = false;
                result.violations.push_back({trial, s, values[s], lo, hi});
            }
        }
    }
    return result;
}

}  // namespace bmdp
