#include "bmdp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace bmdp {

ParseError::ParseError(Kind kind, std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      kind_(kind),
      line_(line),
      column_(column) {}

namespace {

std::string describe(const std::vector<Violation>& violations) {
    std::string text = "invalid model:";
    for (const auto& v : violations) text += "\n  [" + std::string(to_string(v.kind)) + "] " + v.message;
    return text;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : ModelError(describe(violations)), violations_(std::move(violations)) {}

namespace {

struct Token {
    std::string text;
    std::size_t line;
    std::size_t column;
};

using Line = std::vector<Token>;

bool isPunct(char c) { return c == '[' || c == ']' || c == ',' || c == '{' || c == '}'; }

// Splits into nonempty lines of tokens; brackets, braces and commas are tokens of their own.
std::vector<Line> tokenize(std::string_view text) {
    std::vector<Line> lines;
    std::size_t lineNo = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(start, end - start);
        ++lineNo;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        Line line;
        std::size_t i = 0;
        while (i < raw.size()) {
            char c = raw[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
            } else if (isPunct(c)) {
                line.push_back({std::string(1, c), lineNo, i + 1});
                ++i;
            } else {
                std::size_t j = i;
                while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j])) && !isPunct(raw[j])) ++j;
                line.push_back({std::string(raw.substr(i, j - i)), lineNo, i + 1});
                i = j;
            }
        }
        if (!line.empty()) lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

[[noreturn]] void fail(ParseError::Kind kind, const Token& at, const std::string& message) {
    throw ParseError(kind, at.line, at.column, message);
}

[[noreturn]] void syntax(const Token& at, const std::string& message) { fail(ParseError::Kind::Syntax, at, message); }

Token endOf(const Line& line) {
    const Token& last = line.back();
    return {"", last.line, last.column + last.text.size()};
}

const Token& expectAt(const Line& line, std::size_t k, const char* what) {
    if (k >= line.size()) syntax(endOf(line), std::string("expected ") + what);
    return line[k];
}

void expectText(const Line& line, std::size_t k, const char* text) {
    const Token& t = expectAt(line, k, (std::string("'") + text + "'").c_str());
    if (t.text != text) syntax(t, std::string("expected '") + text + "', found '" + t.text + "'");
}

void expectEnd(const Line& line, std::size_t k) {
    if (k < line.size()) syntax(line[k], "unexpected '" + line[k].text + "'");
}

bool isName(const std::string& s) { return !s.empty() && !isPunct(s[0]); }

double number(const Token& t) {
    double value = 0.0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) syntax(t, "expected a number, found '" + t.text + "'");
    return value;
}

struct NameTable {
    std::vector<std::string> names;
    std::map<std::string, StateId> index;

    void declare(const Line& line, std::size_t from, const char* what) {
        if (from >= line.size()) syntax(endOf(line), std::string("expected at least one ") + what);
        for (std::size_t k = from; k < line.size(); ++k) {
            if (!isName(line[k].text)) syntax(line[k], std::string("expected a ") + what + " name");
            if (!index.emplace(line[k].text, static_cast<StateId>(names.size())).second) {
                fail(ParseError::Kind::Duplicate, line[k], std::string("duplicate ") + what + " '" + line[k].text + "'");
            }
            names.push_back(line[k].text);
        }
    }

    StateId lookup(const Token& t, const char* what) const {
        if (names.empty()) syntax(t, std::string("no ") + what + "s declared yet");
        auto it = index.find(t.text);
        if (it == index.end()) fail(ParseError::Kind::Reference, t, std::string("unknown ") + what + " '" + t.text + "'");
        return it->second;
    }
};

// "{ a b } { c }" starting at line[k]; returns the two sorted sets.
RabinPair parsePair(const Line& line, std::size_t k, const NameTable& states) {
    RabinPair pair;
    for (auto* target : {&pair.fin, &pair.inf}) {
        expectText(line, k++, "{");
        while (true) {
            const Token& t = expectAt(line, k, "'}'");
            ++k;
            if (t.text == "}") break;
            StateId s = states.lookup(t, "state");
            if (std::find(target->begin(), target->end(), s) != target->end()) {
                fail(ParseError::Kind::Duplicate, t, "state '" + t.text + "' listed twice");
            }
            target->push_back(s);
        }
        std::sort(target->begin(), target->end());
    }
    expectEnd(line, k);
    return pair;
}

struct Once {
    std::optional<Token> seen;
    void mark(const Token& at, const char* what) {
        if (seen) fail(ParseError::Kind::Duplicate, at, std::string("duplicate '") + what + "' declaration");
        seen = at;
    }
};

}  // namespace

ParsedModel parse_model(std::string_view text) {
    auto lines = tokenize(text);
    if (lines.empty()) throw ParseError(ParseError::Kind::Syntax, 1, 1, "empty input, expected 'bmdp' or 'labelled-bmdp'");
    const Token& header = lines[0][0];
    bool labelled = false;
    if (header.text == "labelled-bmdp") {
        labelled = true;
    } else if (header.text != "bmdp") {
        syntax(header, "expected 'bmdp' or 'labelled-bmdp', found '" + header.text + "'");
    }
    expectEnd(lines[0], 1);

    NameTable states;
    Once statesDecl;
    Once initDecl;
    StateId initial = 0;
    std::vector<ActionInfo> actions;
    std::vector<IntervalRow> rows;
    std::vector<Token> actionAt;
    RabinAcceptance acc;
    std::map<std::string, std::size_t> letterIndex;
    Alphabet alphabet;
    std::vector<std::optional<std::size_t>> label;

    for (std::size_t li = 1; li < lines.size(); ++li) {
        const Line& line = lines[li];
        const Token& key = line[0];
        if (key.text == "states") {
            statesDecl.mark(key, "states");
            states.declare(line, 1, "state");
            label.assign(states.names.size(), std::nullopt);
        } else if (key.text == "init") {
            initDecl.mark(key, "init");
            initial = states.lookup(expectAt(line, 1, "a state"), "state");
            expectEnd(line, 2);
        } else if (key.text == "label") {
            if (!labelled) syntax(key, "'label' is only allowed in labelled-bmdp files");
            StateId s = states.lookup(expectAt(line, 1, "a state"), "state");
            const Token& letter = expectAt(line, 2, "a letter");
            if (!isName(letter.text)) syntax(letter, "expected a letter");
            expectEnd(line, 3);
            if (label[s]) fail(ParseError::Kind::Duplicate, key, "state '" + line[1].text + "' labelled twice");
            auto [it, fresh] = letterIndex.emplace(letter.text, alphabet.letters.size());
            if (fresh) alphabet.letters.push_back(letter.text);
            label[s] = it->second;
        } else if (key.text == "action") {
            StateId s = states.lookup(expectAt(line, 1, "a state"), "state");
            const Token& name = expectAt(line, 2, "an action name");
            if (!isName(name.text)) syntax(name, "expected an action name");
            expectEnd(line, 3);
            for (ActionId a = 0; a < actions.size(); ++a) {
                if (actions[a].owner == s && actions[a].name == name.text) {
                    fail(ParseError::Kind::Duplicate, name, "duplicate action '" + name.text + "' at state '" + line[1].text + "'");
                }
            }
            rows.push_back(IntervalRow{s, static_cast<ActionId>(actions.size()), {}});
            actions.push_back({name.text, s});
            actionAt.push_back(key);
        } else if (key.text == "to") {
            if (rows.empty()) syntax(key, "'to' outside an action block");
            StateId t = states.lookup(expectAt(line, 1, "a successor state"), "state");
            expectText(line, 2, "[");
            double lo = number(expectAt(line, 3, "a lower bound"));
            expectText(line, 4, ",");
            double hi = number(expectAt(line, 5, "an upper bound"));
            expectText(line, 6, "]");
            expectEnd(line, 7);
            auto& entries = rows.back().entries;
            for (const auto& e : entries) {
                if (e.target == t) fail(ParseError::Kind::Duplicate, line[1], "successor '" + line[1].text + "' listed twice");
            }
            entries.push_back({t, {lo, hi}});
        } else if (key.text == "rabin") {
            if (labelled) syntax(key, "labelled models carry no acceptance; use an automaton");
            acc.pairs.push_back(parsePair(line, 1, states));
        } else {
            syntax(key, "unknown keyword '" + key.text + "'");
        }
    }

    Token eof{"", lines.back()[0].line + 1, 1};
    if (!statesDecl.seen) syntax(eof, "missing 'states' declaration");
    if (!initDecl.seen) syntax(eof, "missing 'init' declaration");
    std::vector<char> hasAction(states.names.size(), 0);
    for (const auto& a : actions) hasAction[a.owner] = 1;
    for (StateId s = 0; s < states.names.size(); ++s) {
        if (!hasAction[s]) fail(ParseError::Kind::Totality, *statesDecl.seen, "state '" + states.names[s] + "' has no actions");
    }

    Bmdp model(Skeleton(states.names, initial, std::move(actions)), std::move(rows), std::move(acc));
    auto violations = validate_bmdp(model);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    if (!labelled) return model;

    LabelledBmdp result{std::move(model), std::move(alphabet), {}};
    for (StateId s = 0; s < label.size(); ++s) {
        if (!label[s]) fail(ParseError::Kind::Totality, *statesDecl.seen, "state '" + states.names[s] + "' has no label");
        result.label.push_back(*label[s]);
    }
    return result;
}

Dra parse_dra(std::string_view text) {
    auto lines = tokenize(text);
    if (lines.empty()) throw ParseError(ParseError::Kind::Syntax, 1, 1, "empty input, expected 'dra'");
    if (lines[0][0].text != "dra") syntax(lines[0][0], "expected 'dra', found '" + lines[0][0].text + "'");
    expectEnd(lines[0], 1);

    NameTable states;
    NameTable letters;
    Once statesDecl;
    Once alphabetDecl;
    Once initDecl;
    StateId initial = 0;
    std::vector<std::vector<std::optional<StateId>>> trans;
    RabinAcceptance acc;

    for (std::size_t li = 1; li < lines.size(); ++li) {
        const Line& line = lines[li];
        const Token& key = line[0];
        if (key.text == "alphabet") {
            alphabetDecl.mark(key, "alphabet");
            letters.declare(line, 1, "letter");
        } else if (key.text == "states") {
            statesDecl.mark(key, "states");
            states.declare(line, 1, "state");
        } else if (key.text == "init") {
            initDecl.mark(key, "init");
            initial = states.lookup(expectAt(line, 1, "a state"), "state");
            expectEnd(line, 2);
        } else if (key.text == "trans") {
            StateId from = states.lookup(expectAt(line, 1, "a state"), "state");
            StateId letter = letters.lookup(expectAt(line, 2, "a letter"), "letter");
            StateId to = states.lookup(expectAt(line, 3, "a state"), "state");
            expectEnd(line, 4);
            if (trans.empty()) trans.assign(states.names.size(), std::vector<std::optional<StateId>>(letters.names.size()));
            auto& slot = trans[from][letter];
            if (slot) {
                fail(ParseError::Kind::Duplicate, key, "duplicate transition for (" + line[1].text + ", " + line[2].text + ")");
            }
            slot = to;
        } else if (key.text == "rabin") {
            acc.pairs.push_back(parsePair(line, 1, states));
        } else {
            syntax(key, "unknown keyword '" + key.text + "'");
        }
    }

    Token eof{"", lines.back()[0].line + 1, 1};
    if (!alphabetDecl.seen) syntax(eof, "missing 'alphabet' declaration");
    if (!statesDecl.seen) syntax(eof, "missing 'states' declaration");
    if (!initDecl.seen) syntax(eof, "missing 'init' declaration");
    if (trans.empty()) trans.assign(states.names.size(), std::vector<std::optional<StateId>>(letters.names.size()));
    std::vector<std::vector<StateId>> table(states.names.size());
    for (StateId q = 0; q < states.names.size(); ++q) {
        for (std::size_t l = 0; l < letters.names.size(); ++l) {
            if (!trans[q][l]) {
                fail(ParseError::Kind::Totality, eof,
                     "missing transition for (" + states.names[q] + ", " + letters.names[l] + ")");
            }
            table[q].push_back(*trans[q][l]);
        }
    }
    for (const auto& pair : acc.pairs) {
        for (StateId s : pair.inf) {
            if (std::binary_search(pair.fin.begin(), pair.fin.end(), s)) {
                throw ValidationError({Violation{Violation::Kind::RabinOverlap, s, kNoAction, kNoState,
                                                 "automaton state '" + states.names[s] + "' is in both F and I of a pair"}});
            }
        }
    }
    return Dra(Alphabet{letters.names}, states.names, initial, std::move(table), std::move(acc));
}

// -----------------------------------------------------------------------------

std::string format_probability(double p) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p);
    return std::string(buf, ptr);
}

namespace {

std::string formatValue(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string stateSet(const Skeleton& skel, const std::vector<StateId>& set) {
    std::string out = "{";
    for (StateId s : set) out += " " + skel.stateName(s);
    return out + " }";
}

void writeSkeletonHead(std::ostringstream& out, const Skeleton& skel) {
    out << "states";
    for (const auto& name : skel.stateNames()) out << ' ' << name;
    out << "\ninit " << skel.stateName(skel.initial()) << '\n';
}

void writeRows(std::ostringstream& out, const Skeleton& skel, const std::vector<IntervalRow>& rows) {
    for (ActionId a = 0; a < skel.numActions(); ++a) {
        out << "action " << skel.stateName(skel.owner(a)) << ' ' << skel.actionName(a) << '\n';
        for (const auto& e : rows[a].entries) {
            out << "  to " << skel.stateName(e.target) << " [" << format_probability(e.bounds.lo) << ", "
                << format_probability(e.bounds.hi) << "]\n";
        }
    }
}

void writeAcceptance(std::ostringstream& out, const Skeleton& skel, const RabinAcceptance& acc) {
    for (const auto& pair : acc.pairs) out << "rabin " << stateSet(skel, pair.fin) << ' ' << stateSet(skel, pair.inf) << '\n';
}

}  // namespace

std::string serialize_model(const Bmdp& model) {
    std::ostringstream out;
    out << "bmdp\n";
    writeSkeletonHead(out, model.skeleton());
    writeRows(out, model.skeleton(), model.rows());
    writeAcceptance(out, model.skeleton(), model.acceptance());
    return out.str();
}

std::string serialize_model(const LabelledBmdp& labelled) {
    const auto& skel = labelled.model.skeleton();
    std::ostringstream out;
    out << "labelled-bmdp\n";
    writeSkeletonHead(out, skel);
    for (StateId s = 0; s < skel.numStates(); ++s) {
        out << "label " << skel.stateName(s) << ' ' << labelled.alphabet.letters.at(labelled.label.at(s)) << '\n';
    }
    writeRows(out, skel, labelled.model.rows());
    return out.str();
}

std::string serialize_mdp(const Mdp& mdp) { return serialize_model(as_point_bmdp(mdp)); }

std::string serialize_dra(const Dra& dra) {
    std::ostringstream out;
    out << "dra\nalphabet";
    for (const auto& l : dra.alphabet().letters) out << ' ' << l;
    out << "\nstates";
    for (const auto& q : dra.stateNames()) out << ' ' << q;
    out << "\ninit " << dra.stateName(dra.initial()) << '\n';
    for (StateId q = 0; q < dra.numStates(); ++q) {
        for (std::size_t l = 0; l < dra.alphabet().letters.size(); ++l) {
            out << "trans " << dra.stateName(q) << ' ' << dra.alphabet().letters[l] << ' ' << dra.stateName(dra.step(q, l)) << '\n';
        }
    }
    for (const auto& pair : dra.acceptance().pairs) {
        out << "rabin {";
        for (StateId q : pair.fin) out << ' ' << dra.stateName(q);
        out << " } {";
        for (StateId q : pair.inf) out << ' ' << dra.stateName(q);
        out << " }\n";
    }
    return out.str();
}

std::string serialize_game(const StochasticGame& game) {
    const auto& skel = game.mdp.skeleton();
    std::ostringstream out;
    out << "game\n";
    writeSkeletonHead(out, skel);
    out << "player2";
    for (StateId s = 0; s < skel.numStates(); ++s) {
        if (game.owner[s] == Player::Two) out << ' ' << skel.stateName(s);
    }
    out << '\n';
    writeRows(out, skel, point_rows(game.mdp));
    writeAcceptance(out, skel, game.mdp.acceptance());
    return out.str();
}

std::string serialize_controller(const Skeleton& skel, const PositionalPolicy& policy) {
    std::ostringstream out;
    for (StateId s = 0; s < policy.choice.size(); ++s) {
        if (policy.choice[s] == kNoAction) continue;
        out << skel.stateName(s) << ' ' << skel.actionName(policy.choice[s]) << '\n';
    }
    return out.str();
}

std::string serialize_nature(const Skeleton& skel, const NaturePolicy& nature) {
    std::ostringstream out;
    for (ActionId a = 0; a < nature.choice.size(); ++a) {
        out << skel.stateName(skel.owner(a)) << ' ' << skel.actionName(a) << " ->";
        for (const auto& [t, p] : nature.choice[a].entries) out << ' ' << skel.stateName(t) << ':' << format_probability(p);
        out << '\n';
    }
    return out.str();
}

// -----------------------------------------------------------------------------

std::string write_report(const CheckReport& report, const Skeleton& skel) {
    std::ostringstream out;
    out << "objective " << report.objective << '\n';
    out << "initial " << report.stateNames.at(report.initial) << '\n';
    for (const auto& [key, bound] : {std::pair{"lower", &report.lower}, std::pair{"upper", &report.upper}}) {
        if (!*bound) continue;
        const BoundReport& b = **bound;
        out << key << ".method " << b.method << '\n';
        out << key << ".iterations " << b.iterations << '\n';
        out << key << ".millis " << formatValue(b.millis) << '\n';
        for (StateId s = 0; s < b.values.size(); ++s) {
            out << key << ".value " << report.stateNames[s] << ' ' << formatValue(b.values[s]) << '\n';
        }
        for (StateId s = 0; s < b.controller.choice.size(); ++s) {
            if (b.controller.choice[s] == kNoAction) continue;
            out << key << ".controller " << report.stateNames[s] << ' ' << skel.actionName(b.controller.choice[s]) << '\n';
        }
        for (ActionId a = 0; a < b.nature.choice.size(); ++a) {
            out << key << ".nature " << skel.stateName(skel.owner(a)) << ' ' << skel.actionName(a) << " ->";
            for (const auto& [t, p] : b.nature.choice[a].entries) out << ' ' << skel.stateName(t) << ':' << format_probability(p);
            out << '\n';
        }
    }
    return out.str();
}

CheckReport read_report(std::string_view text, const Skeleton& skel) {
    CheckReport report;
    report.stateNames = skel.stateNames();
    auto state = [&](const Token& t) {
        auto s = skel.findState(t.text);
        if (!s) fail(ParseError::Kind::Reference, t, "unknown state '" + t.text + "'");
        return *s;
    };
    auto action = [&](StateId s, const Token& t) {
        auto a = skel.findAction(s, t.text);
        if (!a) fail(ParseError::Kind::Reference, t, "unknown action '" + t.text + "'");
        return *a;
    };
    auto bound = [&](const std::string& which) -> BoundReport& {
        auto& slot = which == "lower" ? report.lower : report.upper;
        if (!slot) {
            slot.emplace();
            slot->values.assign(skel.numStates(), 0.0);
        }
        return *slot;
    };

    for (const Line& line : tokenize(text)) {
        const Token& key = line[0];
        if (key.text == "objective") {
            // reach objectives contain commas, which the tokenizer splits off
            for (std::size_t k = 1; k < line.size(); ++k) report.objective += line[k].text;
            continue;
        }
        if (key.text == "initial") {
            report.initial = state(expectAt(line, 1, "a state"));
            continue;
        }
        auto dot = key.text.find('.');
        std::string which = key.text.substr(0, dot);
        std::string field = dot == std::string::npos ? "" : key.text.substr(dot + 1);
        if (which != "lower" && which != "upper") syntax(key, "unknown report key '" + key.text + "'");
        BoundReport& b = bound(which);
        if (field == "method") {
            b.method = expectAt(line, 1, "a method").text;
        } else if (field == "iterations") {
            b.iterations = static_cast<std::size_t>(number(expectAt(line, 1, "a count")));
        } else if (field == "millis") {
            b.millis = number(expectAt(line, 1, "a duration"));
        } else if (field == "value") {
            b.values[state(expectAt(line, 1, "a state"))] = number(expectAt(line, 2, "a value"));
        } else if (field == "controller") {
            StateId s = state(expectAt(line, 1, "a state"));
            if (b.controller.choice.empty()) b.controller.choice.assign(skel.numStates(), kNoAction);
            b.controller.choice[s] = action(s, expectAt(line, 2, "an action"));
        } else if (field == "nature") {
            StateId s = state(expectAt(line, 1, "a state"));
            ActionId a = action(s, expectAt(line, 2, "an action"));
            expectText(line, 3, "->");
            if (b.nature.choice.empty()) b.nature.choice.resize(skel.numActions());
            std::vector<std::pair<StateId, double>> entries;
            for (std::size_t k = 4; k < line.size(); ++k) {
                const auto& t = line[k];
                auto colon = t.text.rfind(':');
                if (colon == std::string::npos) syntax(t, "expected successor:probability");
                Token name{t.text.substr(0, colon), t.line, t.column};
                Token prob{t.text.substr(colon + 1), t.line, t.column + colon + 1};
                entries.emplace_back(state(name), number(prob));
            }
            b.nature.choice[a] = Distribution::fromEntries(std::move(entries));
        } else {
            syntax(key, "unknown report key '" + key.text + "'");
        }
    }
    return report;
}

std::string format_report_table(const CheckReport& report) {
    std::size_t width = 5;
    for (const auto& name : report.stateNames) width = std::max(width, name.size() + 2);
    width += 2;
    std::ostringstream out;
    out << "objective: " << report.objective << '\n';
    for (const auto& [key, bound] : {std::pair{"lower", &report.lower}, std::pair{"upper", &report.upper}}) {
        if (!*bound) continue;
        out << key << " bound: method " << (*bound)->method << ", " << (*bound)->iterations << " iterations, "
            << formatValue((*bound)->millis) << " ms\n";
    }
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(s.size(), w), ' ');
        return s;
    };
    out << pad("state", width);
    if (report.lower) out << pad("lower", 16);
    if (report.upper) out << pad("upper", 16);
    out << '\n';
    for (StateId s = 0; s < report.stateNames.size(); ++s) {
        out << pad(report.stateNames[s] + (s == report.initial ? " *" : ""), width);
        if (report.lower) out << pad(formatValue(report.lower->values[s]), 16);
        if (report.upper) out << pad(formatValue(report.upper->values[s]), 16);
        out << '\n';
    }
    return out.str();
}

}  // namespace bmdp
