#pragma once

// Format-constraint validation of generated doctor turns.
//
// Five constraints are checked per turn: response_format (the strict
// structured parse), response_language, forbidden_words, number_options and
// sentence_startend. The last four need a parsed response; when parsing
// fails they are reported as not_evaluable. FCSR is the fraction of turns
// passing all five.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "turnkit/corpus.hpp"
#include "turnkit/errors.hpp"
#include "turnkit/jsonl.hpp"
#include "turnkit/ratio.hpp"
#include "turnkit/structured_parser.hpp"
#include "turnkit/unicode.hpp"

namespace turnkit::validator {

struct FormatRules {
    std::string question_key = "question";
    std::string options_key = "options";
    bool key_match_case_insensitive = true;
    std::vector<std::string> designated_scripts = {"Hangul"};
    double language_threshold = 0.5;
    std::vector<std::string> forbidden_terms = {"기타"};
    int min_options = 2;
    int max_options = 5;
    std::string required_question_suffix = "요?";

    /// Korean service defaults.
    static FormatRules korean() { return {}; }

    /// English-only service: ASCII letters only, "Other" forbidden, questions
    /// end with "?".
    static FormatRules english() {
        FormatRules r;
        r.designated_scripts = {"BasicLatin"};
        r.language_threshold = 1.0;
        r.forbidden_terms = {"Other"};
        r.required_question_suffix = "?";
        return r;
    }

    KeyNames keys() const { return {question_key, options_key, key_match_case_insensitive}; }

    void validate() const {
        if (question_key.empty() || options_key.empty()) throw ConfigError("rule keys must be non-empty");
        if (min_options < 1 || min_options > max_options)
            throw ConfigError("rules need 1 <= min_options <= max_options");
        if (!(language_threshold >= 0.0 && language_threshold <= 1.0))
            throw ConfigError("language_threshold must lie in [0,1]");
        if (designated_scripts.empty()) throw ConfigError("designated_scripts must not be empty");
        for (const auto& s : designated_scripts) {
            if (!unicode::ScriptSet::known(s)) throw ConfigError("unknown script '" + s + "'");
        }
    }
};

inline ordered_json to_json(const FormatRules& r) {
    ordered_json j;
    j["question_key"] = r.question_key;
    j["options_key"] = r.options_key;
    j["key_match_case_insensitive"] = r.key_match_case_insensitive;
    j["designated_scripts"] = r.designated_scripts;
    j["language_threshold"] = r.language_threshold;
    j["forbidden_terms"] = r.forbidden_terms;
    j["min_options"] = r.min_options;
    j["max_options"] = r.max_options;
    j["required_question_suffix"] = r.required_question_suffix;
    return j;
}

/// Missing fields keep their FormatRules defaults; unknown fields are errors.
inline FormatRules rules_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("rules must be a JSON object");
    FormatRules r;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "question_key") r.question_key = value.get<std::string>();
            else if (key == "options_key") r.options_key = value.get<std::string>();
            else if (key == "key_match_case_insensitive") r.key_match_case_insensitive = value.get<bool>();
            else if (key == "designated_scripts") r.designated_scripts = value.get<std::vector<std::string>>();
            else if (key == "language_threshold") r.language_threshold = value.get<double>();
            else if (key == "forbidden_terms") r.forbidden_terms = value.get<std::vector<std::string>>();
            else if (key == "min_options") r.min_options = value.get<int>();
            else if (key == "max_options") r.max_options = value.get<int>();
            else if (key == "required_question_suffix") r.required_question_suffix = value.get<std::string>();
            else throw ConfigError("unknown rules field '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("rules: ") + e.what());
    }
    r.validate();
    return r;
}

enum class Status { pass, fail, not_evaluable };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::pass: return "pass";
        case Status::fail: return "fail";
        case Status::not_evaluable: return "not_evaluable";
    }
    return "unknown";
}

enum class Constraint { response_format, response_language, forbidden_words, number_options, sentence_startend };

inline constexpr std::array<Constraint, 5> kConstraints = {
    Constraint::response_format, Constraint::response_language, Constraint::forbidden_words,
    Constraint::number_options, Constraint::sentence_startend};

inline const char* to_string(Constraint c) {
    switch (c) {
        case Constraint::response_format: return "response_format";
        case Constraint::response_language: return "response_language";
        case Constraint::forbidden_words: return "forbidden_words";
        case Constraint::number_options: return "number_options";
        case Constraint::sentence_startend: return "sentence_startend";
    }
    return "unknown";
}

struct CheckResult {
    Status status = Status::not_evaluable;
    std::string detail;

    static CheckResult pass() { return {Status::pass, {}}; }
    static CheckResult fail(std::string why) { return {Status::fail, std::move(why)}; }

    bool passed() const { return status == Status::pass; }
    friend bool operator==(const CheckResult&, const CheckResult&) = default;
};

struct ConstraintOutcome {
    std::array<CheckResult, 5> results;

    CheckResult& operator[](Constraint c) { return results[static_cast<size_t>(c)]; }
    const CheckResult& operator[](Constraint c) const { return results[static_cast<size_t>(c)]; }

    friend bool operator==(const ConstraintOutcome&, const ConstraintOutcome&) = default;
};

struct TurnVerdict {
    int turn = 1;
    ConstraintOutcome outcome;
    bool overall = false;
    std::optional<ParsedResponse> parsed;

    friend bool operator==(const TurnVerdict&, const TurnVerdict&) = default;
};

inline ParseResult parse_structured_response(std::string_view raw, const FormatRules& rules) {
    return parse_structured_response(raw, rules.keys());
}

struct LetterCounts {
    size_t letters = 0;
    size_t designated = 0;
};

/// Letters in question + options, and how many belong to the designated scripts.
inline LetterCounts count_letters(const ParsedResponse& parsed, const FormatRules& rules) {
    const unicode::ScriptSet scripts(rules.designated_scripts);
    LetterCounts counts;
    auto scan = [&](std::string_view text) {
        for (char32_t c : unicode::decode(text)) {
            if (!unicode::is_letter(c)) continue;
            ++counts.letters;
            counts.designated += scripts.contains(c);
        }
    };
    scan(parsed.question);
    for (const auto& o : parsed.options) scan(o);
    return counts;
}

inline CheckResult check_response_language(const ParsedResponse& parsed, const FormatRules& rules) {
    const auto counts = count_letters(parsed, rules);
    if (counts.letters == 0) return CheckResult::fail("no letters");
    // designated/letters >= threshold, compared without dividing
    if (static_cast<double>(counts.designated) >= rules.language_threshold * static_cast<double>(counts.letters))
        return CheckResult::pass();
    return CheckResult::fail(std::to_string(counts.designated) + " of " + std::to_string(counts.letters) +
                             " letters in designated script");
}

inline CheckResult check_forbidden_words(const ParsedResponse& parsed, const FormatRules& rules) {
    const std::string question = unicode::fold(parsed.question);
    std::vector<std::string> options;
    for (const auto& o : parsed.options) options.push_back(unicode::fold(unicode::trim_unicode(o)));
    for (const auto& raw_term : rules.forbidden_terms) {
        const std::string term = unicode::fold(unicode::trim_unicode(raw_term));
        if (term.empty()) continue;
        for (size_t i = 0; i < options.size(); ++i) {
            if (options[i] == term) return CheckResult::fail("option " + std::to_string(i + 1) + " is forbidden term '" + raw_term + "'");
        }
        if (question.find(term) != std::string::npos)
            return CheckResult::fail("question contains forbidden term '" + raw_term + "'");
        for (size_t i = 0; i < options.size(); ++i) {
            if (options[i].find(term) != std::string::npos)
                return CheckResult::fail("option " + std::to_string(i + 1) + " contains forbidden term '" + raw_term + "'");
        }
    }
    return CheckResult::pass();
}

inline CheckResult check_number_options(const ParsedResponse& parsed, const FormatRules& rules) {
    const auto n = static_cast<long>(parsed.options.size());
    if (n >= rules.min_options && n <= rules.max_options) return CheckResult::pass();
    return CheckResult::fail(std::to_string(n) + " options, expected " + std::to_string(rules.min_options) + " to " +
                             std::to_string(rules.max_options));
}

inline CheckResult check_sentence_startend(const ParsedResponse& parsed, const FormatRules& rules) {
    const auto& suffix = rules.required_question_suffix;
    if (suffix.empty()) return CheckResult::pass();
    const std::string q = unicode::trim_unicode(parsed.question);
    if (q.size() >= suffix.size() && q.compare(q.size() - suffix.size(), suffix.size(), suffix) == 0)
        return CheckResult::pass();
    return CheckResult::fail("question does not end with '" + suffix + "'");
}

inline TurnVerdict evaluate_turn(std::string_view raw, const FormatRules& rules, int turn = 1) {
    TurnVerdict v;
    v.turn = turn;
    auto parsed = parse_structured_response(raw, rules);
    if (auto* failure = std::get_if<ParseFailure>(&parsed)) {
        v.outcome[Constraint::response_format] = CheckResult::fail(failure->describe());
        for (size_t i = 1; i < kConstraints.size(); ++i)
            v.outcome.results[i] = {Status::not_evaluable, "response_format failed"};
        v.overall = false;
        return v;
    }
    const auto& p = std::get<ParsedResponse>(parsed);
    v.outcome[Constraint::response_format] = CheckResult::pass();
    v.outcome[Constraint::response_language] = check_response_language(p, rules);
    v.outcome[Constraint::forbidden_words] = check_forbidden_words(p, rules);
    v.outcome[Constraint::number_options] = check_number_options(p, rules);
    v.outcome[Constraint::sentence_startend] = check_sentence_startend(p, rules);
    v.overall = true;
    for (const auto& r : v.outcome.results) v.overall = v.overall && r.passed();
    v.parsed = p;
    return v;
}

inline std::vector<TurnVerdict> evaluate_dialogue(const corpus::Dialogue& d, const FormatRules& rules) {
    std::vector<TurnVerdict> out;
    out.reserve(d.turns.size());
    for (const auto& t : d.turns) out.push_back(evaluate_turn(t.doctor_raw, rules, t.index));
    return out;
}

inline Ratio compute_fcsr(const std::vector<TurnVerdict>& verdicts) {
    if (verdicts.empty()) throw InvalidArgument("FCSR over zero turns is undefined");
    uint64_t pass = 0;
    for (const auto& v : verdicts) pass += v.overall;
    return Ratio(pass, verdicts.size());
}

// ---------------------------------------------------------------------------
// verdicts.jsonl records

struct DialogueVerdict {
    std::string dialogue_id;
    TurnVerdict verdict;
};

inline ordered_json to_json(const DialogueVerdict& dv) {
    ordered_json j;
    j["dialogue_id"] = dv.dialogue_id;
    j["turn"] = dv.verdict.turn;
    j["overall"] = dv.verdict.overall ? "pass" : "fail";
    ordered_json c;
    for (auto k : kConstraints) {
        ordered_json r;
        r["status"] = to_string(dv.verdict.outcome[k].status);
        r["detail"] = dv.verdict.outcome[k].detail;
        c[to_string(k)] = std::move(r);
    }
    j["constraints"] = std::move(c);
    return j;
}

inline Status status_from_string(const std::string& s) {
    if (s == "pass") return Status::pass;
    if (s == "fail") return Status::fail;
    if (s == "not_evaluable") return Status::not_evaluable;
    throw SchemaError(0, "status", "unknown status '" + s + "'");
}

inline DialogueVerdict verdict_from_json(const json& j) {
    try {
        DialogueVerdict dv;
        dv.dialogue_id = j.at("dialogue_id").get<std::string>();
        dv.verdict.turn = j.at("turn").get<int>();
        const auto overall = j.at("overall").get<std::string>();
        if (overall != "pass" && overall != "fail") throw SchemaError(0, "overall", "expected pass or fail");
        dv.verdict.overall = overall == "pass";
        const auto& c = j.at("constraints");
        for (auto k : kConstraints) {
            const auto& r = c.at(to_string(k));
            dv.verdict.outcome[k] = {status_from_string(r.at("status").get<std::string>()),
                                     r.value("detail", std::string())};
        }
        return dv;
    } catch (const json::exception& e) {
        throw SchemaError(0, "", std::string("malformed verdict: ") + e.what());
    }
}

inline std::vector<DialogueVerdict> load_verdicts(const std::filesystem::path& path) {
    std::vector<DialogueVerdict> out;
    size_t line_no = 0;
    for (const auto& line : jsonl::read_lines(path)) {
        ++line_no;
        if (unicode::trim(line).empty()) continue;
        try {
            out.push_back(verdict_from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw SchemaError(line_no, "", std::string("invalid JSON: ") + e.what());
        } catch (const SchemaError& e) {
            throw e.at_line(line_no);
        }
    }
    return out;
}

}  // namespace turnkit::validator
