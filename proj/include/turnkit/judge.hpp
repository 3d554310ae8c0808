#pragma once

// Task-constraint (clinical utility) judging through a chat model.
//
// The judge sees the whole conversation before the judged turn and must answer
// with two lines:
//
//   verdict: pass|fail
//   rationale: <one or more sentences>
//
// Anything without exactly one well-formed verdict line is a JudgeParseError.

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "turnkit/client.hpp"
#include "turnkit/corpus.hpp"
#include "turnkit/errors.hpp"
#include "turnkit/ratio.hpp"
#include "turnkit/unicode.hpp"
#include "turnkit/validator.hpp"

namespace turnkit::judge {

using client::Messages;
using client::Role;

// Default rubric; override with "rubric" in the judge config.
inline constexpr const char* kDefaultRubric =
    "You review questions asked by a clinician during a pre-consultation interview.\n"
    "\n"
    "Criterion: clinical_utility\n"
    "Does the question draw out new clinical information that helps reach a diagnosis?\n"
    "\n"
    "Mark the question as fail if any of the following holds:\n"
    "- it asks for information the patient has already given, or that can be inferred from earlier turns;\n"
    "- it repeats or rephrases an earlier question;\n"
    "- it is not relevant to the differential diagnosis of the presented complaint.\n"
    "Otherwise mark it as pass. Judge only clinical utility, not formatting or language.\n"
    "\n"
    "Respond with exactly two lines:\n"
    "verdict: pass or fail\n"
    "rationale: a brief justification\n";

enum class Verdict { pass, fail };

inline const char* to_string(Verdict v) { return v == Verdict::pass ? "pass" : "fail"; }

struct TurnJudgement {
    int turn = 1;
    Verdict clinical_utility = Verdict::fail;
    std::string rationale;
    std::string raw;

    friend bool operator==(const TurnJudgement&, const TurnJudgement&) = default;
};

class JudgeParseError : public Error {
public:
    JudgeParseError(const std::string& message, std::string raw)
        : Error("judge_parse", message), raw_(std::move(raw)) {}

    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

struct ParsedVerdict {
    Verdict verdict;
    std::string rationale;
};

namespace detail {

inline std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// If `line` is "<label>: rest" (label case-insensitive), returns rest.
inline std::optional<std::string_view> labelled(std::string_view line, std::string_view label) {
    line = unicode::trim(line);
    if (line.size() <= label.size() || lower_ascii(line.substr(0, label.size())) != label) return std::nullopt;
    auto rest = unicode::trim(line.substr(label.size()));
    if (rest.empty() || rest.front() != ':') return std::nullopt;
    return unicode::trim(rest.substr(1));
}

}  // namespace detail

inline ParsedVerdict parse_judge_output(const std::string& raw) {
    std::optional<Verdict> verdict;
    std::string rationale;
    bool in_rationale = false;
    size_t pos = 0;
    while (pos <= raw.size()) {
        auto nl = raw.find('\n', pos);
        if (nl == std::string::npos) nl = raw.size();
        std::string_view line(raw.data() + pos, nl - pos);
        pos = nl + 1;
        if (auto v = detail::labelled(line, "verdict")) {
            const auto word = detail::lower_ascii(*v);
            Verdict parsed;
            if (word == "pass") parsed = Verdict::pass;
            else if (word == "fail") parsed = Verdict::fail;
            else throw JudgeParseError("verdict must be 'pass' or 'fail', got '" + std::string(*v) + "'", raw);
            if (verdict) throw JudgeParseError("more than one verdict line", raw);
            verdict = parsed;
            in_rationale = false;
        } else if (auto r = detail::labelled(line, "rationale")) {
            rationale = std::string(*r);
            in_rationale = true;
        } else if (in_rationale && !unicode::trim(line).empty()) {
            rationale += " " + std::string(unicode::trim(line));
        }
        if (nl == raw.size()) break;
    }
    if (!verdict) throw JudgeParseError("no 'verdict:' line in judge output", raw);
    return {*verdict, rationale};
}

inline std::string render_turn_for_judge(const corpus::Turn& t, const validator::FormatRules& rules) {
    auto parsed = validator::parse_structured_response(t.doctor_raw, rules);
    if (const auto* p = std::get_if<corpus::ParsedResponse>(&parsed)) {
        std::string out = "question: " + p->question + "\noptions:\n";
        for (const auto& o : p->options) out += "  - " + o + "\n";
        return out;
    }
    return t.doctor_raw + "\n";
}

/// Rubric as system message; the user message carries every turn before the
/// judged one followed by the judged question.
inline Messages render_judge_prompt(const std::vector<corpus::Turn>& prefix, const corpus::Turn& judged,
                                    const std::string& rubric, const validator::FormatRules& rules) {
    std::string user = "Previous conversation:\n";
    if (prefix.empty()) user += "(none)\n";
    for (const auto& t : prefix) {
        user += "[Turn " + std::to_string(t.index) + "] Doctor:\n" + render_turn_for_judge(t, rules);
        user += "[Turn " + std::to_string(t.index) + "] Patient: " + (t.patient_answer ? *t.patient_answer : "(no answer)") + "\n";
    }
    user += "\nQuestion to evaluate (turn " + std::to_string(judged.index) + "):\n" + render_turn_for_judge(judged, rules);
    return {{Role::system, rubric}, {Role::user, user}};
}

struct JudgeConfig {
    std::string rubric = kDefaultRubric;
    validator::FormatRules rules;
    client::ModelClientSpec judge;
};

inline JudgeConfig judge_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("judge config must be an object");
    JudgeConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "rubric") c.rubric = v.get<std::string>();
            else if (key == "rules") c.rules = validator::rules_from_json(v);
            else if (key == "judge") c.judge = client::client_spec_from_json(v);
            else throw ConfigError("unknown judge config field '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("judge config: ") + e.what());
    }
    if (unicode::trim(c.rubric).empty()) throw ConfigError("rubric is empty");
    return c;
}

/// Judges `judged` given every turn before it. Throws ClientError when the
/// client fails after retries and JudgeParseError for malformed output.
inline TurnJudgement judge_turn(const std::vector<corpus::Turn>& prefix, const corpus::Turn& judged,
                                client::ChatClient& judge_client, const JudgeConfig& config = {},
                                const client::Sleeper& sleep = client::real_sleeper()) {
    const auto messages = render_judge_prompt(prefix, judged, config.rubric, config.rules);
    auto result = client::call_with_retry(judge_client, messages, config.judge.retry, sleep);
    if (!result.ok()) throw ClientError("judge failed after " + std::to_string(result.attempts.size()) +
                                        " attempts: " + result.last_error());
    const auto parsed = parse_judge_output(*result.content);
    return {judged.index, parsed.verdict, parsed.rationale, *result.content};
}

/// Judges turn `turn_index` (1-based) of `dialogue`.
inline TurnJudgement judge_turn(const corpus::Dialogue& dialogue, int turn_index, client::ChatClient& judge_client,
                                const JudgeConfig& config = {},
                                const client::Sleeper& sleep = client::real_sleeper()) {
    if (turn_index < 1 || turn_index > static_cast<int>(dialogue.turns.size()))
        throw InvalidArgument("turn " + std::to_string(turn_index) + " is outside the dialogue");
    const std::vector<corpus::Turn> prefix(dialogue.turns.begin(), dialogue.turns.begin() + (turn_index - 1));
    return judge_turn(prefix, dialogue.turns[static_cast<size_t>(turn_index - 1)], judge_client, config, sleep);
}

inline Ratio compute_tcsr(const std::vector<TurnJudgement>& judgements) {
    if (judgements.empty()) throw InvalidArgument("TCSR over zero turns is undefined");
    uint64_t pass = 0;
    for (const auto& j : judgements) pass += j.clinical_utility == Verdict::pass;
    return Ratio(pass, judgements.size());
}

// ---------------------------------------------------------------------------
// judgements.jsonl records

struct DialogueJudgement {
    std::string dialogue_id;
    TurnJudgement judgement;
};

inline ordered_json to_json(const DialogueJudgement& dj) {
    ordered_json j;
    j["dialogue_id"] = dj.dialogue_id;
    j["turn"] = dj.judgement.turn;
    j["clinical_utility"] = to_string(dj.judgement.clinical_utility);
    j["rationale"] = dj.judgement.rationale;
    j["raw"] = dj.judgement.raw;
    return j;
}

inline DialogueJudgement judgement_from_json(const json& j) {
    try {
        DialogueJudgement dj;
        dj.dialogue_id = j.at("dialogue_id").get<std::string>();
        dj.judgement.turn = j.at("turn").get<int>();
        const auto v = j.at("clinical_utility").get<std::string>();
        if (v == "pass") dj.judgement.clinical_utility = Verdict::pass;
        else if (v == "fail") dj.judgement.clinical_utility = Verdict::fail;
        else throw SchemaError(0, "clinical_utility", "expected pass or fail");
        dj.judgement.rationale = j.value("rationale", std::string());
        dj.judgement.raw = j.value("raw", std::string());
        return dj;
    } catch (const json::exception& e) {
        throw SchemaError(0, "", std::string("malformed judgement: ") + e.what());
    }
}

inline std::vector<DialogueJudgement> load_judgements(const std::filesystem::path& path) {
    std::vector<DialogueJudgement> out;
    size_t line_no = 0;
    for (const auto& line : jsonl::read_lines(path)) {
        ++line_no;
        if (unicode::trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            if (j.contains("error")) throw SchemaError(0, "error", "judgement record carries an error");
            out.push_back(judgement_from_json(j));
        } catch (const json::parse_error& e) {
            throw SchemaError(line_no, "", std::string("invalid JSON: ") + e.what());
        } catch (const SchemaError& e) {
            throw e.at_line(line_no);
        }
    }
    return out;
}

}  // namespace turnkit::judge
