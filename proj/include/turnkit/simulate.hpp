#pragma once

// Doctor-patient dialogue simulation.
//
// The doctor model sees only the case's doctor view (age, gender, chief
// complaint, symptom duration and location) plus the running history; the
// patient model sees the full patient view and the current question. Doctor
// output is recorded verbatim; format validation happens downstream.

#include <algorithm>
#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "turnkit/client.hpp"
#include "turnkit/corpus.hpp"
#include "turnkit/errors.hpp"
#include "turnkit/structured_parser.hpp"
#include "turnkit/unicode.hpp"
#include "turnkit/validator.hpp"

namespace turnkit::simulate {

using client::ChatMessage;
using client::Messages;
using client::Role;

// Default prompts. Both are plain templates and can be replaced from the
// simulation config; the patient one must keep the {patient_information} slot.
inline constexpr const char* kDoctorSystemPrompt =
    "Act as a clinician conducting a pre-consultation interview. Using the patient summary and the "
    "conversation so far, ask the single next question that best narrows down the diagnosis.\n"
    "\n"
    "Rules:\n"
    "- Write in Korean only.\n"
    "- Ask about something not yet covered; never repeat an earlier question.\n"
    "- Give between 2 and 5 answer options.\n"
    "- Never offer \"Other\" (기타) as an option.\n"
    "- Reply in YAML with exactly two keys, question and options (a list).\n"
    "- End the question with \"요?\".\n"
    "\n"
    "Reply shape:\n"
    "question: ...\n"
    "options:\n"
    "  - ...\n";

inline constexpr const char* kPatientSystemPrompt =
    "Play the patient described below and answer the clinician truthfully from this profile.\n"
    "\n"
    "{patient_information}\n"
    "\n"
    "Pick the option that fits you best and answer in one or two short sentences, in the language of the "
    "question. If nothing in the profile covers the question, say so plainly.\n"
    "\n"
    "Reply shape:\n"
    "Answer: ...\n";

enum class MalformedTurnPolicy { as_is, stop };

struct SimulationConfig {
    int max_turns = 12;
    std::string doctor_prompt = kDoctorSystemPrompt;
    std::string patient_prompt = kPatientSystemPrompt;
    std::string stop_marker;  ///< empty: run to max_turns
    MalformedTurnPolicy malformed_turn_policy = MalformedTurnPolicy::as_is;
    std::string language = "ko";
    validator::FormatRules rules;
    client::ModelClientSpec doctor;
    client::ModelClientSpec patient;

    void validate() const {
        if (max_turns < 1) throw ConfigError("max_turns must be >= 1");
        if (patient_prompt.find("{patient_information}") == std::string::npos)
            throw ConfigError("patient_prompt must contain {patient_information}");
        rules.validate();
    }
};

inline SimulationConfig simulation_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("simulation config must be an object");
    SimulationConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "max_turns") c.max_turns = v.get<int>();
            else if (key == "doctor_prompt") c.doctor_prompt = v.get<std::string>();
            else if (key == "patient_prompt") c.patient_prompt = v.get<std::string>();
            else if (key == "stop_marker") c.stop_marker = v.get<std::string>();
            else if (key == "language") c.language = v.get<std::string>();
            else if (key == "malformed_turn_policy") {
                const auto s = v.get<std::string>();
                if (s == "as_is") c.malformed_turn_policy = MalformedTurnPolicy::as_is;
                else if (s == "stop") c.malformed_turn_policy = MalformedTurnPolicy::stop;
                else throw ConfigError("malformed_turn_policy must be 'as_is' or 'stop'");
            } else if (key == "rules") c.rules = validator::rules_from_json(v);
            else if (key == "doctor") c.doctor = client::client_spec_from_json(v);
            else if (key == "patient") c.patient = client::client_spec_from_json(v);
            else throw ConfigError("unknown simulation field '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("simulation config: ") + e.what());
    }
    c.validate();
    return c;
}

inline std::string describe_doctor_view(const corpus::DoctorView& view) {
    std::string out;
    for (const auto& f : corpus::kDoctorViewFields) {
        const auto& v = view.*f.member;
        if (v.empty()) throw InvalidArgument(std::string("doctor view field '") + f.key + "' is missing");
        out += std::string(f.label) + ": " + v + "\n";
    }
    return out;
}

inline std::string describe_patient_view(const corpus::PatientView& view) {
    std::string out;
    for (const auto& f : corpus::kPatientViewFields) {
        const auto& v = view.*f.member;
        if (!v.empty()) out += std::string(f.label) + ": " + v + "\n";
    }
    if (out.empty()) throw InvalidArgument("patient profile is empty");
    if (out.back() == '\n') out.pop_back();
    return out;
}

/// System prompt, the doctor-view summary, then the alternating history:
/// 2 + 2k messages after k answered turns.
inline Messages render_doctor_prompt(const corpus::DoctorView& view, const std::vector<corpus::Turn>& history,
                                     const SimulationConfig& config = {}) {
    Messages out;
    out.push_back({Role::system, config.doctor_prompt});
    out.push_back({Role::user, "Patient information:\n" + describe_doctor_view(view) +
                                   "\nAsk the next pre-consultation question."});
    for (const auto& t : history) {
        out.push_back({Role::assistant, t.doctor_raw});
        const std::string answer = t.patient_answer && !t.patient_answer->empty() ? *t.patient_answer : "(no answer)";
        out.push_back({Role::user, answer});
    }
    return out;
}

/// Renders the question the patient sees: parsed question with numbered
/// options, or the raw text when it does not parse.
inline std::string render_question_for_patient(const std::string& doctor_raw, const validator::FormatRules& rules) {
    auto parsed = validator::parse_structured_response(doctor_raw, rules);
    const auto* p = std::get_if<corpus::ParsedResponse>(&parsed);
    if (!p) return doctor_raw;
    std::string out = "Question: " + p->question + "\nOptions:\n";
    for (size_t i = 0; i < p->options.size(); ++i) out += std::to_string(i + 1) + ". " + p->options[i] + "\n";
    return out;
}

inline Messages render_patient_prompt(const corpus::PatientView& view, const std::string& doctor_question,
                                      const SimulationConfig& config = {}) {
    std::string system = config.patient_prompt;
    const std::string placeholder = "{patient_information}";
    const auto pos = system.find(placeholder);
    if (pos == std::string::npos) throw ConfigError("patient prompt lacks {patient_information}");
    system.replace(pos, placeholder.size(), describe_patient_view(view));
    if (unicode::trim(doctor_question).empty()) throw InvalidArgument("doctor question is empty");
    return {{Role::system, system}, {Role::user, doctor_question}};
}

/// Strips a leading "Answer:" label from the patient's reply.
inline std::string extract_answer(const std::string& raw) {
    std::string_view s = unicode::trim(raw);
    constexpr std::string_view label = "answer:";
    if (s.size() >= label.size()) {
        std::string head(s.substr(0, label.size()));
        std::transform(head.begin(), head.end(), head.begin(), [](unsigned char c) { return std::tolower(c); });
        if (head == label) s = unicode::trim(s.substr(label.size()));
    }
    return s.empty() ? std::string(unicode::trim(raw)) : std::string(s);
}

struct Exchange {
    int turn = 1;
    std::string role;  ///< "doctor" or "patient"
    Messages request;
    std::optional<std::string> response;
    std::vector<client::AttemptRecord> attempts;
    double elapsed_ms = 0;
};

struct FailureMarker {
    int turn = 0;  ///< 0 when the case failed before the first turn
    std::string role;
    std::string message;
    int attempts = 0;
};

struct Transcript {
    std::string case_id;
    corpus::Dialogue dialogue;
    std::vector<Exchange> exchanges;
    std::optional<FailureMarker> failure;
    double elapsed_ms = 0;

    corpus::Dialogue to_dialogue() const { return dialogue; }
};

struct ClientPair {
    std::unique_ptr<client::ChatClient> doctor;
    std::unique_ptr<client::ChatClient> patient;
};

/// Produces fresh clients for one case.
using ClientFactory = std::function<ClientPair(const SimulationConfig&, const corpus::PatientCase&)>;

struct Runtime {
    client::Sleeper sleeper = client::real_sleeper();
    client::Clock clock = client::steady_clock_ms();
};

/// Zero-duration clock and no-op sleeper, for reproducible tests.
inline Runtime frozen_runtime() {
    return {[](std::chrono::milliseconds) {}, [] { return 0.0; }};
}

inline Transcript run_dialogue(const SimulationConfig& config, const corpus::PatientCase& c,
                               client::ChatClient& doctor, client::ChatClient& patient,
                               const Runtime& runtime = {}) {
    Transcript tr;
    tr.case_id = c.id;
    tr.dialogue.id = c.id;
    tr.dialogue.language = config.language;
    tr.dialogue.case_ref = c.id;
    if (!config.doctor.model.empty()) tr.dialogue.metadata["doctor_model"] = config.doctor.model;
    if (!config.patient.model.empty()) tr.dialogue.metadata["patient_model"] = config.patient.model;
    const double start = runtime.clock();

    auto mark_failure = [&](int turn, const std::string& role, const client::CallResult& r, std::string why) {
        tr.failure = FailureMarker{turn, role, why.empty() ? r.last_error() : std::move(why),
                                   static_cast<int>(r.attempts.size())};
        tr.dialogue.metadata["failure"] = role + " turn " + std::to_string(turn) + ": " + tr.failure->message;
    };

    for (int turn = 1; turn <= config.max_turns; ++turn) {
        Exchange dx;
        dx.turn = turn;
        dx.role = "doctor";
        dx.request = render_doctor_prompt(c.doctor_view, tr.dialogue.turns, config);
        const double t0 = runtime.clock();
        auto dr = client::call_with_retry(doctor, dx.request, config.doctor.retry, runtime.sleeper, runtime.clock);
        dx.elapsed_ms = runtime.clock() - t0;
        dx.response = dr.content;
        dx.attempts = dr.attempts;
        tr.exchanges.push_back(dx);
        if (!dr.ok()) {
            mark_failure(turn, "doctor", dr, {});
            break;
        }
        const std::string raw = *dr.content;
        if (!config.stop_marker.empty() && raw.find(config.stop_marker) != std::string::npos) break;
        if (unicode::trim(raw).empty()) {
            mark_failure(turn, "doctor", dr, "empty doctor response");
            break;
        }
        const bool parses = validator::parsed_ok(validator::parse_structured_response(raw, config.rules));
        auto& added = corpus::add_turn(tr.dialogue, raw);
        if (!parses && config.malformed_turn_policy == MalformedTurnPolicy::stop) break;

        Exchange px;
        px.turn = turn;
        px.role = "patient";
        px.request = render_patient_prompt(c.patient_view, render_question_for_patient(raw, config.rules), config);
        const double t1 = runtime.clock();
        auto pr = client::call_with_retry(patient, px.request, config.patient.retry, runtime.sleeper, runtime.clock);
        px.elapsed_ms = runtime.clock() - t1;
        px.response = pr.content;
        px.attempts = pr.attempts;
        tr.exchanges.push_back(px);
        if (!pr.ok()) {
            mark_failure(turn, "patient", pr, {});
            break;
        }
        added.patient_answer = extract_answer(*pr.content);
    }
    tr.elapsed_ms = runtime.clock() - start;
    return tr;
}

/// Runs every case, at most `parallelism` at a time. Output order follows
/// input order; a failing case yields a failure-marked transcript.
inline std::vector<Transcript> run_batch(const SimulationConfig& config, const std::vector<corpus::PatientCase>& cases,
                                         const ClientFactory& factory, int parallelism = 1,
                                         const Runtime& runtime = {}) {
    if (parallelism < 1) throw InvalidArgument("parallelism must be >= 1");
    std::vector<Transcript> out(cases.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= cases.size()) return;
            const auto& c = cases[i];
            try {
                auto clients = factory(config, c);
                out[i] = run_dialogue(config, c, *clients.doctor, *clients.patient, runtime);
            } catch (const std::exception& e) {
                Transcript tr;
                tr.case_id = c.id;
                tr.dialogue.id = c.id;
                tr.dialogue.language = config.language;
                tr.dialogue.case_ref = c.id;
                tr.failure = FailureMarker{0, "setup", e.what(), 0};
                tr.dialogue.metadata["failure"] = std::string("setup: ") + e.what();
                out[i] = std::move(tr);
            }
        }
    };
    const size_t threads = std::min<size_t>(static_cast<size_t>(parallelism), std::max<size_t>(cases.size(), 1));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline ordered_json to_json(const Exchange& e, bool include_timing) {
    ordered_json j;
    j["turn"] = e.turn;
    j["role"] = e.role;
    j["request"] = client::to_json(e.request);
    j["response"] = e.response ? ordered_json(*e.response) : ordered_json(nullptr);
    auto attempts = ordered_json::array();
    for (const auto& a : e.attempts) {
        ordered_json aj;
        aj["attempt"] = a.attempt;
        aj["ok"] = a.ok;
        aj["error"] = a.error;
        if (include_timing) aj["elapsed_ms"] = a.elapsed_ms;
        attempts.push_back(std::move(aj));
    }
    j["attempts"] = std::move(attempts);
    if (include_timing) j["elapsed_ms"] = e.elapsed_ms;
    return j;
}

/// Transcript line. Timing is left out unless requested so that reruns with
/// deterministic clients produce identical bytes.
inline ordered_json to_json(const Transcript& t, bool include_timing = false) {
    ordered_json j;
    j["case_id"] = t.case_id;
    j["dialogue"] = corpus::to_json(t.dialogue);
    auto ex = ordered_json::array();
    for (const auto& e : t.exchanges) ex.push_back(to_json(e, include_timing));
    j["exchanges"] = std::move(ex);
    if (t.failure) {
        ordered_json f;
        f["turn"] = t.failure->turn;
        f["role"] = t.failure->role;
        f["message"] = t.failure->message;
        f["attempts"] = t.failure->attempts;
        j["failure"] = std::move(f);
    } else {
        j["failure"] = nullptr;
    }
    if (include_timing) j["elapsed_ms"] = t.elapsed_ms;
    return j;
}

inline Transcript transcript_from_json(const json& j) {
    try {
        Transcript t;
        t.case_id = j.at("case_id").get<std::string>();
        t.dialogue = corpus::dialogue_from_json(j.at("dialogue"), true);
        for (const auto& ej : j.at("exchanges")) {
            Exchange e;
            e.turn = ej.at("turn").get<int>();
            e.role = ej.at("role").get<std::string>();
            e.request = client::messages_from_json(ej.at("request"));
            if (!ej.at("response").is_null()) e.response = ej.at("response").get<std::string>();
            for (const auto& aj : ej.at("attempts"))
                e.attempts.push_back({aj.at("attempt").get<int>(), aj.at("ok").get<bool>(),
                                      aj.at("error").get<std::string>(), aj.value("elapsed_ms", 0.0)});
            e.elapsed_ms = ej.value("elapsed_ms", 0.0);
            t.exchanges.push_back(std::move(e));
        }
        if (const auto& f = j.at("failure"); !f.is_null())
            t.failure = FailureMarker{f.at("turn").get<int>(), f.at("role").get<std::string>(),
                                      f.at("message").get<std::string>(), f.at("attempts").get<int>()};
        t.elapsed_ms = j.value("elapsed_ms", 0.0);
        return t;
    } catch (const json::exception& e) {
        throw SchemaError(0, "", std::string("malformed transcript: ") + e.what());
    }
}

/// One audit record per client exchange.
inline std::vector<ordered_json> audit_records(const Transcript& t) {
    std::vector<ordered_json> out;
    for (const auto& e : t.exchanges) {
        ordered_json j;
        j["case_id"] = t.case_id;
        j["dialogue_id"] = t.dialogue.id;
        auto body = to_json(e, true);
        for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
        out.push_back(std::move(j));
    }
    return out;
}

/// Reads dialogues from either a corpus file or a transcripts file (lines
/// carrying a "dialogue" object). Dialogues with a failure before the first
/// turn have no turns and are skipped.
inline std::vector<corpus::Dialogue> load_dialogues(const std::filesystem::path& path) {
    std::vector<corpus::Dialogue> out;
    size_t line_no = 0;
    for (const auto& line : jsonl::read_lines(path)) {
        ++line_no;
        if (unicode::trim(line).empty()) continue;
        try {
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                throw SchemaError(0, "", std::string("invalid JSON: ") + e.what());
            }
            if (j.is_object() && j.contains("dialogue")) {
                const auto& d = j["dialogue"];
                if (d.contains("turns") && d["turns"].is_array() && d["turns"].empty()) continue;
                out.push_back(corpus::dialogue_from_json(d));
            } else {
                out.push_back(corpus::dialogue_from_json(j));
            }
        } catch (const SchemaError& e) {
            throw e.at_line(line_no);
        }
    }
    return out;
}

}  // namespace turnkit::simulate
