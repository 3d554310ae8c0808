#pragma once

// Dialogue data model and the line-delimited JSON corpus/case formats.
//
// Corpus line (keys written in this order):
//   {"id": str, "language": str,
//    "turns": [{"index": int, "doctor_raw": str,
//               "doctor_parsed": {"question": str, "options": [str]},   (only when set)
//               "patient_answer": str | null}],
//    "case_ref": str | null, "metadata": {str: str}}
//
// Case line:
//   {"id": str, "doctor_view": {...}, "patient_view": {...}}
// with the field names listed in kDoctorViewFields / kPatientViewFields.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "turnkit/errors.hpp"
#include "turnkit/jsonl.hpp"

namespace turnkit::corpus {

struct ParsedResponse {
    std::string question;
    std::vector<std::string> options;

    friend bool operator==(const ParsedResponse&, const ParsedResponse&) = default;
};

struct Turn {
    int index = 1;
    std::string doctor_raw;
    std::optional<ParsedResponse> doctor_parsed;
    std::optional<std::string> patient_answer;

    friend bool operator==(const Turn&, const Turn&) = default;
};

struct Dialogue {
    std::string id;
    std::string language;
    std::vector<Turn> turns;
    std::optional<std::string> case_ref;
    std::map<std::string, std::string> metadata;

    friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

struct Corpus {
    std::vector<Dialogue> dialogues;
    std::string source;

    size_t size() const { return dialogues.size(); }
    bool empty() const { return dialogues.empty(); }

    friend bool operator==(const Corpus& a, const Corpus& b) { return a.dialogues == b.dialogues; }
};

using Histogram = std::map<int, size_t>;

inline int max_turn_count(const Dialogue& dialogue) {
    if (dialogue.turns.empty()) throw InvalidArgument("dialogue '" + dialogue.id + "' has no turns");
    return static_cast<int>(dialogue.turns.size());
}

inline Histogram turn_histogram(const Corpus& corpus) {
    Histogram h;
    for (const auto& d : corpus.dialogues) ++h[max_turn_count(d)];
    return h;
}

inline size_t histogram_total(const Histogram& h) {
    size_t n = 0;
    for (const auto& [_, count] : h) n += count;
    return n;
}

/// Appends a doctor turn with the next contiguous index.
inline Turn& add_turn(Dialogue& dialogue, std::string doctor_raw,
                      std::optional<std::string> patient_answer = std::nullopt) {
    Turn t;
    t.index = static_cast<int>(dialogue.turns.size()) + 1;
    t.doctor_raw = std::move(doctor_raw);
    t.patient_answer = std::move(patient_answer);
    dialogue.turns.push_back(std::move(t));
    return dialogue.turns.back();
}

// ---------------------------------------------------------------------------
// Serialization

inline ordered_json to_json(const ParsedResponse& p) {
    ordered_json j;
    j["question"] = p.question;
    j["options"] = p.options;
    return j;
}

inline ordered_json to_json(const Dialogue& d) {
    ordered_json j;
    j["id"] = d.id;
    j["language"] = d.language;
    auto turns = ordered_json::array();
    for (const auto& t : d.turns) {
        ordered_json tj;
        tj["index"] = t.index;
        tj["doctor_raw"] = t.doctor_raw;
        if (t.doctor_parsed) tj["doctor_parsed"] = to_json(*t.doctor_parsed);
        tj["patient_answer"] = t.patient_answer ? ordered_json(*t.patient_answer) : ordered_json(nullptr);
        turns.push_back(std::move(tj));
    }
    j["turns"] = std::move(turns);
    j["case_ref"] = d.case_ref ? ordered_json(*d.case_ref) : ordered_json(nullptr);
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : d.metadata) meta[k] = v;
    j["metadata"] = std::move(meta);
    return j;
}

namespace detail {

inline void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                                const std::string& path) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw SchemaError(0, path.empty() ? key : path + "." + key, "unexpected field");
    }
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(0, path.empty() ? key : path + "." + key, "missing required field");
    return *it;
}

inline std::string require_string(const json& obj, const std::string& key, const std::string& path) {
    const auto& v = require(obj, key, path);
    if (!v.is_string()) throw SchemaError(0, path.empty() ? key : path + "." + key, "expected string");
    return v.get<std::string>();
}

inline std::optional<std::string> optional_string(const json& obj, const std::string& key,
                                                  const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw SchemaError(0, path.empty() ? key : path + "." + key, "expected string or null");
    return it->get<std::string>();
}

}  // namespace detail

inline ParsedResponse parsed_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(0, path, "expected object");
    detail::reject_unknown_keys(j, {"question", "options"}, path);
    ParsedResponse p;
    p.question = detail::require_string(j, "question", path);
    const auto& opts = detail::require(j, "options", path);
    if (!opts.is_array()) throw SchemaError(0, path + ".options", "expected array");
    for (size_t i = 0; i < opts.size(); ++i) {
        if (!opts[i].is_string())
            throw SchemaError(0, path + ".options[" + std::to_string(i) + "]", "expected string");
        p.options.push_back(opts[i].get<std::string>());
    }
    return p;
}

/// Validates one corpus record and all Dialogue/Turn invariants. Corpus
/// records need at least one turn; transcripts of runs that failed before
/// the first turn pass allow_empty.
inline Dialogue dialogue_from_json(const json& j, bool allow_empty = false) {
    if (!j.is_object()) throw SchemaError(0, "", "record is not a JSON object");
    detail::reject_unknown_keys(j, {"id", "language", "turns", "case_ref", "metadata"}, "");
    Dialogue d;
    d.id = detail::require_string(j, "id", "");
    if (d.id.empty()) throw SchemaError(0, "id", "must be non-empty");
    d.language = detail::require_string(j, "language", "");
    const auto& turns = detail::require(j, "turns", "");
    if (!turns.is_array()) throw SchemaError(0, "turns", "expected array");
    if (turns.empty() && !allow_empty) throw SchemaError(0, "turns", "dialogue has no turns");
    for (size_t i = 0; i < turns.size(); ++i) {
        const std::string path = "turns[" + std::to_string(i) + "]";
        const auto& tj = turns[i];
        if (!tj.is_object()) throw SchemaError(0, path, "expected object");
        detail::reject_unknown_keys(tj, {"index", "doctor_raw", "doctor_parsed", "patient_answer"}, path);
        Turn t;
        const auto& idx = detail::require(tj, "index", path);
        if (!idx.is_number_integer()) throw SchemaError(0, path + ".index", "expected integer");
        t.index = idx.get<int>();
        if (t.index != static_cast<int>(i) + 1)
            throw SchemaError(0, path + ".index", "turn indices must be contiguous from 1");
        t.doctor_raw = detail::require_string(tj, "doctor_raw", path);
        if (t.doctor_raw.empty()) throw SchemaError(0, path + ".doctor_raw", "must be non-empty");
        if (auto it = tj.find("doctor_parsed"); it != tj.end() && !it->is_null())
            t.doctor_parsed = parsed_from_json(*it, path + ".doctor_parsed");
        t.patient_answer = detail::optional_string(tj, "patient_answer", path);
        d.turns.push_back(std::move(t));
    }
    d.case_ref = detail::optional_string(j, "case_ref", "");
    if (auto it = j.find("metadata"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw SchemaError(0, "metadata", "expected object");
        for (const auto& [k, v] : it->items()) {
            if (!v.is_string()) throw SchemaError(0, "metadata." + k, "expected string");
            d.metadata[k] = v.get<std::string>();
        }
    }
    return d;
}

inline std::string serialize_dialogue(const Dialogue& d) { return jsonl::dump(to_json(d)); }

struct LoadResult {
    Corpus corpus;
    size_t skipped = 0;  ///< malformed lines dropped in lenient mode
    std::vector<std::string> problems;
};

enum class LoadMode { strict, lenient };

/// Parses corpus text. Blank lines are ignored. In strict mode the first
/// malformed line throws a SchemaError carrying its line number.
inline LoadResult parse_corpus(std::string_view text, LoadMode mode, std::string source = {}) {
    LoadResult result;
    result.corpus.source = std::move(source);
    std::set<std::string> seen;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            if (nl == text.size()) break;
            continue;
        }
        try {
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                throw SchemaError(0, "", std::string("invalid JSON: ") + e.what());
            }
            Dialogue d = dialogue_from_json(j);
            if (!seen.insert(d.id).second) throw SchemaError(0, "id", "duplicate dialogue id '" + d.id + "'");
            result.corpus.dialogues.push_back(std::move(d));
        } catch (const SchemaError& e) {
            SchemaError positioned = e.at_line(line_no);
            if (mode == LoadMode::strict) throw positioned;
            ++result.skipped;
            result.problems.emplace_back(positioned.what());
        }
        if (nl == text.size()) break;
    }
    return result;
}

inline LoadResult load_corpus(const std::filesystem::path& path, LoadMode mode = LoadMode::strict) {
    return parse_corpus(jsonl::read_file(path), mode, path.string());
}

inline std::string serialize_corpus(const Corpus& corpus) {
    std::string out;
    for (const auto& d : corpus.dialogues) {
        out += serialize_dialogue(d);
        out += '\n';
    }
    return out;
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    jsonl::write_file(path, serialize_corpus(corpus));
}

// ---------------------------------------------------------------------------
// Patient cases

struct DoctorView {
    std::string age;
    std::string gender;
    std::string chief_complaint;
    std::string symptom_duration;
    std::string symptom_location;

    friend bool operator==(const DoctorView&, const DoctorView&) = default;
};

struct PatientView {
    std::string disease;
    std::string department;
    std::string typicality;
    std::string age;
    std::string gender;
    std::string height;
    std::string weight;
    std::string symptom_location;
    std::string symptom_quality;
    std::string symptom_severity;
    std::string symptom_duration;
    std::string timing;
    std::string context;
    std::string modifying_factors;
    std::string associated_symptoms;
    std::string pain_area;
    std::string past_history;
    std::string social_history;
    std::string additional_info;

    friend bool operator==(const PatientView&, const PatientView&) = default;
};

template <typename View>
struct FieldDef {
    const char* key;
    const char* label;
    std::string View::*member;
};

inline constexpr FieldDef<DoctorView> kDoctorViewFields[] = {
    {"age", "Age", &DoctorView::age},
    {"gender", "Gender", &DoctorView::gender},
    {"chief_complaint", "Chief Complaint", &DoctorView::chief_complaint},
    {"symptom_duration", "Symptom Duration", &DoctorView::symptom_duration},
    {"symptom_location", "Symptom Location", &DoctorView::symptom_location},
};

inline constexpr FieldDef<PatientView> kPatientViewFields[] = {
    {"disease", "Disease", &PatientView::disease},
    {"department", "Department", &PatientView::department},
    {"typicality", "Typicality", &PatientView::typicality},
    {"age", "Age", &PatientView::age},
    {"gender", "Gender", &PatientView::gender},
    {"height", "Height", &PatientView::height},
    {"weight", "Weight", &PatientView::weight},
    {"symptom_location", "Symptom Location", &PatientView::symptom_location},
    {"symptom_quality", "Symptom Quality", &PatientView::symptom_quality},
    {"symptom_severity", "Symptom Severity", &PatientView::symptom_severity},
    {"symptom_duration", "Symptom Duration", &PatientView::symptom_duration},
    {"timing", "Timing", &PatientView::timing},
    {"context", "Context", &PatientView::context},
    {"modifying_factors", "Modifying Factors", &PatientView::modifying_factors},
    {"associated_symptoms", "Associated Symptoms", &PatientView::associated_symptoms},
    {"pain_area", "Pain Area", &PatientView::pain_area},
    {"past_history", "Past History", &PatientView::past_history},
    {"social_history", "Social History", &PatientView::social_history},
    {"additional_info", "Additional Info", &PatientView::additional_info},
};

struct PatientCase {
    std::string id;
    DoctorView doctor_view;
    PatientView patient_view;

    friend bool operator==(const PatientCase&, const PatientCase&) = default;
};

template <typename View, size_t N>
size_t populated_fields(const View& view, const FieldDef<View> (&defs)[N]) {
    size_t n = 0;
    for (const auto& f : defs) n += !(view.*f.member).empty();
    return n;
}

inline size_t populated_fields(const DoctorView& v) { return populated_fields(v, kDoctorViewFields); }
inline size_t populated_fields(const PatientView& v) { return populated_fields(v, kPatientViewFields); }

/// Values present in the patient's view but in none of the doctor's fields.
inline std::vector<std::string> patient_only_values(const PatientCase& c) {
    std::set<std::string> doctor;
    for (const auto& f : kDoctorViewFields) doctor.insert(c.doctor_view.*f.member);
    std::vector<std::string> out;
    for (const auto& f : kPatientViewFields) {
        const auto& v = c.patient_view.*f.member;
        if (!v.empty() && !doctor.count(v)) out.push_back(v);
    }
    return out;
}

inline ordered_json to_json(const PatientCase& c) {
    ordered_json j;
    j["id"] = c.id;
    ordered_json dv;
    for (const auto& f : kDoctorViewFields) dv[f.key] = c.doctor_view.*f.member;
    j["doctor_view"] = std::move(dv);
    ordered_json pv;
    for (const auto& f : kPatientViewFields) pv[f.key] = c.patient_view.*f.member;
    j["patient_view"] = std::move(pv);
    return j;
}

namespace detail {

template <typename View, size_t N>
View view_from_json(const json& j, const FieldDef<View> (&defs)[N], const std::string& path) {
    if (!j.is_object()) throw SchemaError(0, path, "expected object");
    View view;
    for (const auto& [key, value] : j.items()) {
        const FieldDef<View>* def = nullptr;
        for (const auto& f : defs) {
            if (key == f.key) def = &f;
        }
        if (!def) throw SchemaError(0, path + "." + key, "unexpected field");
        if (value.is_null()) continue;
        if (!value.is_string()) throw SchemaError(0, path + "." + key, "expected string");
        view.*(def->member) = value.template get<std::string>();
    }
    return view;
}

}  // namespace detail

inline PatientCase case_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError(0, "", "record is not a JSON object");
    detail::reject_unknown_keys(j, {"id", "doctor_view", "patient_view"}, "");
    PatientCase c;
    c.id = detail::require_string(j, "id", "");
    if (c.id.empty()) throw SchemaError(0, "id", "must be non-empty");
    c.doctor_view = detail::view_from_json(detail::require(j, "doctor_view", ""), kDoctorViewFields, "doctor_view");
    c.patient_view =
        detail::view_from_json(detail::require(j, "patient_view", ""), kPatientViewFields, "patient_view");
    if (populated_fields(c.doctor_view) >= populated_fields(c.patient_view))
        throw SchemaError(0, "doctor_view", "doctor view must hold fewer populated fields than patient view");
    return c;
}

inline std::vector<PatientCase> parse_cases(std::string_view text) {
    std::vector<PatientCase> cases;
    std::set<std::string> seen;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                throw SchemaError(0, "", std::string("invalid JSON: ") + e.what());
            }
            auto c = case_from_json(j);
            if (!seen.insert(c.id).second) throw SchemaError(0, "id", "duplicate case id '" + c.id + "'");
            cases.push_back(std::move(c));
        } catch (const SchemaError& e) {
            throw e.at_line(line_no);
        }
    }
    return cases;
}

inline std::vector<PatientCase> load_cases(const std::filesystem::path& path) {
    return parse_cases(jsonl::read_file(path));
}

inline void save_cases(const std::vector<PatientCase>& cases, const std::filesystem::path& path) {
    std::string out;
    for (const auto& c : cases) out += jsonl::dump(to_json(c)) + "\n";
    jsonl::write_file(path, out);
}

}  // namespace turnkit::corpus
