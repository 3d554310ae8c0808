#pragma once

// Shared test data and builders.

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "turnkit/corpus.hpp"
#include "turnkit/judge.hpp"
#include "turnkit/random.hpp"
#include "turnkit/validator.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using turnkit::corpus::Corpus;
using turnkit::corpus::Dialogue;
using turnkit::corpus::Histogram;

// Real-world turn-count distribution used throughout the rebalance tests.
inline const Histogram kReferenceHistogram = {{4, 1835}, {5, 1890}, {6, 1825}, {7, 820}, {8, 705},
                                  {9, 395},  {10, 260}, {11, 165}, {12, 111}};

inline std::string yaml_turn(const std::string& question, const std::vector<std::string>& options) {
    std::string out = "question: \"" + question + "\"\noptions:\n";
    for (const auto& o : options) out += "  - \"" + o + "\"\n";
    return out;
}

inline Dialogue make_dialogue(const std::string& id, int turns, const std::string& language = "ko") {
    Dialogue d;
    d.id = id;
    d.language = language;
    for (int t = 1; t <= turns; ++t) {
        auto& turn = turnkit::corpus::add_turn(
            d, yaml_turn("질문 " + std::to_string(t) + " 어디가 아픈가요?", {"머리", "배", "가슴"}));
        if (t < turns || t % 2 == 0) turn.patient_answer = "답변 " + std::to_string(t);
    }
    d.metadata["source"] = "synthetic";
    return d;
}

/// Dialogues for every histogram bin, interleaved across bins so that file
/// order does not coincide with bin order.
inline Corpus corpus_from_histogram(const Histogram& h, const std::string& prefix = "d") {
    Corpus c;
    c.source = "synthetic";
    std::map<int, size_t> left(h.begin(), h.end());
    size_t serial = 0;
    bool any = true;
    while (any) {
        any = false;
        for (auto& [turns, n] : left) {
            if (n == 0) continue;
            --n;
            any = true;
            char buf[32];
            std::snprintf(buf, sizeof buf, "%s%05zu", prefix.c_str(), serial++);
            c.dialogues.push_back(make_dialogue(buf, turns));
        }
    }
    return c;
}

/// Self-deleting temporary directory.
class TempDir {
public:
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "turnkit-XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

// Format-constraint golden examples: five satisfying, five violating.
struct GoldenExample {
    const char* name;
    const char* raw;
    bool korean;  ///< evaluate under the Korean preset, else the English one
    turnkit::validator::Constraint constraint;
    bool satisfies;
};

inline const std::vector<GoldenExample>& golden_examples() {
    using C = turnkit::validator::Constraint;
    static const std::vector<GoldenExample> examples = {
        {"format_ok",
         "question: \"Where is the pain located?\"\noptions:\n  - \"Entire head\"\n  - \"Forehead\"\n"
         "  - \"Back of the neck\"\n  - \"Temples\"\n",
         false, C::response_format, true},
        {"format_bad",
         "Where is the pain? The options are 1. Entire head,\n2. Forehead, 3. Back of the neck, 4. Temples.\n",
         false, C::response_format, false},
        {"language_ok",
         "question: \"When did the symptoms start?\"\noptions:\n  - \"Today\"\n  - \"Yesterday\"\n"
         "  - \"A few days ago\"\n  - \"More than a week ago\"\n",
         false, C::response_language, true},
        {"language_bad",
         "question: \"Quand les symptômes ont-ils commencé ?\"\noptions:\n  - \"Aujourd'hui\"\n  - \"Hier\"\n",
         false, C::response_language, false},
        {"forbidden_ok",
         "question: \"What type of painkiller did you take?\"\noptions:\n  - \"Ibuprofen\"\n"
         "  - \"Acetaminophen\"\n  - \"Aspirin\"\n  - \"None\"\n",
         false, C::forbidden_words, true},
        {"forbidden_bad",
         "question: \"What type of painkiller did you take?\"\noptions:\n  - \"Ibuprofen\"\n"
         "  - \"Acetaminophen\"\n  - \"Other\"\n  - \"None\"\n",
         false, C::forbidden_words, false},
        {"count_ok",
         "question: \"What is the nature of the pain?\"\noptions:\n  - \"Throbbing\"\n  - \"Stabbing\"\n"
         "  - \"Squeezing\"\n",
         false, C::number_options, true},
        {"count_bad",
         "question: \"Where is the pain located?\"\noptions:\n  - \"Forehead\"\n  - \"Temples\"\n"
         "  - \"Back of the head\"\n  - \"Neck\"\n  - \"Jaw\"\n  - \"Behind the eyes\"\n  - \"Left side\"\n"
         "  - \"Right side\"\n",
         false, C::number_options, false},
        {"suffix_ok",
         "question: \"통증이 가장 심한 시간대가 언제인가요?\"\noptions:\n  - \"아침\"\n  - \"오후\"\n  - \"밤\"\n"
         "  - \"특정 시간 없음\"\n",
         true, C::sentence_startend, true},
        {"suffix_bad",
         "question: \"통증이 가장 심한 시간대?\"\noptions:\n  - \"아침\"\n  - \"오후\"\n  - \"밤\"\n  - \"없음\"\n",
         true, C::sentence_startend, false},
    };
    return examples;
}

inline turnkit::validator::FormatRules rules_for(const GoldenExample& e) {
    return e.korean ? turnkit::validator::FormatRules::korean() : turnkit::validator::FormatRules::english();
}

/// The worked tuberculosis case: doctor summary plus full patient record.
inline turnkit::corpus::PatientCase tuberculosis_case(const std::string& id = "case-tb") {
    turnkit::corpus::PatientCase c;
    c.id = id;
    c.doctor_view = {"45", "Male", "Persistent cough and unintended weight loss", "Within 3 months",
                     "Right pectoral region and sternal area"};
    auto& p = c.patient_view;
    p.disease = "Pulmonary tuberculosis";
    p.department = "Undetermined";
    p.typicality = "Typical";
    p.age = "45";
    p.gender = "Male";
    p.height = "172 cm";
    p.weight = "68 kg";
    p.symptom_location = "Central chest and occipital region";
    p.symptom_quality = "Intermittent dry cough and chest tightness";
    p.symptom_severity = "5/10";
    p.symptom_duration = "2 months";
    p.timing = "Severe coughing in the morning, intermittent during day";
    p.context = "Worsened after outdoor work and fatigue";
    p.modifying_factors = "Warm tea and rest help; worsens with activity";
    p.associated_symptoms = "Weight loss, night sweats, low-grade fever, mild dyspnea";
    p.pain_area = "Right chest (pectoral), Sternal region";
    p.past_history = "No prior TB or chronic respiratory illness";
    p.social_history = "Construction worker, past smoker, high-density living";
    p.additional_info = "Dust exposure, smoking history, persistent fatigue";
    return c;
}

/// Synthetic case `i` with distinct patient-only values.
inline turnkit::corpus::PatientCase synthetic_case(int i) {
    auto c = tuberculosis_case("case-" + std::to_string(i));
    c.doctor_view.age = std::to_string(20 + i % 60);
    c.patient_view.age = c.doctor_view.age;
    c.patient_view.disease = "Condition-" + std::to_string(i);
    c.patient_view.past_history = "History marker " + std::to_string(i * 7 + 3);
    return c;
}

struct ReferenceRun {
    const char* model;
    const char* type;
    const char* samples;
    const char* fcsr;
    const char* tcsr;
};

// Published FCSR/TCSR rows used as echo constants.
inline const std::vector<ReferenceRun> kReferenceRuns = {
    {"Gemma-3 (4B)", "base", "-", "0.361", "0.872"},  {"Gemma-3 (4B)", "skew", "1k", "0.960", "0.824"},
    {"Gemma-3 (4B)", "skew", "8k", "0.966", "0.811"}, {"Gemma-3 (4B)", "uniform", "1k", "0.967", "0.891"},
    {"Qwen2.5 (3B)", "base", "-", "0.363", "0.783"},  {"Qwen2.5 (3B)", "skew", "1k", "0.922", "0.746"},
    {"Qwen2.5 (3B)", "skew", "8k", "0.914", "0.737"}, {"Qwen2.5 (3B)", "uniform", "1k", "0.927", "0.812"},
    {"GPT-4.1-mini", "base", "-", "0.906", "0.880"},
};

struct SyntheticRun {
    std::vector<turnkit::validator::DialogueVerdict> verdicts;
    std::vector<turnkit::judge::DialogueJudgement> judgements;
};

/// n_turns turns in dialogues of `per_dialogue` turns; the first
/// `format_pass` turns pass the format check and the first `task_pass`
/// (counted from the end) pass the judge, so the two sets overlap arbitrarily.
inline SyntheticRun synthetic_run(size_t n_turns, size_t format_pass, size_t task_pass, int per_dialogue = 10) {
    SyntheticRun r;
    for (size_t i = 0; i < n_turns; ++i) {
        const std::string id = "run-" + std::to_string(i / static_cast<size_t>(per_dialogue));
        const int turn = static_cast<int>(i % static_cast<size_t>(per_dialogue)) + 1;
        turnkit::validator::TurnVerdict v;
        v.turn = turn;
        v.overall = i < format_pass;
        r.verdicts.push_back({id, v});
        turnkit::judge::TurnJudgement j;
        j.turn = turn;
        j.clinical_utility = n_turns - i <= task_pass ? turnkit::judge::Verdict::pass : turnkit::judge::Verdict::fail;
        r.judgements.push_back({id, j});
    }
    return r;
}

}  // namespace fixtures
