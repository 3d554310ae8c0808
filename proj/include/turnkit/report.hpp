#pragma once

// Aggregation of verdicts and judgements into run summaries, turn-failure
// profiles and similarity-by-turn tables, with JSON / CSV / Markdown output.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "turnkit/agreement.hpp"
#include "turnkit/corpus.hpp"
#include "turnkit/csv.hpp"
#include "turnkit/inertia.hpp"
#include "turnkit/judge.hpp"
#include "turnkit/jsonl.hpp"
#include "turnkit/ratio.hpp"
#include "turnkit/validator.hpp"

namespace turnkit::report {

enum class Format { json, csv, markdown };

inline Format format_from_string(const std::string& s) {
    if (s == "json") return Format::json;
    if (s == "csv") return Format::csv;
    if (s == "markdown" || s == "md") return Format::markdown;
    throw InvalidArgument("unknown format '" + s + "' (json, csv, markdown)");
}

struct RunLabel {
    std::string model;
    std::string type;     ///< dataset type, e.g. "Skew" or "Uniform"
    std::string samples;  ///< e.g. "1k"
};

struct TurnCounts {
    uint64_t n = 0;
    uint64_t format_pass = 0;
    uint64_t task_pass = 0;

    Ratio fcsr() const { return Ratio(format_pass, n); }
    Ratio tcsr() const { return Ratio(task_pass, n); }
};

struct RunSummary {
    RunLabel label;
    Ratio fcsr;
    Ratio tcsr;
    std::map<int, TurnCounts> per_turn;
    size_t n_dialogues = 0;
    size_t n_turns = 0;

    std::map<int, Ratio> per_turn_tcsr() const {
        std::map<int, Ratio> out;
        for (const auto& [t, c] : per_turn) out.emplace(t, c.tcsr());
        return out;
    }
};

/// Both inputs must cover exactly the same (dialogue, turn) keys, each once.
inline RunSummary summarize_run(const std::vector<validator::DialogueVerdict>& verdicts,
                                const std::vector<judge::DialogueJudgement>& judgements, RunLabel label) {
    using Key = std::pair<std::string, int>;
    std::map<Key, bool> format;
    for (const auto& v : verdicts) {
        if (!format.emplace(Key{v.dialogue_id, v.verdict.turn}, v.verdict.overall).second)
            throw InvalidArgument("duplicate verdict for " + v.dialogue_id + " turn " + std::to_string(v.verdict.turn));
    }
    std::map<Key, bool> task;
    for (const auto& j : judgements) {
        if (!task.emplace(Key{j.dialogue_id, j.judgement.turn}, j.judgement.clinical_utility == judge::Verdict::pass).second)
            throw InvalidArgument("duplicate judgement for " + j.dialogue_id + " turn " + std::to_string(j.judgement.turn));
    }
    if (format.empty()) throw InvalidArgument("no turns to summarize");
    for (const auto& [k, _] : format)
        if (!task.count(k)) throw InvalidArgument("turn-set mismatch: " + k.first + " turn " + std::to_string(k.second) + " has no judgement");
    for (const auto& [k, _] : task)
        if (!format.count(k)) throw InvalidArgument("turn-set mismatch: " + k.first + " turn " + std::to_string(k.second) + " has no verdict");

    RunSummary s;
    s.label = std::move(label);
    std::set<std::string> dialogues;
    uint64_t fp = 0;
    uint64_t tp = 0;
    for (const auto& [k, ok] : format) {
        dialogues.insert(k.first);
        auto& c = s.per_turn[k.second];
        ++c.n;
        c.format_pass += ok;
        c.task_pass += task.at(k);
        fp += ok;
        tp += task.at(k);
    }
    s.n_turns = format.size();
    s.n_dialogues = dialogues.size();
    s.fcsr = Ratio(fp, s.n_turns);
    s.tcsr = Ratio(tp, s.n_turns);
    return s;
}

struct ProfileRow {
    int turn = 0;
    uint64_t training_frequency = 0;
    Ratio failure_rate;  ///< 1 - TCSR(turn)
};

struct TurnFailureProfile {
    std::vector<ProfileRow> rows;
    std::optional<double> spearman_rho;  ///< nullopt when undefined
};

/// Pairs training frequency with evaluation failure rate over the turns both
/// inputs define.
inline TurnFailureProfile turn_failure_profile(const corpus::Histogram& training,
                                               const std::map<int, Ratio>& per_turn_tcsr) {
    TurnFailureProfile p;
    for (const auto& [turn, tcsr] : per_turn_tcsr) {
        auto it = training.find(turn);
        if (it == training.end()) continue;
        p.rows.push_back({turn, it->second, tcsr.complement()});
    }
    if (p.rows.empty()) throw InvalidArgument("training histogram and evaluation share no turns");
    if (p.rows.size() >= 2) {
        std::vector<double> freq;
        std::vector<double> fail;
        for (const auto& r : p.rows) {
            freq.push_back(static_cast<double>(r.training_frequency));
            fail.push_back(r.failure_rate.value());
        }
        p.spearman_rho = judge::spearman_rho(freq, fail);
    }
    return p;
}

/// Reads a training histogram: either {"4": 1835, ...} or the `stats` output
/// {"N": ..., "histogram": {...}}.
inline corpus::Histogram histogram_from_json(const json& j) {
    const json& h = j.is_object() && j.contains("histogram") ? j.at("histogram") : j;
    if (!h.is_object()) throw ConfigError("histogram must be an object of turn -> count");
    corpus::Histogram out;
    for (const auto& [k, v] : h.items()) {
        int turn = 0;
        auto [ptr, ec] = std::from_chars(k.data(), k.data() + k.size(), turn);
        if (ec != std::errc() || ptr != k.data() + k.size() || turn < 1)
            throw ConfigError("histogram key '" + k + "' is not a turn count");
        if (!v.is_number_unsigned()) throw ConfigError("histogram count for turn " + k + " must be a non-negative integer");
        out[turn] = v.get<size_t>();
    }
    return out;
}

// ---------------------------------------------------------------------------
// emission

inline ordered_json provenance(const std::string& artifact) {
    ordered_json p;
    p["tool"] = "turnkit";
    p["artifact"] = artifact;
    p["schema_version"] = 1;
    return p;
}

inline ordered_json ratio_json(const Ratio& r) {
    ordered_json j;
    j["numerator"] = r.numerator;
    j["denominator"] = r.denominator;
    j["value"] = r.decimal(3);
    return j;
}

inline ordered_json to_json(const RunSummary& s) {
    ordered_json j;
    j["model"] = s.label.model;
    j["type"] = s.label.type;
    j["samples"] = s.label.samples;
    j["fcsr"] = ratio_json(s.fcsr);
    j["tcsr"] = ratio_json(s.tcsr);
    j["n_dialogues"] = s.n_dialogues;
    j["n_turns"] = s.n_turns;
    auto turns = ordered_json::array();
    for (const auto& [t, c] : s.per_turn) {
        ordered_json r;
        r["turn"] = t;
        r["n"] = c.n;
        r["format_pass"] = c.format_pass;
        r["task_pass"] = c.task_pass;
        r["fcsr"] = c.fcsr().decimal(3);
        r["tcsr"] = c.tcsr().decimal(3);
        turns.push_back(std::move(r));
    }
    j["per_turn"] = std::move(turns);
    return j;
}

inline std::string markdown_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out;
}

inline std::string emit_summaries(const std::vector<RunSummary>& runs, Format format) {
    switch (format) {
        case Format::json: {
            ordered_json doc;
            doc["provenance"] = provenance("run_summary");
            auto arr = ordered_json::array();
            for (const auto& s : runs) arr.push_back(to_json(s));
            doc["runs"] = std::move(arr);
            return doc.dump(2, ' ', false, ordered_json::error_handler_t::strict) + "\n";
        }
        case Format::csv: {
            std::vector<csv::Row> rows{{"model", "type", "samples", "fcsr", "tcsr", "fcsr_exact", "tcsr_exact",
                                        "n_dialogues", "n_turns"}};
            for (const auto& s : runs)
                rows.push_back({s.label.model, s.label.type, s.label.samples, s.fcsr.decimal(3), s.tcsr.decimal(3),
                                s.fcsr.to_string(), s.tcsr.to_string(), std::to_string(s.n_dialogues),
                                std::to_string(s.n_turns)});
            return csv::format(rows);
        }
        case Format::markdown: {
            std::string out = "| Model | Type | Samples | FCSR | TCSR |\n|---|---|---|---|---|\n";
            for (const auto& s : runs)
                out += "| " + markdown_cell(s.label.model) + " | " + markdown_cell(s.label.type) + " | " +
                       markdown_cell(s.label.samples) + " | " + s.fcsr.decimal(3) + " | " + s.tcsr.decimal(3) + " |\n";
            return out;
        }
    }
    return {};
}

inline std::string emit_profile(const TurnFailureProfile& p, Format format) {
    switch (format) {
        case Format::json: {
            ordered_json doc;
            doc["provenance"] = provenance("turn_failure_profile");
            auto rows = ordered_json::array();
            for (const auto& r : p.rows) {
                ordered_json j;
                j["turn"] = r.turn;
                j["training_frequency"] = r.training_frequency;
                j["failure_rate"] = ratio_json(r.failure_rate);
                rows.push_back(std::move(j));
            }
            doc["rows"] = std::move(rows);
            doc["spearman_rho"] = p.spearman_rho ? ordered_json(*p.spearman_rho) : ordered_json(nullptr);
            return doc.dump(2, ' ', false, ordered_json::error_handler_t::strict) + "\n";
        }
        case Format::csv: {
            std::vector<csv::Row> rows{{"turn", "training_frequency", "failure_rate", "failures", "n"}};
            for (const auto& r : p.rows)
                rows.push_back({std::to_string(r.turn), std::to_string(r.training_frequency),
                                csv::format_double(r.failure_rate.value()), std::to_string(r.failure_rate.numerator),
                                std::to_string(r.failure_rate.denominator)});
            return csv::format(rows);
        }
        case Format::markdown: {
            std::string out = "| Turn | Training frequency | Failure rate (1-TCSR) |\n|---|---|---|\n";
            for (const auto& r : p.rows)
                out += "| " + std::to_string(r.turn) + " | " + std::to_string(r.training_frequency) + " | " +
                       r.failure_rate.decimal(3) + " |\n";
            out += "\nSpearman rho: " + (p.spearman_rho ? csv::format_double(*p.spearman_rho) : std::string("undefined")) + "\n";
            return out;
        }
    }
    return {};
}

inline std::string emit_aggregate(const std::map<int, inertia::TurnAggregate>& agg, Format format) {
    switch (format) {
        case Format::json: {
            ordered_json doc;
            doc["provenance"] = provenance("similarity_by_turn");
            auto rows = ordered_json::array();
            for (const auto& [t, a] : agg) {
                ordered_json j;
                j["turn"] = t;
                j["mean_jaccard"] = a.mean_jaccard;
                j["mean_cosine"] = a.mean_cosine;
                j["n"] = a.n;
                rows.push_back(std::move(j));
            }
            doc["rows"] = std::move(rows);
            return doc.dump(2, ' ', false, ordered_json::error_handler_t::strict) + "\n";
        }
        case Format::csv: {
            std::vector<csv::Row> rows{{"turn", "mean_jaccard", "mean_cosine", "n"}};
            for (const auto& [t, a] : agg)
                rows.push_back({std::to_string(t), csv::format_double(a.mean_jaccard), csv::format_double(a.mean_cosine),
                                std::to_string(a.n)});
            return csv::format(rows);
        }
        case Format::markdown: {
            std::string out = "| Turn | Mean Jaccard | Mean cosine | n |\n|---|---|---|---|\n";
            for (const auto& [t, a] : agg)
                out += "| " + std::to_string(t) + " | " + csv::format_double(a.mean_jaccard) + " | " +
                       csv::format_double(a.mean_cosine) + " | " + std::to_string(a.n) + " |\n";
            return out;
        }
    }
    return {};
}

/// Reads back the CSV form of emit_aggregate.
inline std::map<int, inertia::TurnAggregate> aggregate_from_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows[0] != csv::Row{"turn", "mean_jaccard", "mean_cosine", "n"})
        throw SchemaError(1, "", "unexpected aggregate CSV header");
    std::map<int, inertia::TurnAggregate> out;
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 4) throw SchemaError(i + 1, "", "expected 4 columns");
        out[static_cast<int>(csv::parse_double(r[0]))] = {csv::parse_double(r[1]), csv::parse_double(r[2]),
                                                         static_cast<size_t>(csv::parse_double(r[3]))};
    }
    return out;
}

/// Reads back the CSV form of emit_profile. The rho is not part of the CSV.
inline TurnFailureProfile profile_from_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows[0] != csv::Row{"turn", "training_frequency", "failure_rate", "failures", "n"})
        throw SchemaError(1, "", "unexpected profile CSV header");
    TurnFailureProfile p;
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 5) throw SchemaError(i + 1, "", "expected 5 columns");
        p.rows.push_back({std::stoi(r[0]), std::stoull(r[1]), Ratio(std::stoull(r[3]), std::stoull(r[4]))});
    }
    return p;
}

inline void emit_to_file(const std::filesystem::path& path, const std::string& body) { jsonl::write_file(path, body); }

}  // namespace turnkit::report
