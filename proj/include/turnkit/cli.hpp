#pragma once

// The `turnkit` command line. `run` is the whole program minus process setup,
// so tests can drive it with string streams.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "turnkit/agreement.hpp"
#include "turnkit/corpus.hpp"
#include "turnkit/csv.hpp"
#include "turnkit/http_client.hpp"
#include "turnkit/inertia.hpp"
#include "turnkit/judge.hpp"
#include "turnkit/rebalance.hpp"
#include "turnkit/report.hpp"
#include "turnkit/simulate.hpp"
#include "turnkit/validator.hpp"

namespace turnkit::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Raised for flag combinations CLI11 cannot express; exits with 2.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& message) : Error("usage", message) {}
};

struct ToolConfig {
    bool json_errors = false;
    std::optional<uint64_t> seed;
    int parallelism = 1;
    std::string output_dir;  ///< relative output paths resolve here when set

    fs::path output(const std::string& p) const {
        if (output_dir.empty() || fs::path(p).is_absolute()) return p;
        return fs::path(output_dir) / p;
    }
};

namespace detail {

inline std::string pretty(const ordered_json& j) {
    return j.dump(2, ' ', false, ordered_json::error_handler_t::strict) + "\n";
}

inline ordered_json ratio_json(const Ratio& r) { return report::ratio_json(r); }

inline void report_error(std::ostream& err, bool as_json, const std::string& kind, const std::string& message, int code) {
    if (as_json) {
        ordered_json j;
        j["error"]["kind"] = kind;
        j["error"]["message"] = message;
        j["error"]["exit_code"] = code;
        err << j.dump(-1, ' ', false, ordered_json::error_handler_t::replace) << "\n";
    } else {
        err << "turnkit: " << kind << " error: " << message << "\n";
    }
}

inline validator::FormatRules load_rules(const std::string& path, const std::string& preset) {
    if (!path.empty()) return validator::rules_from_json(jsonl::parse_json_file(path));
    if (preset == "english") return validator::FormatRules::english();
    return validator::FormatRules::korean();
}

// -- stats ------------------------------------------------------------------

struct StatsArgs {
    std::string in;
    std::string out;
    bool lenient = false;
};

inline int cmd_stats(const StatsArgs& a, const ToolConfig& cfg, std::ostream& out) {
    const auto loaded = corpus::load_corpus(a.in, a.lenient ? corpus::LoadMode::lenient : corpus::LoadMode::strict);
    ordered_json j;
    j["N"] = loaded.corpus.size();
    ordered_json h = ordered_json::object();
    for (const auto& [t, n] : corpus::turn_histogram(loaded.corpus)) h[std::to_string(t)] = n;
    j["histogram"] = std::move(h);
    if (a.lenient) j["skipped"] = loaded.skipped;
    const auto body = pretty(j);
    if (!a.out.empty()) jsonl::write_file(cfg.output(a.out), body);
    out << body;
    return kExitOk;
}

// -- rebalance --------------------------------------------------------------

struct RebalanceArgs {
    std::string mode;
    int t_min = 4;
    std::optional<uint64_t> seed;
    std::optional<size_t> target_size;
    std::string in;
    std::string out;
};

inline int cmd_rebalance(const RebalanceArgs& a, const ToolConfig& cfg, std::ostream& out) {
    rebalance::RebalanceConfig rc;
    rc.t_min = a.t_min;
    rc.seed = a.seed.value_or(cfg.seed.value_or(0));
    rc.target_size = a.target_size;
    if (a.mode == "skewed" && !a.target_size) throw UsageError("--mode skewed requires --target-size");
    const auto source = corpus::load_corpus(a.in).corpus;

    ordered_json s;
    s["mode"] = a.mode;
    s["N"] = source.size();
    corpus::Corpus result;
    if (a.mode == "uniform") {
        rebalance::BinningResult binning;
        result = rebalance::uniform_rebalance(source, rc, &binning);
        s["B_prime"] = binning.selected.size();
        s["q"] = binning.quota;
        s["t_min"] = rc.t_min;
        s["seed"] = rc.seed;
    } else {
        std::map<int, size_t> alloc;
        result = rebalance::skewed_sample(source, rc, &alloc);
        s["target_size"] = *rc.target_size;
        s["seed"] = rc.seed;
    }
    s["output_size"] = result.size();
    ordered_json per_bin = ordered_json::object();
    for (const auto& [t, n] : corpus::turn_histogram(result)) per_bin[std::to_string(t)] = n;
    s["per_bin"] = std::move(per_bin);
    corpus::save_corpus(result, cfg.output(a.out));
    out << pretty(s);
    return kExitOk;
}

// -- validate ---------------------------------------------------------------

struct ValidateArgs {
    std::string rules;
    std::string preset = "korean";
    std::string in;
    std::string out;
};

inline int cmd_validate(const ValidateArgs& a, const ToolConfig& cfg, std::ostream& out) {
    const auto rules = load_rules(a.rules, a.preset);
    const auto dialogues = simulate::load_dialogues(a.in);
    std::vector<ordered_json> records;
    std::vector<validator::TurnVerdict> all;
    for (const auto& d : dialogues) {
        for (auto& v : validator::evaluate_dialogue(d, rules)) {
            records.push_back(validator::to_json(validator::DialogueVerdict{d.id, v}));
            all.push_back(std::move(v));
        }
    }
    jsonl::write_records(cfg.output(a.out), records);
    ordered_json s;
    s["dialogues"] = dialogues.size();
    s["turns"] = all.size();
    s["fcsr"] = all.empty() ? ordered_json(nullptr) : ratio_json(validator::compute_fcsr(all));
    out << pretty(s);
    return kExitOk;
}

// -- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::string cases;
    std::string out;
    std::string audit;
};

inline int cmd_simulate(const SimulateArgs& a, const ToolConfig& cfg, std::ostream& out) {
    auto config = simulate::simulation_config_from_json(jsonl::parse_json_file(a.config));
    if (cfg.seed) {
        if (!config.doctor.seed) config.doctor.seed = cfg.seed;
        if (!config.patient.seed) config.patient.seed = cfg.seed;
    }
    const auto cases = corpus::load_cases(a.cases);
    // Fail fast on missing credentials before any case runs.
    client::make_client(config.doctor);
    client::make_client(config.patient);
    simulate::ClientFactory factory = [](const simulate::SimulationConfig& c, const corpus::PatientCase&) {
        return simulate::ClientPair{client::make_client(c.doctor), client::make_client(c.patient)};
    };
    const auto transcripts = simulate::run_batch(config, cases, factory, cfg.parallelism);

    std::vector<ordered_json> lines;
    std::vector<ordered_json> audit;
    size_t failed = 0;
    size_t turns = 0;
    for (const auto& t : transcripts) {
        lines.push_back(simulate::to_json(t));
        failed += t.failure.has_value();
        turns += t.dialogue.turns.size();
        if (!a.audit.empty())
            for (auto& r : simulate::audit_records(t)) audit.push_back(std::move(r));
    }
    jsonl::write_records(cfg.output(a.out), lines);
    if (!a.audit.empty()) jsonl::write_records(cfg.output(a.audit), audit);
    ordered_json s;
    s["cases"] = transcripts.size();
    s["completed"] = transcripts.size() - failed;
    s["failed"] = failed;
    s["turns"] = turns;
    out << pretty(s);
    return kExitOk;
}

// -- judge ------------------------------------------------------------------

struct JudgeArgs {
    std::string config;
    std::string in;
    std::string out;
};

/// Judgement failures are written as {"dialogue_id", "turn", "error"} lines;
/// the command then exits 1.
inline int cmd_judge(const JudgeArgs& a, const ToolConfig& cfg, std::ostream& out) {
    auto config = judge::judge_config_from_json(jsonl::parse_json_file(a.config));
    if (cfg.seed && !config.judge.seed) config.judge.seed = cfg.seed;
    const auto dialogues = simulate::load_dialogues(a.in);
    auto judge_client = client::make_client(config.judge);

    struct Job {
        const corpus::Dialogue* dialogue;
        int turn;
    };
    std::vector<Job> jobs;
    for (const auto& d : dialogues)
        for (size_t i = 0; i < d.turns.size(); ++i) jobs.push_back({&d, static_cast<int>(i) + 1});

    std::vector<ordered_json> lines(jobs.size());
    std::vector<std::optional<judge::TurnJudgement>> results(jobs.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const auto& job = jobs[i];
            try {
                results[i] = judge::judge_turn(*job.dialogue, job.turn, *judge_client, config);
                lines[i] = judge::to_json(judge::DialogueJudgement{job.dialogue->id, *results[i]});
            } catch (const std::exception& e) {
                ordered_json j;
                j["dialogue_id"] = job.dialogue->id;
                j["turn"] = job.turn;
                j["error"]["kind"] = dynamic_cast<const Error*>(&e) ? dynamic_cast<const Error&>(e).kind() : "runtime";
                j["error"]["message"] = e.what();
                if (const auto* pe = dynamic_cast<const judge::JudgeParseError*>(&e)) j["error"]["raw"] = pe->raw();
                lines[i] = std::move(j);
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const int n = std::max(1, std::min<int>(cfg.parallelism, static_cast<int>(jobs.size())));
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    }
    jsonl::write_records(cfg.output(a.out), lines);

    std::vector<judge::TurnJudgement> ok;
    for (const auto& r : results)
        if (r) ok.push_back(*r);
    ordered_json s;
    s["turns"] = jobs.size();
    s["judged"] = ok.size();
    s["errors"] = jobs.size() - ok.size();
    s["tcsr"] = ok.empty() ? ordered_json(nullptr) : ratio_json(judge::compute_tcsr(ok));
    out << pretty(s);
    if (ok.size() != jobs.size())
        throw Error("judge", std::to_string(jobs.size() - ok.size()) + " turn(s) could not be judged; see " + a.out);
    return kExitOk;
}

// -- inertia ----------------------------------------------------------------

struct InertiaArgs {
    std::string in;
    std::string vectorizer = "tf";
    std::string provider_config;
    std::string tokenizer_config;
    std::string rules;
    std::string preset = "korean";
    double slope_threshold = inertia::InertiaThresholds{}.slope_threshold;
    double level_threshold = inertia::InertiaThresholds{}.level_threshold;
    size_t window = inertia::InertiaThresholds{}.window;
    std::string out;
    std::string aggregate_out;
    std::string format = "csv";
};

inline int cmd_inertia(const InertiaArgs& a, const ToolConfig& cfg, std::ostream& out) {
    inertia::Vectorizer vec;
    if (!a.tokenizer_config.empty()) vec.tokenizer = inertia::tokenizer_from_json(jsonl::parse_json_file(a.tokenizer_config));
    if (a.vectorizer == "provider") {
        if (a.provider_config.empty()) throw UsageError("--vectorizer provider requires --provider-config");
        vec.provider = std::make_shared<client::HttpEmbeddingProvider>(
            client::client_spec_from_json(jsonl::parse_json_file(a.provider_config)));
    }
    const inertia::InertiaThresholds th{a.slope_threshold, a.level_threshold, a.window};
    if (th.window < 1) throw UsageError("--window must be >= 1");
    const auto rules = load_rules(a.rules, a.preset);
    const auto format = report::format_from_string(a.format);
    const auto dialogues = simulate::load_dialogues(a.in);

    std::vector<ordered_json> lines;
    std::vector<inertia::SimilaritySeries> series;
    for (const auto& d : dialogues) {
        auto r = inertia::analyze_dialogue(d, vec, th, rules);
        lines.push_back(inertia::to_json(r));
        series.push_back(std::move(r.series));
    }
    if (!a.out.empty()) jsonl::write_records(cfg.output(a.out), lines);
    const auto body = report::emit_aggregate(inertia::aggregate_by_turn(series), format);
    if (!a.aggregate_out.empty()) jsonl::write_file(cfg.output(a.aggregate_out), body);
    else out << body;
    return kExitOk;
}

// -- agree ------------------------------------------------------------------

struct LabelColumn {
    std::vector<std::string> ids;  ///< empty when the file has no id column
    std::vector<std::string> labels;
};

/// A CSV of labels: either a single headerless column, or a header naming a
/// "label" column and optionally an "id" column.
inline LabelColumn read_labels(const std::string& path) {
    const auto rows = csv::parse(jsonl::read_file(path));
    LabelColumn col;
    if (rows.empty()) return col;
    const auto& head = rows.front();
    const auto label_it = std::find(head.begin(), head.end(), "label");
    size_t first = 0;
    size_t label_idx = 0;
    std::optional<size_t> id_idx;
    if (label_it != head.end()) {
        first = 1;
        label_idx = static_cast<size_t>(label_it - head.begin());
        if (auto id_it = std::find(head.begin(), head.end(), "id"); id_it != head.end())
            id_idx = static_cast<size_t>(id_it - head.begin());
    } else if (head.size() != 1) {
        throw SchemaError(1, "", path + ": multi-column label files need a header with a 'label' column");
    }
    for (size_t i = first; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() == 1 && r[0].empty()) continue;
        if (label_idx >= r.size() || (id_idx && *id_idx >= r.size()))
            throw SchemaError(i + 1, "", path + ": missing column");
        col.labels.push_back(std::string(unicode::trim(r[label_idx])));
        if (id_idx) col.ids.push_back(r[*id_idx]);
    }
    return col;
}

/// Numeric view of a label list: numbers as-is, pass/fail as 1/0.
inline std::optional<std::vector<double>> numeric_labels(const std::vector<std::string>& labels) {
    std::vector<double> out;
    for (const auto& l : labels) {
        std::string low = judge::detail::lower_ascii(l);
        if (low == "pass") out.push_back(1);
        else if (low == "fail") out.push_back(0);
        else {
            try {
                out.push_back(csv::parse_double(l));
            } catch (const InvalidArgument&) {
                return std::nullopt;
            }
        }
    }
    return out;
}

struct AgreeArgs {
    std::string a;
    std::string b;
};

inline int cmd_agree(const AgreeArgs& args, const ToolConfig&, std::ostream& out) {
    auto a = read_labels(args.a);
    auto b = read_labels(args.b);
    if (!a.ids.empty() && !b.ids.empty()) {
        std::map<std::string, std::string> by_id;
        for (size_t i = 0; i < b.ids.size(); ++i)
            if (!by_id.emplace(b.ids[i], b.labels[i]).second) throw SchemaError(0, "id", "duplicate id " + b.ids[i] + " in " + args.b);
        if (by_id.size() != a.ids.size()) throw InvalidArgument("label files cover different ids");
        std::vector<std::string> aligned;
        for (const auto& id : a.ids) {
            auto it = by_id.find(id);
            if (it == by_id.end()) throw InvalidArgument("id " + id + " missing from " + args.b);
            aligned.push_back(it->second);
        }
        b.labels = std::move(aligned);
    }
    const double kappa = judge::cohen_kappa(a.labels, b.labels);
    ordered_json s;
    s["n"] = a.labels.size();
    s["kappa"] = kappa;
    auto xa = numeric_labels(a.labels);
    auto xb = numeric_labels(b.labels);
    std::optional<double> rho;
    if (xa && xb && a.labels.size() >= 2) rho = judge::spearman_rho(*xa, *xb);
    s["spearman_rho"] = rho ? ordered_json(*rho) : ordered_json(nullptr);
    if (!rho)
        s["spearman_note"] = !(xa && xb) ? "labels are not numeric or pass/fail"
                             : a.labels.size() < 2 ? "fewer than two items"
                                                   : "undefined for constant input";
    out << pretty(s);
    return kExitOk;
}

// -- report -----------------------------------------------------------------

struct ReportArgs {
    std::string verdicts;
    std::string judgements;
    std::string train_hist;
    std::string format = "markdown";
    std::string out;
    std::string profile_out;
    report::RunLabel label;
};

inline int cmd_report(const ReportArgs& a, const ToolConfig& cfg, std::ostream& out) {
    const auto format = report::format_from_string(a.format);
    if (!a.train_hist.empty() && a.profile_out.empty() && format != report::Format::markdown)
        throw UsageError("--train-hist with --format " + a.format + " requires --profile-out");
    const auto summary = report::summarize_run(validator::load_verdicts(a.verdicts),
                                               judge::load_judgements(a.judgements), a.label);
    std::string body = report::emit_summaries({summary}, format);
    if (!a.train_hist.empty()) {
        const auto hist = report::histogram_from_json(jsonl::parse_json_file(a.train_hist));
        const auto profile = report::turn_failure_profile(hist, summary.per_turn_tcsr());
        const auto pbody = report::emit_profile(profile, format);
        if (!a.profile_out.empty()) jsonl::write_file(cfg.output(a.profile_out), pbody);
        else body += "\n" + pbody;
    }
    if (!a.out.empty()) jsonl::write_file(cfg.output(a.out), body);
    else out << body;
    return kExitOk;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    ToolConfig cfg;
    // Known before parsing so that usage errors honour it too.
    cfg.json_errors = std::find(args.begin(), args.end(), "--json-errors") != args.end();

    CLI::App app{"Multi-turn dialogue evaluation toolkit", "turnkit"};
    app.require_subcommand(1);
    app.add_flag("--json-errors", cfg.json_errors, "Print errors as JSON objects on stderr");
    app.add_option("--seed", cfg.seed, "Seed for every sampling step");
    app.add_option("--parallelism", cfg.parallelism, "Worker threads for simulate and judge")
        ->check(CLI::PositiveNumber);
    app.add_option("--output-dir", cfg.output_dir, "Directory for relative output paths");

    auto sub = [&](const char* name, const char* desc) {
        auto* s = app.add_subcommand(name, desc);
        s->fallthrough();
        return s;
    };

    detail::StatsArgs stats;
    auto* s_stats = sub("stats", "Turn-count histogram of a corpus");
    s_stats->add_option("--in", stats.in, "Corpus JSONL")->required();
    s_stats->add_option("--out", stats.out, "Also write the JSON here");
    s_stats->add_flag("--lenient", stats.lenient, "Skip malformed lines instead of failing");

    detail::RebalanceArgs reb;
    auto* s_reb = sub("rebalance", "Uniform or skewed turn-count resampling");
    s_reb->add_option("--mode", reb.mode, "uniform or skewed")->required()->check(CLI::IsMember({"uniform", "skewed"}));
    s_reb->add_option("--t-min", reb.t_min, "Smallest turn-count bin taking part in uniform sampling")
        ->check(CLI::PositiveNumber);
    s_reb->add_option("--seed", reb.seed, "Sampling seed (overrides the global --seed)");
    s_reb->add_option("--target-size", reb.target_size, "Output size for skewed mode");
    s_reb->add_option("--in", reb.in, "Corpus JSONL")->required();
    s_reb->add_option("--out", reb.out, "Output corpus JSONL")->required();

    detail::ValidateArgs val;
    auto* s_val = sub("validate", "Check the five format constraints on every doctor turn");
    s_val->add_option("--rules", val.rules, "Format rules JSON");
    s_val->add_option("--preset", val.preset, "Built-in rules when --rules is absent")
        ->check(CLI::IsMember({"korean", "english"}));
    s_val->add_option("--in", val.in, "Corpus or transcripts JSONL")->required();
    s_val->add_option("--out", val.out, "Verdicts JSONL")->required();

    detail::SimulateArgs sim;
    auto* s_sim = sub("simulate", "Run doctor/patient simulations");
    s_sim->add_option("--config", sim.config, "Simulation config JSON")->required();
    s_sim->add_option("--cases", sim.cases, "Patient cases JSONL")->required();
    s_sim->add_option("--out", sim.out, "Transcripts JSONL")->required();
    s_sim->add_option("--audit", sim.audit, "Per-request audit log JSONL");
    s_sim->add_option("--parallelism", cfg.parallelism, "Concurrent dialogues")->check(CLI::PositiveNumber);

    detail::JudgeArgs jud;
    auto* s_jud = sub("judge", "Judge clinical utility of every doctor turn");
    s_jud->add_option("--config", jud.config, "Judge config JSON")->required();
    s_jud->add_option("--in", jud.in, "Transcripts or corpus JSONL")->required();
    s_jud->add_option("--out", jud.out, "Judgements JSONL")->required();
    s_jud->add_option("--parallelism", cfg.parallelism, "Concurrent judge calls")->check(CLI::PositiveNumber);

    detail::InertiaArgs ine;
    auto* s_ine = sub("inertia", "Question similarity series and inertia flags");
    s_ine->add_option("--in", ine.in, "Transcripts or corpus JSONL")->required();
    s_ine->add_option("--vectorizer", ine.vectorizer, "tf or provider")->check(CLI::IsMember({"tf", "provider"}));
    s_ine->add_option("--provider-config", ine.provider_config, "Embedding client spec JSON");
    s_ine->add_option("--tokenizer", ine.tokenizer_config, "Tokenizer config JSON");
    s_ine->add_option("--rules", ine.rules, "Format rules JSON used to extract questions");
    s_ine->add_option("--preset", ine.preset, "Built-in rules when --rules is absent")
        ->check(CLI::IsMember({"korean", "english"}));
    s_ine->add_option("--slope-threshold", ine.slope_threshold, "Flag when a similarity slope exceeds this");
    s_ine->add_option("--level-threshold", ine.level_threshold, "Flag when the late-window mean exceeds this");
    s_ine->add_option("--window", ine.window, "Late-window length in turns");
    s_ine->add_option("--out", ine.out, "Per-dialogue reports JSONL");
    s_ine->add_option("--aggregate-out", ine.aggregate_out, "Similarity-by-turn table (stdout if absent)");
    s_ine->add_option("--format", ine.format, "Aggregate format")->check(CLI::IsMember({"json", "csv", "markdown"}));

    detail::AgreeArgs agr;
    auto* s_agr = sub("agree", "Cohen's kappa and Spearman's rho between two label files");
    s_agr->add_option("--a", agr.a, "First label CSV")->required();
    s_agr->add_option("--b", agr.b, "Second label CSV")->required();

    detail::ReportArgs rep;
    auto* s_rep = sub("report", "FCSR/TCSR summary and turn-failure profile");
    s_rep->add_option("--verdicts", rep.verdicts, "Verdicts JSONL")->required();
    s_rep->add_option("--judgements", rep.judgements, "Judgements JSONL")->required();
    s_rep->add_option("--train-hist", rep.train_hist, "Training turn histogram JSON");
    s_rep->add_option("--format", rep.format, "json, csv or markdown")->check(CLI::IsMember({"json", "csv", "markdown"}));
    s_rep->add_option("--out", rep.out, "Output file (stdout if absent)");
    s_rep->add_option("--profile-out", rep.profile_out, "Turn-failure profile output");
    s_rep->add_option("--model", rep.label.model, "Model column");
    s_rep->add_option("--type", rep.label.type, "Dataset type column");
    s_rep->add_option("--samples", rep.label.samples, "Samples column");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        detail::report_error(err, cfg.json_errors, "usage", e.what(), kExitUsage);
        if (!cfg.json_errors) err << app.help();
        return kExitUsage;
    }

    try {
        if (*s_stats) return detail::cmd_stats(stats, cfg, out);
        if (*s_reb) return detail::cmd_rebalance(reb, cfg, out);
        if (*s_val) return detail::cmd_validate(val, cfg, out);
        if (*s_sim) return detail::cmd_simulate(sim, cfg, out);
        if (*s_jud) return detail::cmd_judge(jud, cfg, out);
        if (*s_ine) return detail::cmd_inertia(ine, cfg, out);
        if (*s_agr) return detail::cmd_agree(agr, cfg, out);
        if (*s_rep) return detail::cmd_report(rep, cfg, out);
    } catch (const UsageError& e) {
        detail::report_error(err, cfg.json_errors, e.kind(), e.what(), kExitUsage);
        return kExitUsage;
    } catch (const Error& e) {
        detail::report_error(err, cfg.json_errors, e.kind(), e.what(), kExitRuntime);
        return kExitRuntime;
    } catch (const std::exception& e) {
        detail::report_error(err, cfg.json_errors, "runtime", e.what(), kExitRuntime);
        return kExitRuntime;
    }
    detail::report_error(err, cfg.json_errors, "usage", "no subcommand given", kExitUsage);
    return kExitUsage;
}

}  // namespace turnkit::cli
