#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "turnkit/csv.hpp"
#include "turnkit/report.hpp"

using namespace turnkit;
using namespace turnkit::report;

namespace {

uint64_t count_from_decimal(const char* s, uint64_t n) {
    return static_cast<uint64_t>(std::llround(std::stod(s) * static_cast<double>(n)));
}

}  // namespace

TEST(Summary, AllPass) {
    const auto r = fixtures::synthetic_run(40, 40, 40);
    const auto s = summarize_run(r.verdicts, r.judgements, {"m", "uniform", "1k"});
    EXPECT_EQ(s.fcsr, Ratio(1, 1));
    EXPECT_EQ(s.tcsr, Ratio(1, 1));
    EXPECT_EQ(s.n_dialogues, 4u);
    EXPECT_EQ(s.n_turns, 40u);
}

TEST(Summary, EchoesReferenceRows) {
    for (uint64_t n : {1000u, 1200u, 5000u}) {
        for (const auto& row : fixtures::kReferenceRuns) {
            const auto r = fixtures::synthetic_run(n, count_from_decimal(row.fcsr, n), count_from_decimal(row.tcsr, n));
            const auto s = summarize_run(r.verdicts, r.judgements, {row.model, row.type, row.samples});
            EXPECT_EQ(s.fcsr.decimal(3), row.fcsr) << row.model << " " << row.type;
            EXPECT_EQ(s.tcsr.decimal(3), row.tcsr) << row.model << " " << row.type;
            EXPECT_LE(std::abs(s.fcsr.value() - std::stod(row.fcsr)), 1.0 / static_cast<double>(n));
        }
    }
}

TEST(Summary, PerTurnRecomposesGlobal) {
    turnkit::random::SplitMix64 rng(12);
    for (int iter = 0; iter < 100; ++iter) {
        const size_t n = 1 + rng.below(300);
        auto r = fixtures::synthetic_run(n, rng.below(n + 1), rng.below(n + 1), 1 + static_cast<int>(rng.below(12)));
        // shuffle outcomes so that per-turn counts differ
        for (auto& v : r.verdicts) v.verdict.overall = rng.below(2);
        for (auto& j : r.judgements) j.judgement.clinical_utility = rng.below(3) ? judge::Verdict::pass : judge::Verdict::fail;
        const auto s = summarize_run(r.verdicts, r.judgements, {});
        uint64_t fp = 0, tp = 0, total = 0;
        for (const auto& [t, c] : s.per_turn) {
            fp += c.format_pass;
            tp += c.task_pass;
            total += c.n;
        }
        EXPECT_EQ(total, s.n_turns);
        EXPECT_EQ(s.fcsr, Ratio(fp, total));
        EXPECT_EQ(s.tcsr, Ratio(tp, total));
        // independent count
        uint64_t want_f = 0, want_t = 0;
        for (const auto& v : r.verdicts) want_f += v.verdict.overall;
        for (const auto& j : r.judgements) want_t += j.judgement.clinical_utility == judge::Verdict::pass;
        EXPECT_EQ(s.fcsr.numerator, want_f);
        EXPECT_EQ(s.tcsr.numerator, want_t);
    }
}

TEST(Summary, Errors) {
    auto r = fixtures::synthetic_run(10, 5, 5);
    auto missing = r.judgements;
    missing.pop_back();
    EXPECT_THROW(summarize_run(r.verdicts, missing, {}), InvalidArgument);
    auto extra = r.judgements;
    extra.push_back({"elsewhere", {1, judge::Verdict::pass, "", ""}});
    EXPECT_THROW(summarize_run(r.verdicts, extra, {}), InvalidArgument);
    auto dup = r.verdicts;
    dup.push_back(dup.front());
    EXPECT_THROW(summarize_run(dup, r.judgements, {}), InvalidArgument);
    EXPECT_THROW(summarize_run({}, {}, {}), InvalidArgument);
}

TEST(Profile, MonotoneGivesMinusOne) {
    const corpus::Histogram h = {{1, 500}, {2, 400}, {3, 300}, {4, 200}};
    const std::map<int, Ratio> tcsr = {{1, Ratio(9, 10)}, {2, Ratio(8, 10)}, {3, Ratio(7, 10)}, {4, Ratio(6, 10)}};
    const auto p = turn_failure_profile(h, tcsr);
    ASSERT_TRUE(p.spearman_rho);
    EXPECT_DOUBLE_EQ(*p.spearman_rho, -1.0);
}

TEST(Profile, ConstantIsUndefined) {
    const corpus::Histogram h = {{1, 5}, {2, 5}, {3, 5}};
    const std::map<int, Ratio> tcsr = {{1, Ratio(1, 2)}, {2, Ratio(1, 2)}, {3, Ratio(1, 2)}};
    const auto p = turn_failure_profile(h, tcsr);
    EXPECT_FALSE(p.spearman_rho);
    EXPECT_NE(emit_profile(p, Format::markdown).find("Spearman rho: undefined"), std::string::npos);
}

TEST(Profile, NoOverlapIsError) {
    EXPECT_THROW(turn_failure_profile({{4, 10}}, {{5, Ratio(1, 2)}}), InvalidArgument);
}

TEST(Profile, ReferenceHistogramJoin) {
    // evaluation covers turns 2..14, training covers 4..12
    std::map<int, Ratio> tcsr;
    for (int t = 2; t <= 14; ++t) tcsr.emplace(t, Ratio(static_cast<uint64_t>(100 - 5 * t), 100));
    const auto p = turn_failure_profile(fixtures::kReferenceHistogram, tcsr);
    // hand join
    std::vector<ProfileRow> want;
    for (const auto& [t, n] : fixtures::kReferenceHistogram) want.push_back({t, n, Ratio(static_cast<uint64_t>(5 * t), 100)});
    ASSERT_EQ(p.rows.size(), want.size());
    for (size_t i = 0; i < want.size(); ++i) {
        EXPECT_EQ(p.rows[i].turn, want[i].turn);
        EXPECT_EQ(p.rows[i].training_frequency, want[i].training_frequency);
        EXPECT_EQ(p.rows[i].failure_rate, want[i].failure_rate);
    }
    ASSERT_TRUE(p.spearman_rho);
    EXPECT_LT(*p.spearman_rho, 0.0);
}

TEST(Profile, HistogramFromJson) {
    EXPECT_EQ(histogram_from_json(json::parse(R"({"4": 3, "5": 1})")), (corpus::Histogram{{4, 3}, {5, 1}}));
    EXPECT_EQ(histogram_from_json(json::parse(R"({"N": 4, "histogram": {"4": 3, "5": 1}})")), (corpus::Histogram{{4, 3}, {5, 1}}));
    EXPECT_THROW(histogram_from_json(json::parse(R"({"four": 3})")), Error);
}

TEST(Emit, MarkdownHeader) {
    const auto r = fixtures::synthetic_run(1000, 960, 824);
    const auto s = summarize_run(r.verdicts, r.judgements, {"Gemma-3 (4B)", "skew", "1k"});
    EXPECT_EQ(emit_summaries({s}, Format::markdown),
              "| Model | Type | Samples | FCSR | TCSR |\n|---|---|---|---|---|\n| Gemma-3 (4B) | skew | 1k | 0.960 | 0.824 |\n");
}

TEST(Emit, CsvAndJsonCarryExactRatios) {
    const auto r = fixtures::synthetic_run(3, 2, 1);
    const auto s = summarize_run(r.verdicts, r.judgements, {"m", "t", "3"});
    const auto rows = csv::parse(emit_summaries({s}, Format::csv));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1], (csv::Row{"m", "t", "3", "0.667", "0.333", "2/3", "1/3", "1", "3"}));
    const auto j = json::parse(emit_summaries({s}, Format::json));
    EXPECT_EQ(j["provenance"]["schema_version"], 1);
    EXPECT_EQ(j["runs"][0]["fcsr"]["numerator"], 2);
    EXPECT_EQ(j["runs"][0]["fcsr"]["value"], "0.667");
}

TEST(Emit, ProfileCsvRoundTrip) {
    std::map<int, Ratio> tcsr;
    for (int t = 4; t <= 12; ++t) tcsr.emplace(t, Ratio(static_cast<uint64_t>(t * 7 % 13), 13));
    const auto p = turn_failure_profile(fixtures::kReferenceHistogram, tcsr);
    const auto back = profile_from_csv(emit_profile(p, Format::csv));
    ASSERT_EQ(back.rows.size(), p.rows.size());
    for (size_t i = 0; i < p.rows.size(); ++i) {
        EXPECT_EQ(back.rows[i].turn, p.rows[i].turn);
        EXPECT_EQ(back.rows[i].training_frequency, p.rows[i].training_frequency);
        EXPECT_EQ(back.rows[i].failure_rate, p.rows[i].failure_rate);
    }
}

TEST(Emit, AggregateCsvRoundTrip) {
    std::map<int, inertia::TurnAggregate> agg = {{2, {0.1, 1.0 / 3.0, 7}}, {3, {0.123456789012345, 0.0, 1}}};
    const auto back = aggregate_from_csv(emit_aggregate(agg, Format::csv));
    ASSERT_EQ(back.size(), 2u);
    for (const auto& [t, a] : agg) {
        EXPECT_EQ(back.at(t).mean_jaccard, a.mean_jaccard);
        EXPECT_EQ(back.at(t).mean_cosine, a.mean_cosine);
        EXPECT_EQ(back.at(t).n, a.n);
    }
}

TEST(Emit, EmptyProfileIsHeaderOnly) {
    EXPECT_EQ(emit_profile(TurnFailureProfile{}, Format::csv), "turn,training_frequency,failure_rate,failures,n\n");
    EXPECT_EQ(emit_aggregate({}, Format::csv), "turn,mean_jaccard,mean_cosine,n\n");
}

TEST(Emit, ByteStable) {
    const auto r = fixtures::synthetic_run(100, 70, 60);
    const auto s = summarize_run(r.verdicts, r.judgements, {"m", "t", "s"});
    for (auto f : {Format::json, Format::csv, Format::markdown}) EXPECT_EQ(emit_summaries({s}, f), emit_summaries({s}, f));
    fixtures::TempDir dir;
    emit_to_file(dir / "a.md", emit_summaries({s}, Format::markdown));
    emit_to_file(dir / "b.md", emit_summaries({s}, Format::markdown));
    EXPECT_EQ(jsonl::read_file(dir / "a.md"), jsonl::read_file(dir / "b.md"));
}

TEST(Csv, QuotingRoundTrip) {
    const std::vector<csv::Row> rows = {{"a,b", "say \"hi\"", "line\nbreak", ""}, {"plain", "두통", "x", "y"}};
    EXPECT_EQ(csv::parse(csv::format(rows)), rows);
    EXPECT_THROW(csv::parse("\"unterminated\n"), SchemaError);
}

TEST(Csv, ShortestDoubleRoundTrips) {
    turnkit::random::SplitMix64 rng(2);
    for (int i = 0; i < 1000; ++i) {
        const double v = static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
        EXPECT_EQ(csv::parse_double(csv::format_double(v)), v);
    }
}
