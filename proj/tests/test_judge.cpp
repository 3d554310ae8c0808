#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "turnkit/agreement.hpp"
#include "turnkit/judge.hpp"

using namespace turnkit;
using namespace turnkit::judge;
using client::FunctionClient;
using client::MockClient;

namespace {

double unit(turnkit::random::SplitMix64& rng) { return static_cast<double>(rng.next() >> 11) * 0x1.0p-53; }

const auto kNoSleep = [](std::chrono::milliseconds) {};

// Rule-based stand-in judge: a question fails when the same question text
// already appears in the earlier conversation.
std::string repeat_judge(const client::Messages& m) {
    const auto& user = m.at(1).content;
    const auto split = user.find("\nQuestion to evaluate");
    const auto history = user.substr(0, split);
    const auto judged = user.substr(user.find("question: ", split));
    const auto question = judged.substr(0, judged.find('\n'));
    if (history.find(question) != std::string::npos) return "verdict: fail\nrationale: repeats an earlier question";
    return "verdict: pass\nrationale: new information";
}

corpus::Dialogue dialogue_with_questions(const std::vector<std::string>& questions) {
    corpus::Dialogue d;
    d.id = "d";
    for (const auto& q : questions) corpus::add_turn(d, fixtures::yaml_turn(q, {"예", "아니요"})).patient_answer = "예";
    return d;
}

std::vector<int> labels(size_t both_pass, size_t a_only, size_t b_only, size_t both_fail, bool first) {
    std::vector<int> out;
    auto add = [&](size_t n, int a, int b) { out.insert(out.end(), n, first ? a : b); };
    add(both_pass, 1, 1);
    add(a_only, 1, 0);
    add(b_only, 0, 1);
    add(both_fail, 0, 0);
    return out;
}

}  // namespace

TEST(ParseOutput, Variants) {
    EXPECT_EQ(parse_judge_output("verdict: pass\nrationale: asks about onset").verdict, Verdict::pass);
    const auto p = parse_judge_output("Some preamble\nVERDICT: Fail\nRationale: repeats\n  turn 3's question\n");
    EXPECT_EQ(p.verdict, Verdict::fail);
    EXPECT_EQ(p.rationale, "repeats turn 3's question");
    EXPECT_EQ(parse_judge_output("verdict: pass").rationale, "");
}

TEST(ParseOutput, MalformedCarriesRaw) {
    for (const std::string raw : {"I think it is fine.", "verdict: maybe", "verdict: pass\nverdict: fail", ""}) {
        try {
            parse_judge_output(raw);
            FAIL() << raw;
        } catch (const JudgeParseError& e) {
            EXPECT_EQ(e.raw(), raw);
            EXPECT_EQ(e.kind(), "judge_parse");
        }
    }
}

TEST(JudgeTurn, MockVerdict) {
    MockClient m(std::vector<std::string>{"verdict: pass\nrationale: new symptom area"});
    const auto d = fixtures::make_dialogue("a", 3);
    const auto j = judge_turn(d, 2, m, {}, kNoSleep);
    EXPECT_EQ(j.turn, 2);
    EXPECT_EQ(j.clinical_utility, Verdict::pass);
    EXPECT_EQ(j.rationale, "new symptom area");
    const auto req = m.requests()[0];
    ASSERT_EQ(req.size(), 2u);
    EXPECT_EQ(req[0].content, kDefaultRubric);
    EXPECT_NE(req[1].content.find("[Turn 1]"), std::string::npos);
    EXPECT_EQ(req[1].content.find("[Turn 3]"), std::string::npos);  // later turns are not shown
    EXPECT_THROW(judge_turn(d, 4, m, {}, kNoSleep), InvalidArgument);
    EXPECT_THROW(judge_turn(d, 0, m, {}, kNoSleep), InvalidArgument);
}

TEST(JudgeTurn, MalformedOutputRaises) {
    MockClient m(std::vector<std::string>{"looks good to me"});
    try {
        judge_turn(fixtures::make_dialogue("a", 1), 1, m, {}, kNoSleep);
        FAIL();
    } catch (const JudgeParseError& e) {
        EXPECT_EQ(e.raw(), "looks good to me");
    }
}

TEST(JudgeTurn, ClientFailureAfterRetries) {
    MockClient m({MockClient::Reply::failure("x"), MockClient::Reply::failure("y"), MockClient::Reply::failure("z")});
    EXPECT_THROW(judge_turn(fixtures::make_dialogue("a", 1), 1, m, {}, kNoSleep), ClientError);
    EXPECT_EQ(m.calls(), 3u);
}

TEST(JudgeTurn, RuleBasedJudgeCatchesRepeat) {
    std::vector<std::string> qs;
    for (int i = 1; i <= 12; ++i) qs.push_back("질문 " + std::to_string(i) + " 있나요?");
    qs[9] = qs[3];  // turn 10 repeats turn 4
    const auto d = dialogue_with_questions(qs);
    const auto before = d;
    FunctionClient judge(repeat_judge);
    std::vector<TurnJudgement> all;
    for (int t = 1; t <= 12; ++t) all.push_back(judge_turn(d, t, judge, {}, kNoSleep));
    for (const auto& j : all) EXPECT_EQ(j.clinical_utility, j.turn == 10 ? Verdict::fail : Verdict::pass) << j.turn;
    EXPECT_EQ(d, before);
    EXPECT_EQ(compute_tcsr(all), Ratio(11, 12));
    // same inputs, same outputs
    for (int t = 1; t <= 12; ++t) EXPECT_EQ(judge_turn(d, t, judge, {}, kNoSleep).raw, all[t - 1].raw);
}

TEST(Tcsr, Counts) {
    std::vector<TurnJudgement> js;
    for (int i = 0; i < 12; ++i) js.push_back({i + 1, i < 9 ? Verdict::pass : Verdict::fail, "", ""});
    EXPECT_EQ(compute_tcsr(js), Ratio(9, 12));
    EXPECT_EQ(compute_tcsr(js).value(), 0.75);
    EXPECT_THROW(compute_tcsr({}), InvalidArgument);
}

TEST(Records, RoundTripAndErrorLinesRejected) {
    fixtures::TempDir dir;
    DialogueJudgement dj{"d1", {3, Verdict::fail, "repeats", "verdict: fail\nrationale: repeats"}};
    jsonl::write_records(dir / "j.jsonl", std::vector<ordered_json>{to_json(dj)});
    const auto back = load_judgements(dir / "j.jsonl");
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].dialogue_id, "d1");
    EXPECT_EQ(back[0].judgement.turn, 3);
    EXPECT_EQ(back[0].judgement.clinical_utility, Verdict::fail);
    jsonl::write_file(dir / "e.jsonl", R"({"dialogue_id":"d1","turn":1,"error":{"kind":"client","message":"x"}})" "\n");
    EXPECT_THROW(load_judgements(dir / "e.jsonl"), SchemaError);
}

TEST(Config, FromJson) {
    auto c = judge_config_from_json(json::parse(R"({"rubric": "be strict", "judge": {"kind": "mock", "script": ["verdict: pass"]}})"));
    EXPECT_EQ(c.rubric, "be strict");
    EXPECT_THROW(judge_config_from_json(json::parse(R"({"rubric": "  "})")), ConfigError);
    EXPECT_THROW(judge_config_from_json(json::parse(R"({"prompt": "x"})")), ConfigError);
}

TEST(Kappa, Fixtures) {
    const std::vector<std::string> same = {"pass", "fail", "pass", "pass"};
    EXPECT_EQ(cohen_kappa(same, same), 1.0);
    const std::vector<char> a = {'P', 'P', 'F', 'F'};
    const std::vector<char> b = {'P', 'F', 'P', 'F'};
    EXPECT_EQ(cohen_kappa(a, b), 0.0);
    const auto la = labels(183, 7, 8, 42, true);
    const auto lb = labels(183, 7, 8, 42, false);
    EXPECT_EQ(la.size(), 240u);
    EXPECT_NEAR(cohen_kappa(la, lb), 0.80912, 1e-5);
    EXPECT_THROW(cohen_kappa(std::vector<int>{1}, std::vector<int>{1, 0}), InvalidArgument);
    EXPECT_THROW(cohen_kappa(std::vector<int>{}, std::vector<int>{}), InvalidArgument);
    // a single shared label everywhere: chance agreement is total
    EXPECT_EQ(cohen_kappa(std::vector<int>{1, 1}, std::vector<int>{1, 1}), 1.0);
}

TEST(Kappa, MatchesOracleOnRandomPairs) {
    turnkit::random::SplitMix64 rng(100);
    for (int iter = 0; iter < 100; ++iter) {
        const size_t n = 1 + rng.below(300);
        const int k = 2 + static_cast<int>(rng.below(3));
        std::vector<int> a(n), b(n);
        for (size_t i = 0; i < n; ++i) {
            a[i] = static_cast<int>(rng.below(k));
            b[i] = rng.below(3) == 0 ? static_cast<int>(rng.below(k)) : a[i];
        }
        EXPECT_NEAR(cohen_kappa(a, b), static_cast<double>(oracles::kappa_oracle(a, b)), 1e-12);
    }
}

TEST(Kappa, RelabelInvariant) {
    turnkit::random::SplitMix64 rng(4);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<int> a(40), b(40);
        for (size_t i = 0; i < 40; ++i) {
            a[i] = static_cast<int>(rng.below(2));
            b[i] = static_cast<int>(rng.below(2));
        }
        std::vector<std::string> ra, rb;
        for (int x : a) ra.push_back(x ? "fail" : "pass");
        for (int x : b) rb.push_back(x ? "fail" : "pass");
        EXPECT_NEAR(cohen_kappa(a, b), cohen_kappa(ra, rb), 1e-15);
    }
}

TEST(Spearman, Monotone) {
    const std::vector<double> x = {1, 2, 3, 4, 5};
    EXPECT_DOUBLE_EQ(*spearman_rho(x, std::vector<double>{2, 4, 8, 16, 32}), 1.0);
    EXPECT_DOUBLE_EQ(*spearman_rho(x, std::vector<double>{9, 7, 5, 3, 1}), -1.0);
    EXPECT_FALSE(spearman_rho(x, std::vector<double>{3, 3, 3, 3, 3}));
    EXPECT_THROW(spearman_rho(std::vector<double>{1}, std::vector<double>{1}), InvalidArgument);
    EXPECT_THROW(spearman_rho(x, std::vector<double>{1, 2}), InvalidArgument);
}

TEST(Spearman, MatchesOracleOnRandomPairs) {
    turnkit::random::SplitMix64 rng(101);
    for (int iter = 0; iter < 100; ++iter) {
        const size_t n = 2 + rng.below(60);
        std::vector<double> x(n), y(n);
        const bool ties = iter % 2 == 0;
        for (size_t i = 0; i < n; ++i) {
            x[i] = ties ? static_cast<double>(rng.below(5)) : unit(rng);
            y[i] = ties ? static_cast<double>(rng.below(5)) : unit(rng);
        }
        const auto got = spearman_rho(x, y);
        const auto want = oracles::spearman_oracle(x, y);
        ASSERT_EQ(got.has_value(), want.has_value());
        if (got) {
            EXPECT_NEAR(*got, static_cast<double>(*want), 1e-12);
        }
    }
}

TEST(Spearman, InvariantUnderMonotoneTransform) {
    turnkit::random::SplitMix64 rng(9);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<double> x(20), y(20);
        for (size_t i = 0; i < 20; ++i) {
            x[i] = unit(rng);
            y[i] = unit(rng);
        }
        std::vector<double> tx;
        for (double v : x) tx.push_back(std::exp(3 * v) + 7);
        EXPECT_NEAR(*spearman_rho(x, y), *spearman_rho(tx, y), 1e-12);
    }
}

TEST(Spearman, TiesUseMidRanks) {
    EXPECT_EQ(average_ranks(std::vector<double>{10, 20, 20, 30}), (std::vector<double>{1, 2.5, 2.5, 4}));
    const std::vector<double> x = {1, 2, 2, 3};
    const std::vector<double> y = {1, 2, 3, 4};
    EXPECT_NEAR(*spearman_rho(x, y), static_cast<double>(*oracles::spearman_oracle(x, y)), 1e-12);
}
