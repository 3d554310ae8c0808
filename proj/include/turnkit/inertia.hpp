#pragma once

// Repetition-drift analysis of doctor questions.
//
// For every turn t >= 2 the series records the maximum Jaccard (token sets)
// and cosine (term-frequency or embedding vectors) similarity between the
// question at t and every earlier question. A dialogue is flagged when either
// similarity trends upward faster than a slope threshold, when the late turns
// stay above a level threshold, or when a question repeats verbatim after
// normalization.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/unistr.h>

#include "turnkit/corpus.hpp"
#include "turnkit/errors.hpp"
#include "turnkit/jsonl.hpp"
#include "turnkit/unicode.hpp"
#include "turnkit/validator.hpp"

namespace turnkit::inertia {

enum class Segmentation { unicode_words, whitespace };

struct TokenizerConfig {
    bool case_fold = true;
    Segmentation segmentation = Segmentation::unicode_words;
    bool strip_punctuation = true;
};

using TokenSet = std::set<std::string>;

namespace detail {

// Word boundaries per the Unicode word-break rules. One iterator per thread;
// creating one is far more expensive than resetting its text.
inline icu::BreakIterator& word_breaker() {
    thread_local std::unique_ptr<icu::BreakIterator> bi = [] {
        UErrorCode status = U_ZERO_ERROR;
        std::unique_ptr<icu::BreakIterator> it(icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
        if (U_FAILURE(status) || !it) throw Error("unicode", std::string("word break iterator: ") + u_errorName(status));
        return it;
    }();
    return *bi;
}

inline std::string to_utf8(const icu::UnicodeString& u) {
    std::string out;
    u.toUTF8String(out);
    return out;
}

}  // namespace detail

/// Tokens in text order.
inline std::vector<std::string> tokenize_sequence(std::string_view text, const TokenizerConfig& config = {}) {
    std::vector<std::string> tokens;
    auto emit = [&](std::string token) {
        if (token.empty()) return;
        tokens.push_back(config.case_fold ? unicode::fold(token) : std::move(token));
    };
    if (config.segmentation == Segmentation::whitespace) {
        std::u32string current;
        auto flush = [&] {
            emit(unicode::encode(current));
            current.clear();
        };
        for (char32_t c : unicode::decode(text)) {
            if (unicode::is_space(c)) flush();
            else if (!(config.strip_punctuation && unicode::is_punct_or_symbol(c))) current.push_back(c);
        }
        flush();
        return tokens;
    }
    // decode/encode first so ill-formed input becomes U+FFFD, as elsewhere
    const auto u = icu::UnicodeString::fromUTF8(unicode::encode(unicode::decode(text)));
    auto& bi = detail::word_breaker();
    bi.setText(u);
    int32_t start = bi.first();
    for (int32_t end = bi.next(); end != icu::BreakIterator::DONE; start = end, end = bi.next()) {
        const icu::UnicodeString segment(u, start, end - start);
        if (bi.getRuleStatus() >= UBRK_WORD_NONE_LIMIT) {
            emit(detail::to_utf8(segment));
        } else if (!config.strip_punctuation) {
            for (char32_t c : unicode::decode(detail::to_utf8(segment)))
                if (unicode::is_punct_or_symbol(c)) emit(unicode::encode(std::u32string(1, c)));
        }
    }
    return tokens;
}

inline TokenSet tokenize(std::string_view text, const TokenizerConfig& config = {}) {
    const auto seq = tokenize_sequence(text, config);
    return TokenSet(seq.begin(), seq.end());
}

/// Tokens re-joined with single spaces; the key for exact-repeat detection.
inline std::string normalize(std::string_view text, const TokenizerConfig& config = {}) {
    std::string out;
    for (const auto& t : tokenize_sequence(text, config)) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

inline double jaccard(const TokenSet& a, const TokenSet& b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    size_t inter = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else {
            ++inter;
            ++ia;
            ++ib;
        }
    }
    const size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

using TermCounts = std::map<std::string, long>;

inline TermCounts term_counts(std::string_view text, const TokenizerConfig& config = {}) {
    TermCounts counts;
    for (auto& t : tokenize_sequence(text, config)) ++counts[std::move(t)];
    return counts;
}

/// Cosine of two term-frequency vectors, clamped to [0,1]; 0 if either is empty.
inline double tf_cosine(const TermCounts& a, const TermCounts& b) {
    if (a.empty() || b.empty()) return 0.0;
    long dot = 0;
    long na = 0;
    long nb = 0;
    for (const auto& [_, c] : a) na += c * c;
    for (const auto& [_, c] : b) nb += c * c;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (ia->first < ib->first) ++ia;
        else if (ib->first < ia->first) ++ib;
        else {
            dot += ia->second * ib->second;
            ++ia;
            ++ib;
        }
    }
    // sqrt(na * nb) is exact when na == nb == dot, so identical texts give 1
    const double v = static_cast<double>(dot) / std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
    return std::clamp(v, 0.0, 1.0);
}

inline double vector_cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("embedding dimensions differ");
    if (std::equal(a.begin(), a.end(), b.begin(), b.end())) {
        bool zero = std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; });
        return zero ? 0.0 : 1.0;
    }
    double dot = 0;
    double na = 0;
    double nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

class EmbeddingError : public Error {
public:
    explicit EmbeddingError(const std::string& message) : Error("embedding", message) {}
};

/// External sentence-embedding backend. Implementations must tolerate
/// concurrent calls.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
};

/// Built-in term-frequency vectors unless a provider is set.
struct Vectorizer {
    TokenizerConfig tokenizer;
    std::shared_ptr<EmbeddingProvider> provider;
};

namespace detail {

inline std::vector<std::vector<double>> embed_checked(EmbeddingProvider& provider,
                                                      const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> vectors;
    try {
        vectors = provider.embed(texts);
    } catch (const EmbeddingError&) {
        throw;
    } catch (const std::exception& e) {
        throw EmbeddingError(e.what());
    }
    if (vectors.size() != texts.size()) throw EmbeddingError("provider returned wrong number of vectors");
    return vectors;
}

}  // namespace detail

inline double cosine(std::string_view a, std::string_view b, const Vectorizer& vectorizer = {}) {
    if (!vectorizer.provider) return tf_cosine(term_counts(a, vectorizer.tokenizer), term_counts(b, vectorizer.tokenizer));
    const auto v = detail::embed_checked(*vectorizer.provider, {std::string(a), std::string(b)});
    return vector_cosine(v[0], v[1]);
}

struct SeriesPoint {
    int turn = 2;
    double max_jaccard = 0;
    double max_cosine = 0;

    friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

struct SimilaritySeries {
    std::string dialogue_id;
    std::vector<SeriesPoint> points;  ///< turns 2..n
};

/// Pairwise maximum similarity against all preceding questions.
inline SimilaritySeries similarity_series(const std::vector<std::string>& questions, const Vectorizer& vectorizer = {},
                                          std::string dialogue_id = {}) {
    if (questions.size() < 2) throw InvalidArgument("similarity series needs at least two questions");
    SimilaritySeries series;
    series.dialogue_id = std::move(dialogue_id);
    std::vector<TokenSet> sets;
    std::vector<TermCounts> counts;
    std::vector<std::vector<double>> embeddings;
    sets.reserve(questions.size());
    for (const auto& q : questions) {
        sets.push_back(tokenize(q, vectorizer.tokenizer));
        if (!vectorizer.provider) counts.push_back(term_counts(q, vectorizer.tokenizer));
    }
    if (vectorizer.provider) embeddings = detail::embed_checked(*vectorizer.provider, questions);
    for (size_t t = 1; t < questions.size(); ++t) {
        SeriesPoint p;
        p.turn = static_cast<int>(t) + 1;
        for (size_t s = 0; s < t; ++s) {
            p.max_jaccard = std::max(p.max_jaccard, jaccard(sets[t], sets[s]));
            const double c = vectorizer.provider ? vector_cosine(embeddings[t], embeddings[s])
                                                 : tf_cosine(counts[t], counts[s]);
            p.max_cosine = std::max(p.max_cosine, c);
        }
        series.points.push_back(p);
    }
    return series;
}

/// Ordinary least-squares slope of y against x.
inline double trend_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("slope inputs differ in length");
    if (x.size() < 2) throw InvalidArgument("slope needs at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0;
    double sxx = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw InvalidArgument("slope is undefined when all x are equal");
    return sxy / sxx;
}

enum class Metric { jaccard, cosine };

inline double trend_slope(const SimilaritySeries& series, Metric metric) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& p : series.points) {
        x.push_back(p.turn);
        y.push_back(metric == Metric::jaccard ? p.max_jaccard : p.max_cosine);
    }
    return trend_slope(x, y);
}

struct InertiaThresholds {
    double slope_threshold = 0.03;  ///< per turn
    double level_threshold = 0.6;
    size_t window = 3;
};

struct InertiaReport {
    std::string dialogue_id;
    SimilaritySeries series;
    double jaccard_slope = 0;
    double cosine_slope = 0;
    double late_window_mean = 0;
    std::vector<int> exact_repeat_turns;
    bool flagged = false;
};

/// Turns (1-based) whose normalized question equals an earlier one.
inline std::vector<int> exact_repeats(const std::vector<std::string>& questions, const TokenizerConfig& config = {}) {
    std::vector<int> turns;
    std::set<std::string> seen;
    for (size_t i = 0; i < questions.size(); ++i) {
        auto key = normalize(questions[i], config);
        if (key.empty()) continue;
        if (!seen.insert(std::move(key)).second) turns.push_back(static_cast<int>(i) + 1);
    }
    return turns;
}

/// Slopes need two series points; shorter series report a slope of 0.
/// The late-window mean averages max(jaccard, cosine) over the last `window`
/// series points.
inline InertiaReport detect_inertia(const SimilaritySeries& series, const InertiaThresholds& thresholds,
                                    const std::vector<std::string>& questions, const TokenizerConfig& tokenizer = {}) {
    InertiaReport r;
    r.dialogue_id = series.dialogue_id;
    r.series = series;
    if (series.points.size() >= 2) {
        r.jaccard_slope = trend_slope(series, Metric::jaccard);
        r.cosine_slope = trend_slope(series, Metric::cosine);
    }
    const size_t w = std::min(thresholds.window, series.points.size());
    if (w > 0) {
        double sum = 0;
        for (size_t i = series.points.size() - w; i < series.points.size(); ++i)
            sum += std::max(series.points[i].max_jaccard, series.points[i].max_cosine);
        r.late_window_mean = sum / static_cast<double>(w);
    }
    r.exact_repeat_turns = exact_repeats(questions, tokenizer);
    r.flagged = r.jaccard_slope > thresholds.slope_threshold || r.cosine_slope > thresholds.slope_threshold ||
                r.late_window_mean > thresholds.level_threshold || !r.exact_repeat_turns.empty();
    return r;
}

/// Question text per turn: the parsed question when the turn parses under
/// `rules`, otherwise the raw doctor output.
inline std::vector<std::string> extract_questions(const corpus::Dialogue& d, const validator::FormatRules& rules) {
    std::vector<std::string> out;
    for (const auto& t : d.turns) {
        if (t.doctor_parsed) {
            out.push_back(t.doctor_parsed->question);
            continue;
        }
        auto parsed = validator::parse_structured_response(t.doctor_raw, rules);
        if (auto* p = std::get_if<corpus::ParsedResponse>(&parsed)) out.push_back(p->question);
        else out.push_back(t.doctor_raw);
    }
    return out;
}

/// Runs the full analysis on one dialogue. Dialogues with fewer than two
/// turns yield an empty, unflagged report.
inline InertiaReport analyze_dialogue(const corpus::Dialogue& d, const Vectorizer& vectorizer,
                                      const InertiaThresholds& thresholds, const validator::FormatRules& rules) {
    const auto questions = extract_questions(d, rules);
    if (questions.size() < 2) {
        InertiaReport r;
        r.dialogue_id = d.id;
        r.series.dialogue_id = d.id;
        return r;
    }
    return detect_inertia(similarity_series(questions, vectorizer, d.id), thresholds, questions, vectorizer.tokenizer);
}

struct TurnAggregate {
    double mean_jaccard = 0;
    double mean_cosine = 0;
    size_t n = 0;
};

inline std::map<int, TurnAggregate> aggregate_by_turn(const std::vector<SimilaritySeries>& series_list) {
    std::map<int, TurnAggregate> acc;
    for (const auto& s : series_list) {
        for (const auto& p : s.points) {
            auto& a = acc[p.turn];
            a.mean_jaccard += p.max_jaccard;
            a.mean_cosine += p.max_cosine;
            ++a.n;
        }
    }
    for (auto& [_, a] : acc) {
        a.mean_jaccard /= static_cast<double>(a.n);
        a.mean_cosine /= static_cast<double>(a.n);
    }
    return acc;
}

inline ordered_json to_json(const InertiaReport& r) {
    ordered_json j;
    j["dialogue_id"] = r.dialogue_id;
    auto pts = ordered_json::array();
    for (const auto& p : r.series.points) {
        ordered_json pj;
        pj["turn"] = p.turn;
        pj["max_jaccard"] = p.max_jaccard;
        pj["max_cosine"] = p.max_cosine;
        pts.push_back(std::move(pj));
    }
    j["series"] = std::move(pts);
    j["jaccard_slope"] = r.jaccard_slope;
    j["cosine_slope"] = r.cosine_slope;
    j["late_window_mean"] = r.late_window_mean;
    j["exact_repeat_turns"] = r.exact_repeat_turns;
    j["flagged"] = r.flagged;
    return j;
}

inline TokenizerConfig tokenizer_from_json(const json& j) {
    TokenizerConfig c;
    if (!j.is_object()) throw ConfigError("tokenizer config must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "case_fold") c.case_fold = value.get<bool>();
        else if (key == "strip_punctuation") c.strip_punctuation = value.get<bool>();
        else if (key == "segmentation") {
            const auto s = value.get<std::string>();
            if (s == "unicode-words") c.segmentation = Segmentation::unicode_words;
            else if (s == "whitespace") c.segmentation = Segmentation::whitespace;
            else throw ConfigError("unknown segmentation '" + s + "'");
        } else throw ConfigError("unknown tokenizer field '" + key + "'");
    }
    return c;
}

}  // namespace turnkit::inertia
