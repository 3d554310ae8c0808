#pragma once

// Inter-rater agreement statistics.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "turnkit/errors.hpp"

namespace turnkit::judge {

/// Cohen's kappa for two raters over the same items: (p_o - p_e) / (1 - p_e),
/// with p_e from the product of marginal frequencies. Returns 1 when chance
/// agreement is already perfect.
template <typename Label>
double cohen_kappa(std::span<const Label> a, std::span<const Label> b) {
    if (a.size() != b.size()) throw InvalidArgument("label lists differ in length");
    if (a.empty()) throw InvalidArgument("kappa needs at least one item");
    std::map<Label, size_t> margin_a;
    std::map<Label, size_t> margin_b;
    size_t agree = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        ++margin_a[a[i]];
        ++margin_b[b[i]];
        agree += a[i] == b[i];
    }
    const double n = static_cast<double>(a.size());
    const double p_o = static_cast<double>(agree) / n;
    double p_e = 0;
    for (const auto& [label, count] : margin_a) {
        auto it = margin_b.find(label);
        if (it != margin_b.end()) p_e += (static_cast<double>(count) / n) * (static_cast<double>(it->second) / n);
    }
    if (p_e >= 1.0) return 1.0;
    return (p_o - p_e) / (1.0 - p_e);
}

template <typename Label>
double cohen_kappa(const std::vector<Label>& a, const std::vector<Label>& b) {
    return cohen_kappa(std::span<const Label>(a), std::span<const Label>(b));
}

/// 1-based ranks; tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<size_t> order(values.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t i, size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(values.size());
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

/// Pearson correlation; nullopt when either input is constant.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("inputs differ in length");
    if (x.size() < 2) throw InvalidArgument("correlation needs at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0;
    double sxx = 0;
    double syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Spearman's rho with mean ranks for ties; nullopt when either input is
/// constant (the statistic is undefined).
inline std::optional<double> spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("inputs differ in length");
    if (x.size() < 2) throw InvalidArgument("spearman needs at least two points");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

inline std::optional<double> spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
    return spearman_rho(std::span<const double>(x), std::span<const double>(y));
}

struct AgreementStats {
    double kappa = 0;
    std::optional<double> spearman_rho;
    size_t n = 0;
};

}  // namespace turnkit::judge
