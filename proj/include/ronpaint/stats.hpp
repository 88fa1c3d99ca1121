#pragma once

// Scalar statistics: confusion-matrix metrics, rank-based ROC AUC, Spearman
// rank correlation, Welch's two-sample t-test and the regularized incomplete
// beta function behind their p-values. Ties always get midranks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ronpaint/dataset.hpp"
#include "ronpaint/error.hpp"

namespace ronpaint::stats {

struct BinaryMetrics {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;

    static BinaryMetrics from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
        BinaryMetrics m{tp, fp, tn, fn, 0.0, 0.0, 0.0};
        const std::size_t total = tp + fp + tn + fn;
        m.accuracy = total ? static_cast<double>(tp + tn) / static_cast<double>(total) : 0.0;
        m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        return m;
    }
};

/// Confusion-matrix metrics with 1 as the positive class.
inline BinaryMetrics binary_metrics(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual) {
    if (predicted.size() != actual.size()) throw InputError("prediction and label vectors differ in length");
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i]) {
            (actual[i] ? tp : fp)++;
        } else {
            (actual[i] ? fn : tn)++;
        }
    }
    return BinaryMetrics::from_counts(tp, fp, tn, fn);
}

struct Summary {
    double min = 0.0, max = 0.0, mean = 0.0, variance = 0.0;
};

/// Population (divide-by-n) summary.
inline Summary summarize(std::span<const double> v) {
    if (v.empty()) throw InputError("cannot summarize an empty sample");
    Summary s;
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / static_cast<double>(v.size());
    return s;
}

struct FeatureMetricsReport {
    std::vector<BinaryMetrics> per_feature;
    Summary accuracy, precision, recall;
};

/// Scores every fingerprint bit as a standalone classifier that predicts high
/// when the bit is set.
inline FeatureMetricsReport per_feature_metrics(const Dataset& data) {
    if (data.empty()) throw InputError("per-feature metrics need a non-empty dataset");
    const auto labels = data.labels();
    FeatureMetricsReport report;
    std::vector<double> acc, prec, rec;
    std::vector<std::uint8_t> column(data.size());
    for (std::size_t j = 0; j < data.n_features(); ++j) {
        for (std::size_t i = 0; i < data.size(); ++i) column[i] = data.row(i).fingerprint.bits[j];
        auto m = binary_metrics(column, labels);
        acc.push_back(m.accuracy);
        prec.push_back(m.precision);
        rec.push_back(m.recall);
        report.per_feature.push_back(m);
    }
    if (!acc.empty()) {
        report.accuracy = summarize(acc);
        report.precision = summarize(prec);
        report.recall = summarize(rec);
    }
    return report;
}

inline std::string format_summary_line(const std::string& metric, const Summary& s) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: min %.2f, max %.2f, mean %.2f, variance %.2f", metric.c_str(), s.min, s.max,
                  s.mean, s.variance);
    return buf;
}

inline std::string format_feature_summary(const FeatureMetricsReport& r) {
    return format_summary_line("accuracy", r.accuracy) + "\n" + format_summary_line("precision", r.precision) + "\n" +
           format_summary_line("recall", r.recall) + "\n";
}

/// 1-based ranks; tied values share the mean of the ranks they span.
inline std::vector<double> midranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
        i = j;
    }
    return ranks;
}

/// Mann-Whitney AUC: (R_pos - n_pos(n_pos+1)/2) / (n_pos n_neg).
inline double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw InputError("scores and labels differ in length");
    const auto ranks = midranks(scores);
    double rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i]) {
            rank_sum += ranks[i];
            ++n_pos;
        }
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw InputError("ROC AUC needs both classes");
    const double np = static_cast<double>(n_pos);
    return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz.
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 20000;
    constexpr double kEps = 4.0 * std::numeric_limits<double>::epsilon();
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw InvariantError("incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1].
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw InputError("incomplete beta needs a, b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("incomplete beta needs x in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// p-values are reported in (0, 1]; an underflowing tail is clamped to the
/// smallest positive normal double.
inline double clamp_p(double p) { return std::clamp(p, std::numeric_limits<double>::min(), 1.0); }

/// Two-sided Student-t tail probability P(|T| >= |t|) at df degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw InputError("t distribution needs df > 0");
    if (std::isinf(t)) return clamp_p(0.0);
    if (t == 0.0) return 1.0;
    return clamp_p(regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t)));
}

struct RankCorrelation {
    double rho = 0.0;
    double t_statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

namespace detail {

inline double pearson(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw InputError("rank correlation is undefined for a constant vector");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace detail

/// Spearman's rho as the Pearson correlation of midranks. Without ties this
/// reduces to 1 - 6 sum(d^2) / (n(n^2 - 1)), which is evaluated directly from
/// the integer rank differences.
inline RankCorrelation spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("spearman needs equal-length inputs");
    if (x.size() < 3) throw InputError("spearman needs at least 3 observations");
    const auto rx = midranks(x), ry = midranks(y);
    auto distinct = [](std::vector<double> r) {
        std::sort(r.begin(), r.end());
        return std::adjacent_find(r.begin(), r.end()) == r.end();
    };
    const bool tie_free = distinct(rx) && distinct(ry);

    RankCorrelation out;
    out.n = x.size();
    const double n = static_cast<double>(out.n);
    if (tie_free) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < rx.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
        const double denom = n * (n * n - 1.0);
        out.rho = (denom - 6.0 * d2) / denom;
    } else {
        out.rho = detail::pearson(rx, ry);
    }

    const double df = n - 2.0;
    if (std::fabs(out.rho) >= 1.0) {
        out.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), out.rho);
        out.p_value = clamp_p(0.0);
    } else {
        out.t_statistic = out.rho * std::sqrt(df / (1.0 - out.rho * out.rho));
        out.p_value = student_t_two_sided_p(out.t_statistic, df);
    }
    return out;
}

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;
    std::string method = "welch";
};

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of freedom.
inline TTestResult two_sample_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw InputError("t-test needs at least 2 observations per sample");
    auto mean_var = [](std::span<const double> v) {
        const double n = static_cast<double>(v.size());
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return std::pair{m, ss / (n - 1.0)};
    };
    const auto [ma, va] = mean_var(a);
    const auto [mb, vb] = mean_var(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double sa = va / na, sb = vb / nb;
    TTestResult r;
    if (sa + sb == 0.0) {
        if (ma == mb) throw InputError("t-test undefined: both samples constant with equal means");
        r.t = std::copysign(std::numeric_limits<double>::infinity(), ma - mb);
        r.df = na + nb - 2.0;
        r.p_value = clamp_p(0.0);
        return r;
    }
    r.t = (ma - mb) / std::sqrt(sa + sb);
    r.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    r.p_value = student_t_two_sided_p(r.t, r.df);
    return r;
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

/// Mean and population standard deviation.
inline MeanStd mean_std(std::span<const double> v) {
    if (v.empty()) throw InputError("mean of an empty sample");
    auto s = summarize(v);
    return {s.mean, std::sqrt(s.variance)};
}

/// "83.41% (+/- 3.61)": proportions rendered as percentages.
inline std::string format_percent(const MeanStd& m) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f%% (+/- %.2f)", 100.0 * m.mean, 100.0 * m.std);
    return buf;
}

/// "0.84 (+/- 0.04)"
inline std::string format_plain(const MeanStd& m) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f (+/- %.2f)", m.mean, m.std);
    return buf;
}

/// "P < 0.01" below the threshold, otherwise "P = 0.787".
inline std::string format_p(double p) {
    char buf[48];
    if (p < 0.001)
        std::snprintf(buf, sizeof buf, "P < 0.001");
    else if (p < 0.01)
        std::snprintf(buf, sizeof buf, "P < 0.01");
    else
        std::snprintf(buf, sizeof buf, "P = %.3f", p);
    return buf;
}

}  // namespace ronpaint::stats
