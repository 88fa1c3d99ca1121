#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <numeric>
#include <random>

#include "ronpaint/stats.hpp"

using namespace ronpaint;
using namespace ronpaint::stats;

namespace {

using Float50 = boost::multiprecision::cpp_bin_float_50;
using Rational = boost::multiprecision::cpp_rational;

std::vector<std::uint8_t> hl(const std::string& s) {
    std::vector<std::uint8_t> out;
    for (char c : s) out.push_back(c == 'H' ? 1 : 0);
    return out;
}

// Brute-force AUC: fraction of (pos, neg) pairs ranked correctly, ties count half.
double pairwise_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] && !y[j]) {
                pairs += 1.0;
                wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
    return wins / pairs;
}

}  // namespace

TEST(BinaryMetrics, IdentityAndComplement) {
    const auto labels = hl("HHLHLLHL");
    auto same = binary_metrics(labels, labels);
    EXPECT_EQ(same.accuracy, 1.0);
    EXPECT_EQ(same.precision, 1.0);
    EXPECT_EQ(same.recall, 1.0);
    std::vector<std::uint8_t> flipped;
    for (auto v : labels) flipped.push_back(v ? 0 : 1);
    EXPECT_EQ(binary_metrics(flipped, labels).accuracy, 0.0);
}

TEST(BinaryMetrics, HandCountedConfusionMatrix) {
    auto m = binary_metrics(std::vector<std::uint8_t>{1, 1, 0, 0, 0, 0}, hl("HHHLLL"));
    EXPECT_EQ(m.tp, 2u);
    EXPECT_EQ(m.fn, 1u);
    EXPECT_EQ(m.fp, 0u);
    EXPECT_EQ(m.tn, 3u);
    EXPECT_EQ(m.accuracy, 5.0 / 6.0);
    EXPECT_EQ(m.precision, 1.0);
    EXPECT_EQ(m.recall, 2.0 / 3.0);
}

TEST(BinaryMetrics, ZeroDenominatorsAreZero) {
    auto m = binary_metrics(std::vector<std::uint8_t>{0, 0}, std::vector<std::uint8_t>{0, 0});
    EXPECT_EQ(m.precision, 0.0);
    EXPECT_EQ(m.recall, 0.0);
    EXPECT_EQ(m.accuracy, 1.0);
}

TEST(PerFeatureMetrics, ReportAndSummaryFormat) {
    auto labels = std::vector<RonClass>{RonClass::high, RonClass::high, RonClass::high,
                                        RonClass::low,  RonClass::low,  RonClass::low};
    std::vector<std::vector<std::uint8_t>> bits{{1, 1, 1}, {1, 1, 0}, {1, 0, 0}, {0, 0, 1}, {0, 0, 0}, {0, 0, 1}};
    auto data = Dataset::from_bits(bits, labels);
    auto r = per_feature_metrics(data);
    ASSERT_EQ(r.per_feature.size(), 3u);
    EXPECT_EQ(r.per_feature[0].accuracy, 1.0);
    EXPECT_EQ(r.per_feature[1].accuracy, 5.0 / 6.0);
    EXPECT_EQ(r.per_feature[1].precision, 1.0);
    EXPECT_EQ(r.per_feature[1].recall, 2.0 / 3.0);
    EXPECT_EQ(r.accuracy.max, 1.0);
    EXPECT_EQ(format_summary_line("accuracy", {0.24, 0.65, 0.51, 0.0}),
              "accuracy: min 0.24, max 0.65, mean 0.51, variance 0.00");
    EXPECT_NE(format_feature_summary(r).find("precision: min "), std::string::npos);
}

TEST(RocAuc, Examples) {
    EXPECT_EQ(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, hl("LLHH")), 1.0);
    EXPECT_EQ(roc_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, hl("LHLH")), 0.5);
    EXPECT_EQ(roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, hl("LLHH")), 0.75);
    EXPECT_THROW(roc_auc(std::vector<double>{0.1, 0.2}, hl("HH")), InputError);
}

TEST(RocAuc, MatchesPairwiseCountAndComplements) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> coarse(0, 6);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 4 + trial % 30;
        std::vector<double> s(n);
        std::vector<std::uint8_t> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = coarse(rng) / 6.0;  // coarse scores force ties
            y[i] = static_cast<std::uint8_t>(i % 2 == 0 ? 1 : (rng() % 2));
        }
        if (std::count(y.begin(), y.end(), 0) == 0) y[1] = 0;
        EXPECT_NEAR(roc_auc(s, y), pairwise_auc(s, y), 1e-12);

        std::vector<double> distinct(n), negated(n);
        std::iota(distinct.begin(), distinct.end(), 0.0);
        std::shuffle(distinct.begin(), distinct.end(), rng);
        std::transform(distinct.begin(), distinct.end(), negated.begin(), [](double v) { return -v; });
        EXPECT_NEAR(roc_auc(distinct, y) + roc_auc(negated, y), 1.0, 1e-12);
    }
}

TEST(Spearman, ExactOnAllPermutationsUpToSix) {
    for (int n = 3; n <= 6; ++n) {
        std::vector<double> x(n);
        std::iota(x.begin(), x.end(), 1.0);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 1);
        do {
            std::vector<double> y(perm.begin(), perm.end());
            long long d2 = 0;
            for (int i = 0; i < n; ++i) d2 += static_cast<long long>(perm[i] - (i + 1)) * (perm[i] - (i + 1));
            const Rational exact = Rational(1) - Rational(6 * d2, static_cast<long long>(n) * (n * n - 1));
            const double expected = exact.convert_to<double>();
            auto r = spearman(x, y);
            EXPECT_EQ(r.rho, expected) << "n=" << n;
            EXPECT_NEAR(ronpaint::stats::detail::pearson(midranks(x), midranks(y)), expected, 1e-12);
            EXPECT_EQ(r.n, static_cast<std::size_t>(n));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
}

TEST(Spearman, MonotoneAndReversed) {
    std::vector<double> x{0.3, 1.2, -4.0, 7.5, 2.2, 0.0};
    std::vector<double> y;
    for (double v : x) y.push_back(std::exp(v) * 3.0 + 1.0);
    EXPECT_EQ(spearman(x, y).rho, 1.0);
    std::vector<double> rev;
    for (double v : x) rev.push_back(-v);
    EXPECT_EQ(spearman(x, rev).rho, -1.0);
    EXPECT_GT(spearman(x, rev).p_value, 0.0);
}

TEST(Spearman, InvariantUnderMonotoneTransformWithTies) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> vals(0, 5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(12), y(12), fx(12);
        for (int i = 0; i < 12; ++i) {
            x[i] = vals(rng);
            y[i] = vals(rng);
            fx[i] = std::pow(x[i] + 1.0, 3.0) - 7.0;
        }
        if (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end()) continue;
        if (std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end()) continue;
        EXPECT_EQ(spearman(x, y).rho, spearman(fx, y).rho);
    }
}

TEST(Spearman, TStatisticAndErrors) {
    std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<double> y{2, 1, 4, 3, 6, 5, 8, 7};
    auto r = spearman(x, y);
    EXPECT_NEAR(r.t_statistic, r.rho * std::sqrt(6.0 / (1.0 - r.rho * r.rho)), 1e-12);
    EXPECT_GT(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
    EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InputError);
    EXPECT_THROW(spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), InputError);
}

TEST(IncompleteBeta, MatchesFiftyDigitOracle) {
    struct Point {
        double x, a, b;
    };
    const Point grid[] = {
        {0.01, 0.5, 0.5}, {0.1, 0.5, 0.5},  {0.5, 0.5, 0.5},   {0.9, 0.5, 0.5},   {0.99, 0.5, 0.5},
        {0.2, 1.0, 3.0},  {0.4, 2.5, 0.5},  {0.6, 3.0, 7.0},   {0.95, 4.0, 0.5},  {0.05, 0.5, 8.0},
        {0.3, 10.0, 0.5}, {0.7, 10.0, 10.0}, {0.5, 25.0, 0.5}, {0.8, 49.0, 0.5},  {0.98, 99.0, 0.5},
        {0.999, 99.0, 0.5}, {0.5, 1.0, 1.0}, {0.25, 2.0, 2.0}, {0.75, 0.7, 1.3},  {0.33, 15.0, 4.0},
        {0.62, 40.0, 30.0}, {0.01, 2.0, 50.0}, {0.9, 1.5, 0.5}, {0.45, 7.0, 0.5}, {0.999, 3.0, 0.5},
    };
    static_assert(std::size(grid) == 25);
    for (const auto& p : grid) {
        const Float50 oracle = boost::math::ibeta(Float50(p.a), Float50(p.b), Float50(p.x));
        EXPECT_NEAR(regularized_incomplete_beta(p.a, p.b, p.x), oracle.convert_to<double>(), 1e-8)
            << "x=" << p.x << " a=" << p.a << " b=" << p.b;
    }
    EXPECT_EQ(regularized_incomplete_beta(2.0, 3.0, 0.0), 0.0);
    EXPECT_EQ(regularized_incomplete_beta(2.0, 3.0, 1.0), 1.0);
    EXPECT_THROW(regularized_incomplete_beta(0.0, 1.0, 0.5), InputError);
}

TEST(WelchT, IdenticalSamples) {
    std::vector<double> a{1.0, 2.0, 4.0, 8.0};
    auto r = two_sample_t(a, a);
    EXPECT_EQ(r.t, 0.0);
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_EQ(r.method, "welch");
}

TEST(WelchT, SeparatedClusters) {
    auto r = two_sample_t(std::vector<double>{1, 1, 1.0001}, std::vector<double>{0, 0, 0.0001});
    EXPECT_GT(r.t, 100.0);
    EXPECT_LT(r.p_value, 0.01);
    EXPECT_GT(r.p_value, 0.0);
}

TEST(WelchT, AntisymmetryProperty) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(2 + trial % 9), b(2 + trial % 5);
        for (auto& v : a) v = nd(rng);
        for (auto& v : b) v = nd(rng) + 0.5;
        auto ab = two_sample_t(a, b), ba = two_sample_t(b, a);
        EXPECT_EQ(ab.t, -ba.t);
        EXPECT_EQ(ab.p_value, ba.p_value);
        EXPECT_EQ(ab.df, ba.df);
        EXPECT_GT(ab.p_value, 0.0);
        EXPECT_LE(ab.p_value, 1.0);
    }
}

TEST(WelchT, ErrorsAndDegenerateVariance) {
    EXPECT_THROW(two_sample_t(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), InputError);
    EXPECT_THROW(two_sample_t(std::vector<double>{2.0, 2.0}, std::vector<double>{2.0, 2.0}), InputError);
    auto r = two_sample_t(std::vector<double>{3.0, 3.0}, std::vector<double>{2.0, 2.0});
    EXPECT_TRUE(std::isinf(r.t));
    EXPECT_GT(r.p_value, 0.0);
}

TEST(WelchT, ModelAccuracyDistributionsAgainstReference) {
    // Two accuracy distributions with the reported means and spreads.
    std::mt19937_64 rng(20170811);
    std::normal_distribution<double> first(0.8779, 0.058), second(0.8341, 0.0361);
    std::vector<double> a(100), b(100);
    for (auto& v : a) v = first(rng);
    for (auto& v : b) v = second(rng);

    // Reference: long-double moments, Boost's Student-t CDF.
    auto moments = [](const std::vector<double>& v) {
        long double m = 0, s = 0;
        for (double x : v) m += x;
        m /= v.size();
        for (double x : v) s += (x - m) * (x - m);
        return std::pair<long double, long double>{m, s / (v.size() - 1)};
    };
    auto [ma, va] = moments(a);
    auto [mb, vb] = moments(b);
    const long double se2 = va / 100 + vb / 100;
    const double t_ref = static_cast<double>((ma - mb) / std::sqrt(se2));
    const double df_ref = static_cast<double>(se2 * se2 / ((va / 100) * (va / 100) / 99 + (vb / 100) * (vb / 100) / 99));
    boost::math::students_t_distribution<double> dist(df_ref);
    const double p_ref = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t_ref)));

    auto r = two_sample_t(a, b);
    EXPECT_NEAR(r.t, t_ref, 1e-9);
    EXPECT_NEAR(r.df, df_ref, 1e-9);
    EXPECT_NEAR(r.p_value, p_ref, 1e-8);
    EXPECT_GT(std::fabs(r.t), 4.5);
    EXPECT_LT(std::fabs(r.t), 8.5);
    EXPECT_LT(r.p_value, 0.001);
}

TEST(StudentT, PValueMatchesBoost) {
    for (double df : {1.0, 2.5, 10.0, 58.3, 198.0})
        for (double t : {0.1, 1.0, 2.0, 3.5, 6.41}) {
            boost::math::students_t_distribution<double> dist(df);
            EXPECT_NEAR(student_t_two_sided_p(t, df), 2.0 * boost::math::cdf(boost::math::complement(dist, t)), 1e-10);
        }
}

TEST(Formatting, MeanStdLayouts) {
    EXPECT_EQ(format_percent({0.8341, 0.0361}), "83.41% (+/- 3.61)");
    EXPECT_EQ(format_plain({0.84, 0.04}), "0.84 (+/- 0.04)");
    EXPECT_EQ(format_percent({1.0, 0.0}), "100.00% (+/- 0.00)");
    EXPECT_EQ(format_p(0.004), "P < 0.01");
    EXPECT_EQ(format_p(0.787), "P = 0.787");
    auto ms = mean_std(std::vector<double>{1.0, 3.0});
    EXPECT_EQ(ms.mean, 2.0);
    EXPECT_EQ(ms.std, 1.0);
}
