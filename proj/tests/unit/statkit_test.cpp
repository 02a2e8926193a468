#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <provgraph/statkit.hpp>

using namespace provgraph;
using namespace provgraph::stats;

namespace {

const double NaN = std::nan("");

// U for a by direct pair counting, p by enumerating every split of the pooled sample
std::pair<double, double> brute_mwu(const std::vector<double> &a, const std::vector<double> &b) {
    auto u_of = [](const std::vector<double> &x, const std::vector<double> &y) {
        double u = 0;
        for (double p : x)
            for (double q : y) u += p > q ? 1.0 : p == q ? 0.5 : 0.0;
        return u;
    };
    std::vector<double> pool(a);
    pool.insert(pool.end(), b.begin(), b.end());
    const size_t n = pool.size(), na = a.size();
    const double mu = double(na) * double(b.size()) / 2, obs = u_of(a, b);
    size_t all = 0, ext = 0;
    for (uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (size_t(__builtin_popcount(mask)) != na) continue;
        std::vector<double> x, y;
        for (size_t i = 0; i < n; ++i) (mask >> i & 1 ? x : y).push_back(pool[i]);
        ++all;
        if (std::fabs(u_of(x, y) - mu) >= std::fabs(obs - mu) - 1e-9) ++ext;
    }
    return {obs, double(ext) / double(all)};
}

}  // namespace

TEST(MannWhitney, SeparatedSamples) {
    auto r = mann_whitney_u({1, 2, 3}, {4, 5, 6});
    EXPECT_DOUBLE_EQ(r.statistic, 0.0);
    EXPECT_NEAR(r.p_value, 0.1, 1e-12);  // scipy exact
}

TEST(MannWhitney, IdenticalSamples) {
    auto r = mann_whitney_u({1, 2, 3, 4}, {1, 2, 3, 4});
    EXPECT_GE(r.p_value, 0.99);
}

TEST(MannWhitney, TiesMatchEnumeration) {
    auto r = mann_whitney_u({1, 2}, {2, 3});
    auto [u, p] = brute_mwu({1, 2}, {2, 3});
    EXPECT_DOUBLE_EQ(r.statistic, u);
    EXPECT_NEAR(r.p_value, p, 1e-12);
}

TEST(MannWhitney, ExactAgainstScipy) {
    auto r = mann_whitney_u({1.2, 3.4, 2.2, 5.0, 0.3}, {2.5, 4.1, 6.0, 3.9, 7.2, 5.5});
    EXPECT_DOUBLE_EQ(r.statistic, 4.0);
    EXPECT_NEAR(r.p_value, 0.05194805194805195, 1e-12);
}

TEST(MannWhitney, AsymptoticAgainstScipy) {
    std::vector<double> a, b;
    for (int i = 0; i < 20; ++i) a.push_back(i / 19.0);
    for (int i = 0; i < 15; ++i) b.push_back(0.3 + 1.2 * i / 14.0);
    auto r = mann_whitney_u(a, b);
    EXPECT_DOUBLE_EQ(r.statistic, 66.0);
    EXPECT_NEAR(r.p_value, 0.00538034975399193, 1e-9);

    std::vector<double> ta{1, 2, 2, 3, 3, 3, 4, 5, 5, 6}, tb{3, 4, 4, 5, 6, 6, 7, 7, 8, 8};
    ta.insert(ta.end(), ta.begin(), ta.end());
    tb.insert(tb.end(), tb.begin(), tb.end());
    auto t = mann_whitney_u(ta, tb);
    EXPECT_DOUBLE_EQ(t.statistic, 62.0);
    EXPECT_NEAR(t.p_value, 0.00017102257061165702, 1e-9);
}

TEST(MannWhitney, ExhaustiveSmallSamples) {
    std::mt19937 gen(7);
    std::uniform_int_distribution<int> val(1, 5), len(1, 4);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> a(len(gen)), b(len(gen));
        for (auto &x : a) x = val(gen);
        for (auto &x : b) x = val(gen);
        auto r = mann_whitney_u(a, b);
        auto [u, p] = brute_mwu(a, b);
        ASSERT_DOUBLE_EQ(r.statistic, u);
        ASSERT_NEAR(r.p_value, p, 1e-9);
        auto rb = mann_whitney_u(b, a);
        ASSERT_DOUBLE_EQ(r.statistic + rb.statistic, double(a.size() * b.size()));
        ASSERT_GE(r.p_value, 0.0);
        ASSERT_LE(r.p_value, 1.0);
    }
}

TEST(MannWhitney, EmptySample) { EXPECT_THROW(mann_whitney_u({}, {1}), Error); }

TEST(CohensD, TableValues) {
    EXPECT_NEAR(cohens_d(2.50, 0.55, 6, 3.80, 0.45, 5), 2.57, 0.05);
    EXPECT_NEAR(cohens_d(2.35, 0.70, 17, 4.00, 1.08, 18), 1.79, 0.05);
    EXPECT_DOUBLE_EQ(cohens_d(3.0, 1.0, 10, 3.0, 0.5, 10), 0.0);
}

TEST(CohensD, SignFlipsUnderSwap) {
    std::vector<double> a{1, 2, 3, 4}, b{3, 4, 5, 7};
    EXPECT_DOUBLE_EQ(cohens_d(a, b), -cohens_d(b, a));
}

TEST(CohensD, NeedsTwoPerGroup) { EXPECT_THROW(cohens_d(1, 1, 1, 2, 1, 5), Error); }

TEST(Bootstrap, ConstantIsDegenerate) {
    auto [lo, hi] = bootstrap_ci(std::vector<double>(20, 0.7));
    EXPECT_DOUBLE_EQ(lo, 0.7);
    EXPECT_DOUBLE_EQ(hi, 0.7);
}

TEST(Bootstrap, SeedDeterministic) {
    std::vector<double> v;
    for (int i = 0; i < 40; ++i) v.push_back(std::sin(i * 1.7) + i * 0.01);
    EXPECT_EQ(bootstrap_ci(v, mean, 2000, 42), bootstrap_ci(v, mean, 2000, 42));
    EXPECT_NE(bootstrap_ci(v, mean, 2000, 42), bootstrap_ci(v, mean, 2000, 43));
}

TEST(Bootstrap, BinomialSanity) {
    // 400 zeros and 400 ones: percentile interval close to p +/- 1.96 sqrt(p(1-p)/n)
    std::vector<double> v(800, 0.0);
    std::fill(v.begin(), v.begin() + 400, 1.0);
    auto [lo, hi] = bootstrap_ci(v);
    const double half = 1.959963984540054 * std::sqrt(0.25 / 800);
    EXPECT_NEAR(lo, 0.5 - half, 0.006);
    EXPECT_NEAR(hi, 0.5 + half, 0.006);
    EXPECT_LE(lo, hi);
}

TEST(Bootstrap, EmptyInput) { EXPECT_THROW(bootstrap_ci({}), Error); }

TEST(BenjaminiHochberg, StepUp) {
    auto q = bh_correct({0.01, 0.02, 0.03, 0.04, 0.05});
    for (double x : q) EXPECT_NEAR(x, 0.05, 1e-12);
    // statsmodels fdr_bh
    auto q2 = bh_correct({0.04, 0.001, 0.03, 0.2, 0.012, 0.5});
    std::vector<double> want{0.06, 0.006, 0.06, 0.24, 0.036, 0.5};
    for (size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(q2[i], want[i], 1e-12);
}

TEST(BenjaminiHochberg, TrivialCases) {
    EXPECT_DOUBLE_EQ(bh_correct({0.3})[0], 0.3);
    for (double x : bh_correct({0.2, 0.2, 0.2})) EXPECT_DOUBLE_EQ(x, 0.2);
    EXPECT_THROW(bh_correct({0.5, 1.2}), Error);
}

TEST(BenjaminiHochberg, MonotoneAndAboveRaw) {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> p(12);
        for (auto &x : p) x = u(gen);
        auto q = bh_correct(p);
        std::vector<size_t> idx(p.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return p[a] < p[b]; });
        for (size_t k = 0; k < idx.size(); ++k) {
            EXPECT_GE(q[idx[k]], p[idx[k]]);
            if (k) EXPECT_GE(q[idx[k]], q[idx[k - 1]]);
        }
    }
}

TEST(Wilson, Intervals) {
    auto a = wilson_ci(12, 15);
    EXPECT_NEAR(a.first, 0.548, 0.001);
    EXPECT_NEAR(a.second, 0.930, 0.001);
    auto b = wilson_ci(2, 15);
    EXPECT_NEAR(b.first, 0.037, 0.001);
    EXPECT_NEAR(b.second, 0.379, 0.001);
    // statsmodels proportion_confint(method="wilson")
    EXPECT_NEAR(a.first, 0.5481455128483064, 1e-9);
    EXPECT_NEAR(b.second, 0.3788198283232237, 1e-9);
    auto z = wilson_ci(0, 10);
    EXPECT_DOUBLE_EQ(z.first, 0.0);
    EXPECT_NEAR(z.second, 0.27753279986288926, 1e-9);
    EXPECT_THROW(wilson_ci(3, 2), Error);
}

TEST(Krippendorff, PerfectAgreement) {
    EXPECT_DOUBLE_EQ(krippendorff_alpha({{1, 2, 3, 4}, {1, 2, 3, 4}, {1, 2, 3, 4}}), 1.0);
}

TEST(Krippendorff, MaximalDisagreement) {
    EXPECT_LE(krippendorff_alpha({{1, 1, 1, 1}, {2, 2, 2, 2}}, Metric::Nominal), 0.0);
}

TEST(Krippendorff, ThreeRaterFixture) {
    // krippendorff 0.8.2 reference package
    std::vector<std::vector<double>> r{{1, 2, 3, 3, 2}, {1, 2, 3, 3, 2}, {NaN, 3, 3, 3, 2}};
    EXPECT_NEAR(krippendorff_alpha(r, Metric::Nominal), 0.7796610169491526, 1e-9);
    EXPECT_NEAR(krippendorff_alpha(r, Metric::Ordinal), 0.8231292517006803, 1e-9);
    EXPECT_NEAR(krippendorff_alpha(r, Metric::Interval), 0.8712871287128713, 1e-9);

    std::vector<std::vector<double>> r2{{1, 2, 3, 4, 5, 1, 2}, {1, 3, 3, 4, 4, 2, 2}, {2, 2, 3, 5, 5, 1, NaN}};
    EXPECT_NEAR(krippendorff_alpha(r2, Metric::Nominal), 0.39490445859872614, 1e-9);
    EXPECT_NEAR(krippendorff_alpha(r2, Metric::Ordinal), 0.8605367008681926, 1e-9);
    EXPECT_NEAR(krippendorff_alpha(r2, Metric::Interval), 0.8671328671328671, 1e-9);
}

TEST(Krippendorff, NeedsOverlap) {
    EXPECT_THROW(krippendorff_alpha({{1, 2}}), Error);
    EXPECT_THROW(krippendorff_alpha({{1, NaN}, {NaN, 2}}), Error);
}

TEST(WeightedKappa, Textbook) {
    // sklearn cohen_kappa_score(weights="quadratic")
    std::vector<double> a{1, 1, 1, 2, 2, 3, 3, 3, 2, 1, 3, 2}, b{1, 2, 1, 2, 3, 3, 2, 3, 2, 1, 3, 1};
    EXPECT_NEAR(weighted_kappa_quadratic(a, b), 0.75, 1e-12);
    std::vector<double> h{1, 2.5, 3, 4, 5, 4.5, 2}, g{1.5, 2.5, 3.5, 4, 4.5, 5, 1};
    EXPECT_NEAR(weighted_kappa_quadratic(h, g), 0.9237057220708447, 1e-9);
}

TEST(WeightedKappa, IdentityAndIndependence) {
    std::vector<double> a{1, 2, 3, 4, 5, 3};
    EXPECT_DOUBLE_EQ(weighted_kappa_quadratic(a, a), 1.0);
    // fully crossed design: joint = product of marginals
    std::vector<double> x, y;
    for (int i = 1; i <= 5; ++i)
        for (int j = 1; j <= 5; ++j) x.push_back(i), y.push_back(j);
    EXPECT_NEAR(weighted_kappa_quadratic(x, y), 0.0, 1e-12);
    EXPECT_THROW(weighted_kappa_quadratic({1, 2}, {1}), Error);
}

TEST(Icc, AnovaFixtures) {
    // pingouin ICC(A,1)
    EXPECT_NEAR(icc_2_1({{9, 2}, {6, 1}, {8, 4}, {7, 1}, {10, 5}, {6, 2}}), 0.125654, 1e-6);
    EXPECT_NEAR(icc_2_1({{4, 4, 3}, {2, 3, 2}, {5, 5, 4}, {3, 2, 3}, {4, 5, 5}}), 0.761905, 1e-6);
}

TEST(Icc, Properties) {
    EXPECT_DOUBLE_EQ(icc_2_1({{1, 1}, {3, 3}, {2, 2}, {5, 5}}), 1.0);
    EXPECT_LT(icc_2_1({{1, 2}, {3, 4}, {2, 3}, {5, 6}}), 1.0);
    EXPECT_THROW(icc_2_1({{1, 2}, {3, NaN}}), Error);
}

TEST(Spearman, TiesAgainstScipy) {
    auto r = spearman_rho({1, 2, 2, 3, 4, 5, 5, 6}, {2, 1, 3, 3, 5, 4, 6, 6});
    EXPECT_NEAR(r.statistic, 0.8902439024390245, 1e-12);
    EXPECT_NEAR(r.p_value, 0.003039295568488808, 1e-9);
    EXPECT_NEAR(pearson({1, 2, 2, 3, 4, 5, 5, 6}, {2, 1, 3, 3, 5, 4, 6, 6}), 0.879598994267085, 1e-12);
}

TEST(Spearman, Monotone) {
    EXPECT_NEAR(spearman_rho({1, 2, 3, 4}, {10, 20, 25, 40}).statistic, 1.0, 1e-12);
    EXPECT_NEAR(spearman_rho({1, 2, 3, 4}, {4, 3, 2, 1}).statistic, -1.0, 1e-12);
    EXPECT_THROW(spearman_rho({1, 2}, {1, 2}), Error);
}

TEST(Coefficients, Bounded) {
    std::mt19937 gen(11);
    std::uniform_int_distribution<int> v(1, 5);
    for (int t = 0; t < 40; ++t) {
        std::vector<double> a(10), b(10);
        for (auto &x : a) x = v(gen);
        for (auto &x : b) x = v(gen);
        EXPECT_LE(std::fabs(weighted_kappa_quadratic(a, b)), 1.0);
        EXPECT_LE(std::fabs(spearman_rho(a, b).statistic), 1.0 + 1e-12);
        double al = krippendorff_alpha({a, b});
        EXPECT_LE(al, 1.0);
        EXPECT_GE(al, -1.0);
        std::vector<std::vector<double>> m;
        for (size_t i = 0; i < a.size(); ++i) m.push_back({a[i], b[i]});
        double icc = icc_2_1(m);
        if (!std::isnan(icc)) EXPECT_LE(icc, 1.0);
    }
}
