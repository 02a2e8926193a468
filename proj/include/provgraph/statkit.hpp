#pragma once

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "util.hpp"

namespace provgraph::stats {

struct TestResult {
    double statistic = 0;
    double p_value = 1;
    std::optional<std::pair<double, double>> ci;
    size_t n_a = 0, n_b = 0;
};

// mt19937_64 plus a rejection-sampled bounded draw, so seeded results
// don't depend on the standard library's distribution implementation
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}
    uint64_t next() { return eng_(); }
    uint64_t below(uint64_t n) {
        if (n == 0) throw Error("Rng::below(0)");
        const uint64_t lim = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % n;
        uint64_t x;
        do x = eng_(); while (x >= lim);
        return x % n;
    }
    template <class T>
    void shuffle(std::vector<T> &v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 eng_;
};

inline double mean(const std::vector<double> &v) {
    if (v.empty()) throw Error("mean of empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// sample SD, n-1 denominator
inline double sd(const std::vector<double> &v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v), ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// average ranks (1-based) for ties
inline std::vector<double> ranks(const std::vector<double> &v) {
    std::vector<size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (size_t i = 0; i < idx.size();) {
        size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

inline double normal_sf2(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

inline constexpr size_t kExactMwuCells = 64;

// two-sided; statistic is U for sample a
inline TestResult mann_whitney_u(const std::vector<double> &a, const std::vector<double> &b) {
    if (a.empty() || b.empty()) throw Error("mann_whitney_u: empty sample");
    const size_t na = a.size(), nb = b.size(), n = na + nb;
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    auto r = ranks(pooled);
    double ra = 0;
    for (size_t i = 0; i < na; ++i) ra += r[i];
    const double ua = ra - na * (na + 1) / 2.0;
    const double mu = na * nb / 2.0;

    TestResult res;
    res.statistic = ua;
    res.n_a = na;
    res.n_b = nb;

    if (na * nb <= kExactMwuCells) {
        // distribution of doubled rank sums over all C(n, na) subsets
        std::vector<int> r2(n);
        int total = 0;
        for (size_t i = 0; i < n; ++i) total += r2[i] = static_cast<int>(std::lround(2 * r[i]));
        std::vector<std::vector<double>> ways(na + 1, std::vector<double>(total + 1, 0.0));
        ways[0][0] = 1;
        for (size_t i = 0; i < n; ++i)
            for (size_t k = std::min(i + 1, na); k >= 1; --k)
                for (int s = total; s >= r2[i]; --s) ways[k][s] += ways[k - 1][s - r2[i]];
        double all = 0, extreme = 0;
        const double dev = std::fabs(ua - mu);
        for (int s = 0; s <= total; ++s) {
            double w = ways[na][s];
            if (w == 0) continue;
            all += w;
            double u = s / 2.0 - na * (na + 1) / 2.0;
            if (std::fabs(u - mu) >= dev - 1e-9) extreme += w;
        }
        res.p_value = std::min(1.0, extreme / all);
        return res;
    }

    std::map<double, size_t> ties;
    for (double x : pooled) ++ties[x];
    double tsum = 0;
    for (auto &[_, t] : ties) tsum += static_cast<double>(t * t * t - t);
    const double nn = static_cast<double>(n);
    const double var = na * nb / 12.0 * ((nn + 1) - tsum / (nn * (nn - 1)));
    if (var <= 0) {
        res.p_value = 1.0;
        return res;
    }
    const double num = std::max(0.0, std::fabs(ua - mu) - 0.5);
    res.p_value = std::min(1.0, normal_sf2(num / std::sqrt(var)));
    return res;
}

inline double cohens_d(double mean_a, double sd_a, size_t n_a, double mean_b, double sd_b, size_t n_b) {
    if (n_a < 2 || n_b < 2) throw Error("cohens_d: need n >= 2 per group");
    const double pooled = std::sqrt(((n_a - 1) * sd_a * sd_a + (n_b - 1) * sd_b * sd_b) /
                                    static_cast<double>(n_a + n_b - 2));
    if (pooled == 0) return mean_b == mean_a ? 0.0 : std::copysign(INFINITY, mean_b - mean_a);
    return (mean_b - mean_a) / pooled;
}

inline double cohens_d(const std::vector<double> &a, const std::vector<double> &b) {
    return cohens_d(mean(a), sd(a), a.size(), mean(b), sd(b), b.size());
}

// linear interpolation between order statistics (numpy's default)
inline double quantile_sorted(const std::vector<double> &s, double q) {
    if (s.empty()) throw Error("quantile of empty sample");
    double h = (static_cast<double>(s.size()) - 1) * q;
    size_t lo = static_cast<size_t>(std::floor(h));
    size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

using Statistic = std::function<double(const std::vector<double> &)>;

inline std::pair<double, double> bootstrap_ci(const std::vector<double> &values, const Statistic &stat = mean,
                                              size_t resamples = 10000, uint64_t seed = 42, double level = 0.95) {
    if (values.empty()) throw Error("bootstrap_ci: empty input");
    Rng rng(seed);
    std::vector<double> boot(resamples), draw(values.size());
    for (size_t r = 0; r < resamples; ++r) {
        for (auto &x : draw) x = values[rng.below(values.size())];
        boot[r] = stat(draw);
    }
    std::sort(boot.begin(), boot.end());
    const double alpha = 1 - level;
    return {quantile_sorted(boot, alpha / 2), quantile_sorted(boot, 1 - alpha / 2)};
}

inline std::vector<double> bh_correct(const std::vector<double> &p) {
    for (double x : p)
        if (!(x >= 0 && x <= 1)) throw Error("bh_correct: p outside [0,1]");
    const size_t m = p.size();
    std::vector<size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return p[a] < p[b]; });
    std::vector<double> q(m);
    double running = 1.0;
    for (size_t k = m; k-- > 0;) {
        running = std::min(running, p[idx[k]] * (static_cast<double>(m) / static_cast<double>(k + 1)));
        q[idx[k]] = running;
    }
    return q;
}

inline double z_for_level(double level) {
    if (level == 0.95) return 1.959963984540054;
    boost::math::normal n;
    return boost::math::quantile(n, 1 - (1 - level) / 2);
}

inline std::pair<double, double> wilson_ci(size_t successes, size_t n, double level = 0.95) {
    if (successes > n) throw Error("wilson_ci: successes > n");
    if (n == 0) throw Error("wilson_ci: n = 0");
    const double z = z_for_level(level), nn = static_cast<double>(n);
    const double p = successes / nn;
    const double denom = 1 + z * z / nn;
    const double centre = (p + z * z / (2 * nn)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

enum class Metric { Nominal, Ordinal, Interval };

// ratings[rater][item]; NaN marks a missing rating
inline double krippendorff_alpha(const std::vector<std::vector<double>> &ratings, Metric metric = Metric::Ordinal) {
    if (ratings.size() < 2) throw Error("krippendorff_alpha: need >= 2 raters");
    const size_t items = ratings[0].size();
    for (auto &r : ratings)
        if (r.size() != items) throw Error("krippendorff_alpha: ragged matrix");

    std::vector<double> values;
    for (auto &r : ratings)
        for (double v : r)
            if (!std::isnan(v)) values.push_back(v);
    sort_unique(values);
    const size_t c = values.size();
    auto cat = [&](double v) { return static_cast<size_t>(std::lower_bound(values.begin(), values.end(), v) - values.begin()); };

    std::vector<std::vector<double>> o(c, std::vector<double>(c, 0.0));
    bool pairable = false;
    for (size_t u = 0; u < items; ++u) {
        std::vector<size_t> vs;
        for (auto &r : ratings)
            if (!std::isnan(r[u])) vs.push_back(cat(r[u]));
        if (vs.size() < 2) continue;
        pairable = true;
        const double w = 1.0 / static_cast<double>(vs.size() - 1);
        for (size_t i = 0; i < vs.size(); ++i)
            for (size_t j = 0; j < vs.size(); ++j)
                if (i != j) o[vs[i]][vs[j]] += w;
    }
    if (!pairable) throw Error("krippendorff_alpha: no item rated by >= 2 raters");

    std::vector<double> nc(c, 0.0);
    double n = 0;
    for (size_t i = 0; i < c; ++i) {
        for (size_t j = 0; j < c; ++j) nc[i] += o[i][j];
        n += nc[i];
    }
    auto delta2 = [&](size_t i, size_t j) -> double {
        if (i == j) return 0.0;
        switch (metric) {
        case Metric::Nominal: return 1.0;
        case Metric::Interval: return (values[i] - values[j]) * (values[i] - values[j]);
        case Metric::Ordinal: {
            size_t lo = std::min(i, j), hi = std::max(i, j);
            double s = 0;
            for (size_t g = lo; g <= hi; ++g) s += nc[g];
            s -= (nc[lo] + nc[hi]) / 2.0;
            return s * s;
        }
        }
        return 0.0;
    };
    double dobs = 0, dexp = 0;
    for (size_t i = 0; i < c; ++i)
        for (size_t j = 0; j < c; ++j) {
            double d = delta2(i, j);
            dobs += o[i][j] * d;
            dexp += nc[i] * nc[j] * d;
        }
    if (dexp == 0) return 1.0;
    return 1.0 - (n - 1) * dobs / dexp;
}

// values on a 0.5 grid inside [lo, hi]; integer-only inputs give the usual 5-category result
inline double weighted_kappa_quadratic(const std::vector<double> &a, const std::vector<double> &b, double lo = 1,
                                       double hi = 5) {
    if (a.size() != b.size()) throw Error("weighted_kappa_quadratic: length mismatch");
    if (a.empty()) throw Error("weighted_kappa_quadratic: empty input");
    const size_t k = static_cast<size_t>(std::lround((hi - lo) * 2)) + 1;
    auto idx = [&](double v) {
        double h = (v - lo) * 2;
        if (v < lo - 1e-9 || v > hi + 1e-9 || std::fabs(h - std::round(h)) > 1e-9)
            throw Error("weighted_kappa_quadratic: value off the half-step grid: " + fixed(v, 3));
        return static_cast<size_t>(std::lround(h));
    };
    std::vector<std::vector<double>> obs(k, std::vector<double>(k, 0.0));
    std::vector<double> ra(k, 0.0), rb(k, 0.0);
    const double n = static_cast<double>(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        size_t x = idx(a[i]), y = idx(b[i]);
        obs[x][y] += 1;
        ra[x] += 1;
        rb[y] += 1;
    }
    double num = 0, den = 0;
    const double maxd = static_cast<double>((k - 1) * (k - 1));
    for (size_t i = 0; i < k; ++i)
        for (size_t j = 0; j < k; ++j) {
            double w = (static_cast<double>(i) - j) * (static_cast<double>(i) - j) / maxd;
            num += w * obs[i][j] / n;
            den += w * ra[i] * rb[j] / (n * n);
        }
    if (den == 0) return num == 0 ? 1.0 : 0.0;
    return 1.0 - num / den;
}

// ratings[item][rater], complete
inline double icc_2_1(const std::vector<std::vector<double>> &m) {
    const size_t n = m.size();
    if (n < 2) throw Error("icc_2_1: need >= 2 items");
    const size_t k = m[0].size();
    if (k < 2) throw Error("icc_2_1: need >= 2 raters");
    for (auto &row : m) {
        if (row.size() != k) throw Error("icc_2_1: incomplete matrix");
        for (double v : row)
            if (std::isnan(v)) throw Error("icc_2_1: missing cell");
    }
    double grand = 0;
    std::vector<double> rmean(n, 0.0), cmean(k, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < k; ++j) {
            grand += m[i][j];
            rmean[i] += m[i][j] / k;
            cmean[j] += m[i][j] / n;
        }
    grand /= static_cast<double>(n * k);
    double ssr = 0, ssc = 0, sst = 0;
    for (size_t i = 0; i < n; ++i) ssr += k * (rmean[i] - grand) * (rmean[i] - grand);
    for (size_t j = 0; j < k; ++j) ssc += n * (cmean[j] - grand) * (cmean[j] - grand);
    for (auto &row : m)
        for (double v : row) sst += (v - grand) * (v - grand);
    const double sse = sst - ssr - ssc;
    const double msr = ssr / (n - 1), msc = ssc / (k - 1), mse = sse / ((n - 1) * (k - 1));
    const double den = msr + (k - 1) * mse + k * (msc - mse) / n;
    if (den == 0) return 1.0;
    return (msr - mse) / den;
}

inline double pearson(const std::vector<double> &x, const std::vector<double> &y) {
    double mx = mean(x), my = mean(y), sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline TestResult spearman_rho(const std::vector<double> &a, const std::vector<double> &b) {
    if (a.size() != b.size()) throw Error("spearman_rho: length mismatch");
    if (a.size() < 3) throw Error("spearman_rho: need n >= 3");
    TestResult res;
    res.n_a = res.n_b = a.size();
    const double rho = pearson(ranks(a), ranks(b));
    res.statistic = rho;
    const double df = static_cast<double>(a.size()) - 2;
    if (std::fabs(rho) >= 1.0 - 1e-12) {
        res.p_value = 0.0;
        return res;
    }
    const double t = rho * std::sqrt(df / (1 - rho * rho));
    boost::math::students_t dist(df);
    res.p_value = std::min(1.0, 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
    return res;
}

}  // namespace provgraph::stats
