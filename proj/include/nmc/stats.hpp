#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "nmc/common.hpp"

namespace nmc {

// Deterministic pairwise summation; the result does not depend on how the
// values were produced across workers.
inline double pairwise_sum(std::span<const double> v)
{
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

struct SampleStats {
    double mean = 0.0;
    double stderr_mean = 0.0;
    std::size_t n = 0;
};

inline SampleStats sample_stats(std::span<const double> v)
{
    SampleStats s;
    s.n = v.size();
    if (s.n == 0) throw InsufficientDataError("sample_stats: empty sample");
    s.mean = pairwise_sum(v) / static_cast<double>(s.n);
    if (s.n >= 2) {
        std::vector<double> sq(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            double d = v[i] - s.mean;
            sq[i] = d * d;
        }
        double var = pairwise_sum(sq) / static_cast<double>(s.n - 1);
        s.stderr_mean = std::sqrt(var / static_cast<double>(s.n));
    }
    return s;
}

// Standard normal quantile (Acklam's rational approximation refined by one
// Halley step against erfc).
inline double inverse_normal_cdf(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("inverse_normal_cdf: p outside (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425, p_high = 1.0 - p_low;
    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= p_high) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
            q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // one Halley refinement
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

// P(|Z| > |z|) for Z standard normal.
inline double two_sided_normal_pvalue(double z)
{
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

// Kolmogorov distribution tail: P(D > d) ~ 2 sum (-1)^{k-1} exp(-2 k^2 d^2).
inline double kolmogorov_tail(double d)
{
    if (d <= 0.0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * d * d);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::min(std::max(sum, 0.0), 1.0);
}

// One-sample KS statistic against Uniform(0,1); returns the asymptotic
// p-value.
inline double ks_test_uniform(std::vector<double> sample)
{
    std::size_t n = sample.size();
    if (n == 0) throw InsufficientDataError("ks_test_uniform: empty sample");
    std::sort(sample.begin(), sample.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double cdf = sample[i];
        d = std::max(d, std::abs((i + 1.0) / n - cdf));
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    }
    return kolmogorov_tail(d * std::sqrt(static_cast<double>(n)));
}

// Two-sample KS p-value (asymptotic).
inline double ks_test_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw InsufficientDataError("ks_test_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i; else ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    double ne = std::sqrt(na * nb / (na + nb));
    return kolmogorov_tail(d * ne);
}

namespace detail {

// Regularized upper incomplete gamma Q(a,x) by series / continued fraction.
inline double gamma_q(double a, double x)
{
    if (x < 0.0 || a <= 0.0) throw DomainError("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) {
        // series for P(a,x)
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        return 1.0 - p;
    }
    // continued fraction for Q(a,x)
    double b = x + 1.0 - a, c = 1e300, dd = 1.0 / b, h = dd;
    for (int i = 1; i < 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        dd = an * dd + b;
        if (std::abs(dd) < 1e-300) dd = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        dd = 1.0 / dd;
        double del = dd * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace detail

// Chi-square upper-tail p-value.
inline double chi_square_pvalue(double stat, int dof)
{
    if (dof < 1) throw DomainError("chi_square_pvalue: dof < 1");
    return detail::gamma_q(0.5 * dof, 0.5 * stat);
}

// Chi-square goodness of fit of observed counts against expected counts;
// cells with expected < 5 should be merged by the caller.
inline double chi_square_gof_pvalue(const std::vector<double>& observed,
                                    const std::vector<double>& expected)
{
    if (observed.size() != expected.size() || observed.size() < 2)
        throw DomainError("chi_square_gof_pvalue: mismatched cells");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        double d = observed[i] - expected[i];
        stat += d * d / expected[i];
    }
    return chi_square_pvalue(stat, static_cast<int>(observed.size()) - 1);
}

// Poisson pmf.
inline double poisson_pmf(int k, double mean)
{
    if (k < 0) return 0.0;
    return std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
}

} // namespace nmc
