#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "nmc/common.hpp"

namespace nmc {

// Natural cubic spline on a strictly increasing abscissa grid.
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> xs, std::vector<double> ys)
        : x_(std::move(xs)), y_(std::move(ys))
    {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw DomainError("CubicSpline: need >= 2 matching nodes");
        for (std::size_t i = 1; i < n; ++i)
            if (x_[i] <= x_[i - 1])
                throw DomainError("CubicSpline: abscissae not increasing");

        // Second derivatives by the standard tridiagonal sweep. Clamped ends
        // with slopes estimated from the table itself avoid the O(h^2)
        // boundary layer of a natural spline.
        double yp_lo = end_slope(true);
        double yp_hi = end_slope(false);
        m_.assign(n, 0.0);
        std::vector<double> u(n, 0.0);
        m_[0] = -0.5;
        u[0] = (3.0 / (x_[1] - x_[0])) *
               ((y_[1] - y_[0]) / (x_[1] - x_[0]) - yp_lo);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double sig = (x_[i] - x_[i - 1]) / (x_[i + 1] - x_[i - 1]);
            double p = sig * m_[i - 1] + 2.0;
            m_[i] = (sig - 1.0) / p;
            double d = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]) -
                       (y_[i] - y_[i - 1]) / (x_[i] - x_[i - 1]);
            u[i] = (6.0 * d / (x_[i + 1] - x_[i - 1]) - sig * u[i - 1]) / p;
        }
        double qn = 0.5;
        double un = (3.0 / (x_[n - 1] - x_[n - 2])) *
                    (yp_hi - (y_[n - 1] - y_[n - 2]) / (x_[n - 1] - x_[n - 2]));
        m_[n - 1] = (un - qn * u[n - 2]) / (qn * m_[n - 2] + 1.0);
        for (std::size_t i = n - 1; i-- > 0;)
            m_[i] = m_[i] * m_[i + 1] + u[i];
    }

    double operator()(double x) const
    {
        const std::size_t n = x_.size();
        if (x < x_.front() - 1e-12 || x > x_.back() + 1e-12)
            throw DomainError("CubicSpline: abscissa outside table");
        x = std::min(std::max(x, x_.front()), x_.back());
        std::size_t lo = 0, hi = n - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (x_[mid] > x) hi = mid; else lo = mid;
        }
        double h = x_[hi] - x_[lo];
        double a = (x_[hi] - x) / h;
        double b = (x - x_[lo]) / h;
        return a * y_[lo] + b * y_[hi] +
               ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * h * h / 6.0;
    }

    double min_x() const { return x_.front(); }
    double max_x() const { return x_.back(); }

private:
    // Endpoint slope of the Lagrange polynomial through the first (or last)
    // up-to-five table nodes.
    double end_slope(bool at_start) const
    {
        const std::size_t n = x_.size();
        const std::size_t k = std::min<std::size_t>(5, n);
        std::vector<double> xs(k), ys(k);
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t idx = at_start ? i : n - k + i;
            xs[i] = x_[idx];
            ys[i] = y_[idx];
        }
        const double x0 = at_start ? xs.front() : xs.back();
        double slope = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            // derivative of the j-th Lagrange basis at x0
            double dl = 0.0;
            for (std::size_t m = 0; m < k; ++m) {
                if (m == j) continue;
                double term = 1.0 / (xs[j] - xs[m]);
                for (std::size_t q = 0; q < k; ++q) {
                    if (q == j || q == m) continue;
                    term *= (x0 - xs[q]) / (xs[j] - xs[q]);
                }
                dl += term;
            }
            slope += ys[j] * dl;
        }
        return slope;
    }

    std::vector<double> x_, y_, m_;
};

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double fa, double fm, double fb)
{
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm,
                                   double fb, double whole, double tol,
                                   int depth)
{
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(f, a, m, fa, flm, fm);
    double right = simpson(f, m, b, fm, frm, fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson quadrature of f over [a,b].
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-10, int max_depth = 40)
{
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = detail::simpson(f, a, b, fa, fm, fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Root of a continuous increasing function on [lo, hi] by bisection.
// Requires f(lo) <= 0 <= f(hi).
inline double bisect_increasing(const std::function<double(double)>& f,
                                double lo, double hi, double x_tol = 1e-14,
                                int max_iter = 200)
{
    double flo = f(lo), fhi = f(hi);
    if (flo > 0.0 || fhi < 0.0)
        throw NumericError("bisect_increasing: root not bracketed");
    for (int i = 0; i < max_iter && hi - lo > x_tol; ++i) {
        double mid = 0.5 * (lo + hi);
        double fmid = f(mid);
        if (fmid < 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace nmc
