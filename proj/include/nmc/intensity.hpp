#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "nmc/common.hpp"
#include "nmc/numerics.hpp"

namespace nmc {

// Default state window for space-independent intensities: wide enough that
// desk-scale simulations never exit.
inline constexpr int kDefaultZMin = -5;
inline constexpr int kDefaultZMax = 60;

// Finite-difference step for time derivatives of tabulated intensities.
inline constexpr double kTimeDerivStep = 1e-5;

// Positive, bounded jump intensity l(t,z), C^1 in t for every z.
// Analytic kinds carry closed-form time derivatives; tabulated kinds are
// evaluated by cubic interpolation with finite-difference derivatives.
class IntensityModel {
public:
    enum class Kind { Constant, ExponentialTime, TimeOnly, SpaceOnly, Tabulated };

    static IntensityModel constant(double alpha)
    {
        if (alpha <= 0.0) throw DomainError("IntensityModel: alpha must be > 0");
        IntensityModel m(Kind::Constant);
        m.alpha_ = alpha;
        m.upper_bound_ = alpha;
        return m;
    }

    // l(t) = exp(lambda t)
    static IntensityModel exponential_time(double lambda)
    {
        IntensityModel m(Kind::ExponentialTime);
        m.lambda_ = lambda;
        m.upper_bound_ = std::exp(std::max(lambda, 0.0));
        return m;
    }

    static IntensityModel time_only(std::vector<double> times,
                                    std::vector<double> values)
    {
        validate_positive(values);
        IntensityModel m(Kind::TimeOnly);
        m.time_splines_.emplace_back(std::move(times), std::move(values));
        m.upper_bound_ = spline_sup(m.time_splines_[0]);
        return m;
    }

    // One rate per state on [z_min, z_min + values.size() - 1].
    static IntensityModel space_only(int z_min, std::vector<double> values)
    {
        validate_positive(values);
        IntensityModel m(Kind::SpaceOnly);
        m.z_min_ = z_min;
        m.z_max_ = z_min + static_cast<int>(values.size()) - 1;
        m.space_values_ = std::move(values);
        m.upper_bound_ =
            *std::max_element(m.space_values_.begin(), m.space_values_.end());
        return m;
    }

    // values[zi][ti] on the shared time grid, zi = z - z_min.
    static IntensityModel tabulated(std::vector<double> times, int z_min,
                                    const std::vector<std::vector<double>>& values)
    {
        if (values.empty()) throw DomainError("IntensityModel: empty table");
        IntensityModel m(Kind::Tabulated);
        m.z_min_ = z_min;
        m.z_max_ = z_min + static_cast<int>(values.size()) - 1;
        double sup = 0.0;
        for (const auto& row : values) {
            validate_positive(row);
            m.time_splines_.emplace_back(times, row);
            sup = std::max(sup, spline_sup(m.time_splines_.back()));
        }
        m.upper_bound_ = sup;
        return m;
    }

    Kind kind() const { return kind_; }
    bool is_tabulated_kind() const
    {
        return kind_ == Kind::TimeOnly || kind_ == Kind::SpaceOnly ||
               kind_ == Kind::Tabulated;
    }

    double upper_bound() const { return upper_bound_; }

    std::pair<int, int> space_window() const { return {z_min_, z_max_}; }

    bool depends_on_space() const
    {
        return kind_ == Kind::SpaceOnly || kind_ == Kind::Tabulated;
    }

    double value(double t, int z) const
    {
        if (t < 0.0 || t > 1.0)
            throw DomainError("IntensityModel::value: t outside [0,1]");
        check_window(z);
        switch (kind_) {
        case Kind::Constant:
            return alpha_;
        case Kind::ExponentialTime:
            return std::exp(lambda_ * t);
        case Kind::TimeOnly:
            return time_splines_[0](t);
        case Kind::SpaceOnly:
            return space_values_[static_cast<std::size_t>(z - z_min_)];
        case Kind::Tabulated:
        default:
            return time_splines_[static_cast<std::size_t>(z - z_min_)](t);
        }
    }

    // d/dt log l(t,z): closed form for analytic kinds, central differences
    // (one-sided at the ends) for tabulated kinds.
    double time_log_derivative(double t, int z) const
    {
        switch (kind_) {
        case Kind::Constant:
        case Kind::SpaceOnly:
            check_window(z);
            return 0.0;
        case Kind::ExponentialTime:
            return lambda_;
        case Kind::TimeOnly:
        case Kind::Tabulated:
        default: {
            const double h = kTimeDerivStep;
            double lo = std::max(0.0, t - h);
            double hi = std::min(1.0, t + h);
            return (std::log(value(hi, z)) - std::log(value(lo, z))) / (hi - lo);
        }
        }
    }

    // Reciprocal invariant: d/dt log l(t,z) + l(t,z+1) - l(t,z).
    double invariant(double t, int z) const
    {
        if (depends_on_space() && (z < z_min_ || z + 1 > z_max_))
            throw DomainError("IntensityModel::invariant: z+1 outside window");
        return time_log_derivative(t, z) + value(t, z + 1) - value(t, z);
    }

    // Integral of s -> l(s,z) over [t0, t1]; closed form where available.
    double integral_in_time(int z, double t0, double t1,
                            double tol = 1e-10) const
    {
        if (t1 < t0) return -integral_in_time(z, t1, t0, tol);
        switch (kind_) {
        case Kind::Constant:
            return alpha_ * (t1 - t0);
        case Kind::ExponentialTime:
            if (lambda_ == 0.0) return t1 - t0;
            return (std::exp(lambda_ * t1) - std::exp(lambda_ * t0)) / lambda_;
        case Kind::SpaceOnly:
            return value(t0, z) * (t1 - t0);
        case Kind::TimeOnly:
        case Kind::Tabulated:
        default:
            return integrate([this, z](double s) { return value(s, z); }, t0,
                             t1, tol);
        }
    }

private:
    explicit IntensityModel(Kind kind) : kind_(kind) {}

    void check_window(int z) const
    {
        if (depends_on_space() && (z < z_min_ || z > z_max_))
            throw DomainError("IntensityModel: state outside space window");
    }

    static void validate_positive(const std::vector<double>& v)
    {
        if (v.empty()) throw DomainError("IntensityModel: empty table");
        for (double x : v)
            if (!(x > 0.0))
                throw DomainError("IntensityModel: nonpositive table entry");
    }

    // Supremum of the interpolant on a dense grid; the spline may overshoot
    // the table max between nodes.
    static double spline_sup(const CubicSpline& s)
    {
        double sup = 0.0;
        const int n = 4096;
        double a = s.min_x(), b = s.max_x();
        for (int i = 0; i <= n; ++i) {
            double v = s(a + (b - a) * i / n);
            if (!(v > 0.0))
                throw DomainError("IntensityModel: interpolant not positive");
            sup = std::max(sup, v);
        }
        return sup * (1.0 + 1e-12);
    }

    Kind kind_;
    double alpha_ = 0.0;
    double lambda_ = 0.0;
    int z_min_ = kDefaultZMin;
    int z_max_ = kDefaultZMax;
    std::vector<double> space_values_;
    std::vector<CubicSpline> time_splines_; // one per state for Tabulated
    double upper_bound_ = 0.0;
};

// Reciprocal invariant sampled on a uniform time grid over a state window.
struct InvariantGrid {
    std::vector<double> times;
    int z_min = 0;
    int z_max = 0;
    std::vector<std::vector<double>> values; // values[zi][ti]
};

inline InvariantGrid evaluate_invariant_grid(const IntensityModel& model,
                                             int time_points, int z_min,
                                             int z_max)
{
    if (time_points < 2 || z_max < z_min)
        throw DomainError("evaluate_invariant_grid: bad grid spec");
    InvariantGrid grid;
    grid.z_min = z_min;
    grid.z_max = z_max;
    grid.times.resize(static_cast<std::size_t>(time_points));
    for (int i = 0; i < time_points; ++i)
        grid.times[static_cast<std::size_t>(i)] =
            static_cast<double>(i) / (time_points - 1);
    for (int z = z_min; z <= z_max; ++z) {
        std::vector<double> row;
        row.reserve(grid.times.size());
        for (double t : grid.times) row.push_back(model.invariant(t, z));
        grid.values.push_back(std::move(row));
    }
    return grid;
}

struct ClassComparison {
    bool same_class = false;
    double max_abs_deviation = 0.0;
};

// Two NMC intensities share their bridges iff their reciprocal invariants
// coincide; compares them on a uniform grid over the common state window.
inline ClassComparison same_reciprocal_class(const IntensityModel& a,
                                             const IntensityModel& b,
                                             double tol, int time_points = 1001)
{
    auto [a_lo, a_hi] = a.space_window();
    auto [b_lo, b_hi] = b.space_window();
    int z_min = std::max(a_lo, b_lo);
    int z_max = std::min(a_hi, b_hi) - 1; // invariant reads z and z+1
    if (z_max < z_min)
        throw DomainError("same_reciprocal_class: incompatible space windows");

    double max_dev = 0.0;
    for (int z = z_min; z <= z_max; ++z) {
        for (int i = 0; i < time_points; ++i) {
            double t = static_cast<double>(i) / (time_points - 1);
            max_dev = std::max(max_dev,
                               std::abs(a.invariant(t, z) - b.invariant(t, z)));
        }
    }
    return {max_dev <= tol, max_dev};
}

// Default comparison tolerance per the kinds involved.
inline double default_class_tol(const IntensityModel& a, const IntensityModel& b)
{
    return (a.is_tabulated_kind() || b.is_tabulated_kind()) ? 1e-4 : 1e-8;
}

} // namespace nmc
