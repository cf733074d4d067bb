#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "nmc/common.hpp"
#include "nmc/intensity.hpp"
#include "nmc/numerics.hpp"
#include "nmc/path.hpp"
#include "nmc/rng.hpp"

namespace nmc {

// Radon-Nikodym value, kept in log space until the boundary.
struct DensityValue {
    double log_density = 0.0;
    double density() const { return std::exp(log_density); }
};

// dP_l / dP_k evaluated on a path:
//   exp( -int_0^1 (l - k)(s, X_{s^-}) ds ) * prod_i (l/k)(T_i, X_{T_i^-}).
// The time integral is taken piecewise between jumps, where the state is
// constant; closed form for analytic kinds.
inline DensityValue girsanov_density(const IntensityModel& num,
                                     const IntensityModel& den,
                                     const Path& path)
{
    const auto& jumps = path.jump_times();
    double log_d = 0.0;
    double seg_start = 0.0;
    int z = path.x0();
    for (double t : jumps) {
        log_d -= num.integral_in_time(z, seg_start, t) -
                 den.integral_in_time(z, seg_start, t);
        log_d += std::log(num.value(t, z)) - std::log(den.value(t, z));
        seg_start = t;
        ++z;
    }
    log_d -= num.integral_in_time(z, seg_start, 1.0) -
             den.integral_in_time(z, seg_start, 1.0);
    return {log_d};
}

// G_l = dP_l / dP, the density against the standard Poisson process.
inline DensityValue density_vs_std_poisson(const IntensityModel& model,
                                           const Path& path)
{
    return girsanov_density(model, IntensityModel::constant(1.0), path);
}

// Intensity field of the h-transform Q = h(X_1) P_l. Solves the backward
// harmonic equation over [z_min, z_max] plus a buffer of states above, with
// the terminal function frozen as the closure at the top of the buffer; the
// truncation error is the probability of crossing the whole buffer.
class HTransformField {
public:
    HTransformField(const IntensityModel& model,
                    const std::function<double(int)>& h_terminal, int z_min,
                    int z_max, int buffer = 40, int steps = 4096)
        : model_(model), z_min_(z_min), z_top_(z_max + buffer)
    {
        if (z_max < z_min) throw DomainError("HTransformField: bad window");
        const int n_states = z_top_ - z_min_ + 1;
        const int n = steps;
        const double dt = 1.0 / n;

        times_.resize(static_cast<std::size_t>(n + 1));
        for (int i = 0; i <= n; ++i)
            times_[static_cast<std::size_t>(i)] = static_cast<double>(i) / n;

        std::vector<double> state(static_cast<std::size_t>(n_states));
        bool any_positive = false;
        for (int zi = 0; zi < n_states; ++zi) {
            double v = h_terminal(z_min_ + zi);
            if (v < 0.0)
                throw DomainError("HTransformField: h_terminal must be >= 0");
            if (v > 0.0) any_positive = true;
            state[static_cast<std::size_t>(zi)] = v;
        }
        if (!any_positive)
            throw DegenerateConditioningError(
                "HTransformField: h_terminal vanishes identically on window");
        top_closure_ = h_terminal(z_top_ + 1);

        h_.assign(static_cast<std::size_t>(n_states),
                  std::vector<double>(times_.size(), 0.0));
        for (int zi = 0; zi < n_states; ++zi)
            h_[static_cast<std::size_t>(zi)].back() =
                state[static_cast<std::size_t>(zi)];

        auto rhs = [&](double t, const std::vector<double>& v,
                       std::vector<double>& out) {
            for (int zi = 0; zi < n_states; ++zi) {
                double up = (zi + 1 < n_states)
                                ? v[static_cast<std::size_t>(zi + 1)]
                                : top_closure_;
                out[static_cast<std::size_t>(zi)] =
                    -model_.value(t, z_min_ + zi) *
                    (up - v[static_cast<std::size_t>(zi)]);
            }
        };

        std::vector<double> k1(state.size()), k2(state.size()), k3(state.size()),
            k4(state.size()), tmp(state.size());
        for (int i = n; i > 0; --i) {
            const double t1 = times_[static_cast<std::size_t>(i)];
            const double hstep = -dt;
            rhs(t1, state, k1);
            for (std::size_t j = 0; j < state.size(); ++j)
                tmp[j] = state[j] + 0.5 * hstep * k1[j];
            rhs(t1 + 0.5 * hstep, tmp, k2);
            for (std::size_t j = 0; j < state.size(); ++j)
                tmp[j] = state[j] + 0.5 * hstep * k2[j];
            rhs(t1 + 0.5 * hstep, tmp, k3);
            for (std::size_t j = 0; j < state.size(); ++j)
                tmp[j] = state[j] + hstep * k3[j];
            rhs(t1 + hstep, tmp, k4);
            for (std::size_t j = 0; j < state.size(); ++j)
                state[j] += hstep / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            for (int zi = 0; zi < n_states; ++zi)
                h_[static_cast<std::size_t>(zi)][static_cast<std::size_t>(i - 1)] =
                    state[static_cast<std::size_t>(zi)];
        }
    }

    std::pair<int, int> window() const { return {z_min_, z_top_}; }

    // h(t,z) = E_l[ h(X_1) | X_t = z ], linear interpolation in t.
    double h(double t, int z) const
    {
        if (z < z_min_ || z > z_top_)
            throw DomainError("HTransformField::h: state outside window");
        const auto& hz = h_[static_cast<std::size_t>(z - z_min_)];
        const std::size_t n = times_.size() - 1;
        double pos = std::min(std::max(t, 0.0), 1.0) * static_cast<double>(n);
        std::size_t i = std::min(static_cast<std::size_t>(pos), n - 1);
        double w = pos - static_cast<double>(i);
        return (1.0 - w) * hz[i] + w * hz[i + 1];
    }

    // k(t,z) = l(t,z) h(t,z+1) / h(t,z).
    double intensity(double t, int z) const
    {
        double hz = h(t, z);
        if (!(hz > 0.0))
            throw DegenerateConditioningError(
                "HTransformField: h vanishes on a visited node");
        double up = (z + 1 <= z_top_) ? h(t, z + 1) : top_closure_;
        return model_.value(t, z) * up / hz;
    }

    // Forward sample of the transformed process from x by next-jump hazard
    // inversion:  H(t,s) = int_t^s l(r,z) dr + log h(t,z) - log h(s,z).
    Path sample(int x, RngStream& rng) const
    {
        std::vector<double> jumps;
        double t = 0.0;
        int z = x;
        const double s_max = 1.0 - 1e-13;
        for (;;) {
            if (z + 1 > z_top_)
                throw NumericError("HTransformField::sample: buffer exhausted");
            double hz = h(t, z);
            if (!(hz > 0.0))
                throw DegenerateConditioningError(
                    "HTransformField::sample: h vanishes on a visited node");
            double target_hazard = rng.exponential();
            double log_h_t = std::log(hz);
            auto hazard = [&](double s) {
                double hs = h(s, z);
                if (!(hs > 0.0)) return 1e300; // beyond any draw
                return model_.integral_in_time(z, t, s) + log_h_t - std::log(hs);
            };
            if (hazard(s_max) < target_hazard) break; // survives to 1
            double s = bisect_increasing(
                [&](double r) { return hazard(r) - target_hazard; }, t, s_max,
                1e-14);
            if (s <= t) throw NumericError("HTransformField::sample: stuck");
            jumps.push_back(s);
            t = s;
            ++z;
        }
        return Path(x, std::move(jumps));
    }

private:
    IntensityModel model_;
    int z_min_;
    int z_top_;
    double top_closure_ = 0.0;
    std::vector<double> times_;
    std::vector<std::vector<double>> h_;
};

inline HTransformField htransform_intensity_field(
    const IntensityModel& model, const std::function<double(int)>& h_terminal,
    int z_min, int z_max)
{
    return HTransformField(model, h_terminal, z_min, z_max);
}

} // namespace nmc
