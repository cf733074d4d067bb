#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "nmc/common.hpp"
#include "nmc/intensity.hpp"
#include "nmc/numerics.hpp"
#include "nmc/path.hpp"
#include "nmc/rng.hpp"

namespace nmc {

inline constexpr int kHarmonicSteps = 4096;
inline constexpr double kHarmonicOdeTol = 1e-8;

// Exact forward simulation by thinning a rate-lambda_bar Poisson clock:
// candidates arrive with exponential interarrivals and are accepted with
// probability l(t, X_{t^-}) / lambda_bar.
inline Path sample_nmc(const IntensityModel& model, int x0, RngStream& rng)
{
    const double lam_bar = model.upper_bound();
    auto [z_lo, z_hi] = model.space_window();
    if (model.depends_on_space() && (x0 < z_lo || x0 > z_hi))
        throw DomainError("sample_nmc: x0 outside space window");

    std::vector<double> jumps;
    double t = 0.0;
    int z = x0;
    for (;;) {
        t += rng.exponential() / lam_bar;
        if (t >= 1.0) break;
        if (model.depends_on_space() && z > z_hi)
            throw NumericError("sample_nmc: state exited space window");
        if (rng.bernoulli(model.value(t, z) / lam_bar)) {
            jumps.push_back(t);
            ++z;
        }
    }
    return Path(x0, std::move(jumps));
}

// Exact Poisson bridge from x to y: the jump times of R^{xy} are the order
// statistics of y-x independent uniforms on (0,1).
inline Path sample_poisson_bridge(int x, int y, RngStream& rng)
{
    if (y < x) throw DomainError("sample_poisson_bridge: y < x");
    for (;;) {
        std::vector<double> jumps(static_cast<std::size_t>(y - x));
        for (auto& t : jumps) t = rng.uniform01_open();
        std::sort(jumps.begin(), jumps.end());
        bool tie = false;
        for (std::size_t i = 1; i < jumps.size(); ++i)
            if (jumps[i] == jumps[i - 1]) tie = true;
        if (tie) continue; // probability-zero event, redraw
        return Path(x, std::move(jumps));
    }
}

// Space-time harmonic function h(t,z) = P(X_1 = y | X_t = z) on a uniform
// time grid, for states z in [z_min, target]. Solves
//   dh/dt(t,z) = -l(t,z) [h(t,z+1) - h(t,z)],  h(1,z) = 1{z = target}
// backward with fixed-step RK4. Alongside h it stores the regularized
// g(t,z) = h(t,z) / (1-t)^{target-z}, which stays bounded and positive up to
// t = 1 and carries the polynomial vanishing order analytically; log h is
// interpolated through g so the divergence of the bridge hazard near t = 1
// is integrated exactly against its (1-t) power envelope.
class HarmonicTable {
public:
    HarmonicTable(const IntensityModel& model, int target, int z_min,
                  double ode_tol = kHarmonicOdeTol, int steps = kHarmonicSteps)
        : target_(target), z_min_(z_min)
    {
        if (z_min > target) throw DomainError("HarmonicTable: z_min > target");
        const int n_states = target - z_min + 1;
        const int n = steps;
        const double dt = 1.0 / n;

        times_.resize(static_cast<std::size_t>(n + 1));
        for (int i = 0; i <= n; ++i)
            times_[static_cast<std::size_t>(i)] = static_cast<double>(i) / n;

        h_.assign(static_cast<std::size_t>(n_states),
                  std::vector<double>(static_cast<std::size_t>(n + 1), 0.0));

        // terminal condition
        std::vector<double> state(static_cast<std::size_t>(n_states), 0.0);
        state.back() = 1.0; // z = target
        for (int zi = 0; zi < n_states; ++zi)
            h_[static_cast<std::size_t>(zi)][static_cast<std::size_t>(n)] =
                state[static_cast<std::size_t>(zi)];

        auto rhs = [&](double t, const std::vector<double>& v,
                       std::vector<double>& out) {
            for (int zi = 0; zi < n_states; ++zi) {
                double up = (zi + 1 < n_states) ? v[static_cast<std::size_t>(zi + 1)] : 0.0;
                // h(t, target+1) = 0
                double hz = v[static_cast<std::size_t>(zi)];
                if (zi + 1 == n_states) up = 0.0;
                out[static_cast<std::size_t>(zi)] =
                    -model.value(t, z_min + zi) * (up - hz);
            }
        };

        std::vector<double> k1(state.size()), k2(state.size()), k3(state.size()),
            k4(state.size()), tmp(state.size());
        for (int i = n; i > 0; --i) {
            const double t1 = times_[static_cast<std::size_t>(i)];
            const double hstep = -dt; // backward
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

        // An RK4 step only propagates the terminal mass four levels down, so
        // level target-z stays exactly zero for the last few nodes before
        // t = 1; positivity is required strictly before that zone.
        for (int zi = 0; zi < n_states; ++zi) {
            int m = target_ - (z_min_ + zi);
            for (int i = 0; i + std::max(m, 1) <= n; ++i)
                if (!(h_[static_cast<std::size_t>(zi)][static_cast<std::size_t>(i)] > 0.0))
                    throw NumericError("HarmonicTable: h not positive on grid");
        }

        build_regularized();
        max_residual_ = compute_residual(model);
        if (max_residual_ > ode_tol)
            throw NumericError("HarmonicTable: ODE residual above tolerance");
    }

    int target() const { return target_; }
    int z_min() const { return z_min_; }
    const std::vector<double>& times() const { return times_; }
    double max_residual() const { return max_residual_; }

    double node_value(int i, int z) const
    {
        if (z > target_) return 0.0;
        return h_[index(z)][static_cast<std::size_t>(i)];
    }

    // h(t,z), interpolated through the regularized table.
    double value(double t, int z) const
    {
        if (z > target_) return 0.0;
        if (z < z_min_) throw DomainError("HarmonicTable::value: z below table");
        if (t >= 1.0) return z == target_ ? 1.0 : 0.0;
        int m = target_ - z;
        return reg_interp(t, z) * std::pow(1.0 - t, m);
    }

    double log_value(double t, int z) const
    {
        if (z > target_)
            throw DomainError("HarmonicTable::log_value: h vanishes above target");
        if (z < z_min_) throw DomainError("HarmonicTable::log_value: z below table");
        if (t >= 1.0) {
            if (z == target_) return 0.0;
            return -std::numeric_limits<double>::infinity();
        }
        int m = target_ - z;
        double g = reg_interp(t, z);
        // g can interpolate to zero in the few-node zone before t = 1 where
        // deep levels have not been reached by the stencil; -inf makes the
        // hazard diverge there, which is the correct limit.
        if (!(g > 0.0)) return -std::numeric_limits<double>::infinity();
        return std::log(g) + m * std::log1p(-t);
    }

private:
    std::size_t index(int z) const
    {
        if (z < z_min_ || z > target_)
            throw DomainError("HarmonicTable: state outside table");
        return static_cast<std::size_t>(z - z_min_);
    }

    void build_regularized()
    {
        const std::size_t n = times_.size() - 1;
        g_.assign(h_.size(), std::vector<double>(times_.size(), 0.0));
        for (std::size_t zi = 0; zi < h_.size(); ++zi) {
            int m = target_ - (z_min_ + static_cast<int>(zi));
            for (std::size_t i = 0; i < n; ++i)
                g_[zi][i] = h_[zi][i] / std::pow(1.0 - times_[i], m);
            // endpoint by cubic extrapolation; h/(1-t)^m is 0/0 at t = 1
            if (m == 0)
                g_[zi][n] = h_[zi][n];
            else
                g_[zi][n] = std::max(4.0 * g_[zi][n - 1] - 6.0 * g_[zi][n - 2] +
                                         4.0 * g_[zi][n - 3] - g_[zi][n - 4],
                                     0.0);
        }
    }

    double reg_interp(double t, int z) const
    {
        const auto& g = g_[index(z)];
        const std::size_t n = times_.size() - 1;
        double pos = t * static_cast<double>(n);
        std::size_t i = std::min(static_cast<std::size_t>(pos), n - 1);
        double w = pos - static_cast<double>(i);
        return (1.0 - w) * g[i] + w * g[i + 1];
    }

    // Max over interior nodes of |dh/dt + l (h(.,z+1) - h(.,z))| with a
    // fourth-order five-point stencil for dh/dt.
    double compute_residual(const IntensityModel& model) const
    {
        const std::size_t n = times_.size() - 1;
        const double dt = 1.0 / static_cast<double>(n);
        double worst = 0.0;
        for (std::size_t zi = 0; zi < h_.size(); ++zi) {
            int z = z_min_ + static_cast<int>(zi);
            const auto& hz = h_[zi];
            for (std::size_t i = 2; i + 2 < n; ++i) {
                double dh = (-hz[i + 2] + 8.0 * hz[i + 1] - 8.0 * hz[i - 1] +
                             hz[i - 2]) /
                            (12.0 * dt);
                double up = (zi + 1 < h_.size()) ? h_[zi + 1][i] : 0.0;
                double res = dh + model.value(times_[i], z) * (up - hz[i]);
                worst = std::max(worst, std::abs(res));
            }
        }
        return worst;
    }

    int target_;
    int z_min_;
    std::vector<double> times_;
    std::vector<std::vector<double>> h_; // h_[z - z_min][time index]
    std::vector<std::vector<double>> g_; // h / (1-t)^(target-z)
    double max_residual_ = 0.0;
};

inline HarmonicTable solve_harmonic(const IntensityModel& model, int target,
                                    int z_min, double ode_tol = kHarmonicOdeTol)
{
    return HarmonicTable(model, target, z_min, ode_tol);
}

// Conditioned jump rate l(t,z) h(t,z+1) / h(t,z); zero once the target is
// reached, divergent as t -> 1 below it.
inline double bridge_intensity(const IntensityModel& model,
                               const HarmonicTable& htable, double t, int z)
{
    if (t >= 1.0) throw DomainError("bridge_intensity: t must be < 1");
    if (z >= htable.target()) return 0.0;
    double log_lo = htable.log_value(t, z);
    if (std::isinf(log_lo))
        throw NumericError("bridge_intensity: h underflowed before t = 1");
    return model.value(t, z) * std::exp(htable.log_value(t, z + 1) - log_lo);
}

// Bridge sampler by sequential next-jump inversion. Given state z at time t,
// the survival of the next jump is exp(-H) with cumulative hazard
//   H(t,s) = int_t^s l(r,z) dr + log h(t,z) - log h(s,z),
// using d/dr log h(r,z) = l(r,z) - k(r,z) from the harmonic equation. H is
// increasing and diverges at s = 1, so inversion by bisection always lands
// in (t,1).
inline Path sample_bridge(const IntensityModel& model,
                          const HarmonicTable& htable, int x, int y,
                          RngStream& rng)
{
    if (y < x) throw DomainError("sample_bridge: y < x");
    if (htable.target() != y || htable.z_min() > x)
        throw DomainError("sample_bridge: harmonic table does not cover (x,y)");

    std::vector<double> jumps;
    double t = 0.0;
    int z = x;
    const double s_max = 1.0 - 1e-13;
    while (z < y) {
        double target_hazard = rng.exponential();
        double log_h_t = htable.log_value(t, z);
        auto hazard = [&](double s) {
            return model.integral_in_time(z, t, s) + log_h_t -
                   htable.log_value(s, z);
        };
        if (hazard(s_max) < target_hazard)
            throw NumericError("sample_bridge: hazard inversion hit time cap");
        double s = bisect_increasing(
            [&](double r) { return hazard(r) - target_hazard; }, t, s_max, 1e-14);
        if (s <= t || s >= 1.0)
            throw NumericError("sample_bridge: inverted jump time out of range");
        jumps.push_back(s);
        t = s;
        ++z;
    }
    return Path(x, std::move(jumps));
}

inline Path sample_bridge(const IntensityModel& model, int x, int y,
                          RngStream& rng, double ode_tol = kHarmonicOdeTol)
{
    HarmonicTable htable(model, y, x, ode_tol);
    return sample_bridge(model, htable, x, y, rng);
}

struct RejectionStats {
    long attempts = 0;
    long accepted = 0;
    double acceptance_rate() const
    {
        return attempts > 0 ? static_cast<double>(accepted) / attempts : 0.0;
    }
};

// Oracle bridge sampler: forward paths conditioned on X_1 = y by rejection.
inline Path sample_bridge_rejection(const IntensityModel& model, int x, int y,
                                    RngStream& rng, long max_tries = 1000000,
                                    RejectionStats* stats = nullptr)
{
    if (y < x) throw DomainError("sample_bridge_rejection: y < x");
    if (max_tries < 1) throw DomainError("sample_bridge_rejection: max_tries < 1");
    for (long i = 0; i < max_tries; ++i) {
        Path p = sample_nmc(model, x, rng);
        if (stats) ++stats->attempts;
        if (p.terminal_state() == y) {
            if (stats) ++stats->accepted;
            return p;
        }
    }
    throw NumericError(
        "sample_bridge_rejection: acceptance too rare, hit rate < 1/" +
        std::to_string(max_tries));
}

// Keeps each jump independently with probability c.
inline Path thin_path(const Path& path, double c, RngStream& rng)
{
    if (c < 0.0 || c > 1.0) throw DomainError("thin_path: c outside [0,1]");
    std::vector<double> kept;
    for (double t : path.jump_times())
        if (rng.bernoulli(c)) kept.push_back(t);
    return Path(path.x0(), std::move(kept));
}

// Merges the jump streams; p2 is a pure jump overlay, the initial state is
// p1's. Throws TieError on a shared instant so the caller can redraw.
inline Path superpose_paths(const Path& p1, const Path& p2)
{
    std::vector<double> merged;
    merged.reserve(p1.jump_times().size() + p2.jump_times().size());
    std::merge(p1.jump_times().begin(), p1.jump_times().end(),
               p2.jump_times().begin(), p2.jump_times().end(),
               std::back_inserter(merged));
    for (std::size_t i = 1; i < merged.size(); ++i)
        if (merged[i] == merged[i - 1])
            throw TieError("superpose_paths: shared jump instant");
    return Path(p1.x0(), std::move(merged));
}

} // namespace nmc
