#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "nmc/common.hpp"
#include "nmc/functional.hpp"
#include "nmc/intensity.hpp"
#include "nmc/numerics.hpp"
#include "nmc/path.hpp"
#include "nmc/perturbation.hpp"
#include "nmc/stats.hpp"

namespace nmc {

// Minimum sample size for a z-test verdict; below this the report is
// inconclusive.
inline constexpr std::size_t kMinVerdictSamples = 10000;

// Time-changed path omega . theta_u^eps with theta_u^eps(t) = t + eps u(t):
// each jump instant maps through the inverse change of time, endpoints and
// jump count stay fixed. Requires eps sup|u'| < 1 so the change of time is
// strictly increasing.
inline Path perturb_path(const Path& path, const Perturbation& u, double eps)
{
    if (std::abs(eps) * u.derivative_bound() >= 1.0)
        throw DomainError("perturb_path: eps too large for monotonicity");
    if (eps == 0.0) return path;
    std::vector<double> jumps;
    jumps.reserve(path.jump_times().size());
    for (double t : path.jump_times()) {
        double s = bisect_increasing(
            [&](double r) { return r + eps * u(r) - t; }, 0.0, 1.0, 1e-14);
        jumps.push_back(s);
    }
    return Path(path.x0(), std::move(jumps));
}

// D_u Phi = - sum_j d(phi)/d(t_j) u(T_j), via the functional's symbolic
// partials; jump times beyond the path length sit at 1 where u vanishes.
inline double derivative(const SimpleFunctional& functional, const Path& path,
                         const Perturbation& u)
{
    std::vector<double> times = functional.padded_times(path);
    double sum = 0.0;
    for (int j = 1; j <= functional.arity(); ++j)
        sum += functional.partial(j, path.x0(), times) * u(times[j - 1]);
    return -sum;
}

// int g(t, X_{t^-}) dX_t = sum over effective jumps of g(T_i, X_{T_i^-}).
inline double stochastic_integral_dX(
    const Path& path, const std::function<double(double, int)>& g)
{
    double sum = 0.0;
    int z = path.x0();
    for (double t : path.jump_times()) {
        sum += g(t, z);
        ++z;
    }
    return sum;
}

// int [u'(t) + Xi(t, X_{t^-}) u(t)] dX_t for a given invariant field.
inline double invariant_integral_dX(
    const Path& path, const Perturbation& u,
    const std::function<double(double, int)>& xi)
{
    return stochastic_integral_dX(path, [&](double t, int z) {
        return u.derivative(t) + xi(t, z) * u(t);
    });
}

// int (d_t(l u)/l) [dX_t - l(t, X_{t^-}) dt]  with d_t(l u)/l expanded to
// u' + (d_t log l) u; the compensator integral runs piecewise between jumps.
inline double compensated_integral(const Path& path, const Perturbation& u,
                                   const IntensityModel& model,
                                   double tol = 1e-10)
{
    auto g = [&](double t, int z) {
        return u.derivative(t) + model.time_log_derivative(t, z) * u(t);
    };
    double sum = stochastic_integral_dX(path, g);
    double seg_start = 0.0;
    int z = path.x0();
    for (double t : path.jump_times()) {
        sum -= integrate([&](double s) { return g(s, z) * model.value(s, z); },
                         seg_start, t, tol);
        seg_start = t;
        ++z;
    }
    sum -= integrate([&](double s) { return g(s, z) * model.value(s, z); },
                     seg_start, 1.0, tol);
    return sum;
}

// int u'(t) [dX_t - lambda X_t dt]; the time integral is exact since X is a
// step function.
inline double decay_compensated_integral(const Path& path,
                                         const Perturbation& u, double lambda)
{
    double sum = stochastic_integral_dX(
        path, [&](double t, int) { return u.derivative(t); });
    double seg_start = 0.0;
    int z = path.x0();
    for (double t : path.jump_times()) {
        sum -= lambda * z * (u(t) - u(seg_start));
        seg_start = t;
        ++z;
    }
    sum -= lambda * z * (u(1.0) - u(seg_start));
    return sum;
}

// --- paired duality verification -----------------------------------------

struct DualityPairSpec {
    std::string name;
    std::function<double(const Path&)> lhs; // e.g. D_u Phi
    std::function<double(const Path&)> rhs; // e.g. Phi * int (u'+Xi u) dX
};

struct DualityPairResult {
    std::string name;
    double lhs_estimate = 0.0;
    double rhs_estimate = 0.0;
    double paired_diff_mean = 0.0;
    double paired_diff_stderr = 0.0;
    double z_score = 0.0;
    double p_value = 1.0;
    bool pass = false;
};

enum class Verdict { Accept, Reject, Inconclusive };

inline const char* verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::Accept: return "ACCEPT";
    case Verdict::Reject: return "REJECT";
    default: return "INCONCLUSIVE";
    }
}

struct DualityReport {
    std::vector<DualityPairResult> pairs;
    std::size_t n = 0;
    double alpha_level = 0.01;
    Verdict verdict = Verdict::Inconclusive;
    bool all_pass = false;
};

namespace detail {

inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t, std::size_t)>& body)
{
    if (workers <= 1 || n < 1024) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + workers - 1) / static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
        std::size_t lo = static_cast<std::size_t>(w) * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(body, lo, hi);
    }
    for (auto& th : pool) th.join();
}

} // namespace detail

// Both sides of each identity are evaluated on the same paths and compared
// through the paired difference, whose variance is far below that of two
// independent estimates. Per-pair z-tests, Bonferroni-adjusted globally.
inline DualityReport paired_duality_test(const std::vector<Path>& paths,
                                         const std::vector<DualityPairSpec>& specs,
                                         double alpha_level = 0.01,
                                         int workers = 1)
{
    if (paths.empty()) throw DomainError("paired_duality_test: empty path set");
    if (paths.size() < 100)
        throw DomainError("paired_duality_test: need at least 100 paths");
    if (specs.empty()) throw DomainError("paired_duality_test: empty dictionary");

    DualityReport report;
    report.n = paths.size();
    report.alpha_level = alpha_level;
    const double per_pair_alpha = alpha_level / static_cast<double>(specs.size());

    bool all_pass = true;
    for (const auto& spec : specs) {
        std::vector<double> lhs(paths.size()), rhs(paths.size()),
            diff(paths.size());
        detail::parallel_for(paths.size(), workers,
                             [&](std::size_t lo, std::size_t hi) {
                                 for (std::size_t i = lo; i < hi; ++i) {
                                     lhs[i] = spec.lhs(paths[i]);
                                     rhs[i] = spec.rhs(paths[i]);
                                     diff[i] = lhs[i] - rhs[i];
                                 }
                             });
        DualityPairResult r;
        r.name = spec.name;
        r.lhs_estimate = sample_stats(lhs).mean;
        r.rhs_estimate = sample_stats(rhs).mean;
        auto ds = sample_stats(diff);
        r.paired_diff_mean = ds.mean;
        r.paired_diff_stderr = ds.stderr_mean;
        // stderr floored at roundoff scale: identities that hold exactly on
        // every path give differences of order 1e-16 with zero spread
        r.z_score = ds.mean / std::max(ds.stderr_mean, 1e-12);
        r.p_value = two_sided_normal_pvalue(r.z_score);
        r.pass = r.p_value >= per_pair_alpha;
        all_pass = all_pass && r.pass;
        report.pairs.push_back(std::move(r));
    }
    report.all_pass = all_pass;
    if (paths.size() < kMinVerdictSamples)
        report.verdict = Verdict::Inconclusive;
    else
        report.verdict = all_pass ? Verdict::Accept : Verdict::Reject;
    return report;
}

using Dictionary = std::vector<std::pair<SimpleFunctional, Perturbation>>;

// Phi in {T1, T1*T2, exp(-T1), (X0 mod 2)*T1} crossed with
// u in {Sine(1), Sine(2), Bump(0)}.
inline Dictionary default_dictionary()
{
    std::vector<SimpleFunctional> phis = {
        SimpleFunctional::jump_time(1),
        SimpleFunctional::jump_time(1) * SimpleFunctional::jump_time(2),
        SimpleFunctional::jump_time(1).scaled(-1.0).exp(),
        SimpleFunctional::initial_state_parity() * SimpleFunctional::jump_time(1),
    };
    std::vector<Perturbation> us = {Perturbation::sine(1), Perturbation::sine(2),
                                    Perturbation::bump(0)};
    Dictionary dict;
    for (const auto& phi : phis)
        for (const auto& u : us) dict.emplace_back(phi, u);
    return dict;
}

inline std::vector<DualityPairSpec> duality_specs(
    const Dictionary& dict, const std::function<double(double, int)>& xi)
{
    std::vector<DualityPairSpec> specs;
    for (const auto& [phi, u] : dict) {
        DualityPairSpec spec;
        spec.name = phi.name() + " / " + u.name();
        spec.lhs = [phi, u](const Path& p) { return derivative(phi, p, u); };
        spec.rhs = [phi, u, xi](const Path& p) {
            return phi.evaluate(p) * invariant_integral_dX(p, u, xi);
        };
        specs.push_back(std::move(spec));
    }
    return specs;
}

// Verifies E[D_u Phi] = E[Phi int (u' + Xi u) dX] over the dictionary.
inline DualityReport duality_check(const std::vector<Path>& paths,
                                   const std::function<double(double, int)>& xi,
                                   const Dictionary& dict,
                                   double alpha_level = 0.01, int workers = 1)
{
    return paired_duality_test(paths, duality_specs(dict, xi), alpha_level,
                               workers);
}

// Statistical falsification of membership of the reciprocal class of
// `model`: REJECT refutes membership at the given level; ACCEPT means "not
// falsified by this dictionary", not a proof of membership.
inline DualityReport membership_test(const std::vector<Path>& paths,
                                     const IntensityModel& model,
                                     const Dictionary& dict,
                                     double alpha_level = 0.01, int workers = 1)
{
    auto xi = [model](double t, int z) { return model.invariant(t, z); };
    return duality_check(paths, xi, dict, alpha_level, workers);
}

struct NelsonEstimate {
    double rate = 0.0;
    double stderr_rate = 0.0;
    std::size_t matched = 0;
};

// Window estimator of the conditional jump rate:
// (1/eps) E[ X_{t+eps} - X_t | X_{t^-} = z ].
inline NelsonEstimate nelson_intensity_estimate(const std::vector<Path>& paths,
                                                double t, double eps, int z)
{
    if (!(t >= 0.0 && eps > 0.0 && t + eps <= 1.0))
        throw DomainError("nelson_intensity_estimate: bad window");
    std::vector<double> increments;
    for (const auto& p : paths) {
        int state = (t > 0.0) ? p.left_value(t) : p.x0();
        if (state != z) continue;
        increments.push_back(
            static_cast<double>(p.value(t + eps) - p.value(t)) / eps);
    }
    if (increments.empty())
        throw InsufficientDataError(
            "nelson_intensity_estimate: no paths match the state filter");
    auto s = sample_stats(increments);
    return {s.mean, s.stderr_mean, increments.size()};
}

} // namespace nmc
