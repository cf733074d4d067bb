#include <doctest.h>

#include <cmath>
#include <vector>

#include "nmc/measure.hpp"
#include "nmc/sampling.hpp"
#include "nmc/stats.hpp"
#include "nmc/variational.hpp"

using namespace nmc;

namespace {

Path random_path(std::uint64_t seed, std::uint64_t stream, int max_jumps = 6)
{
    RngStream rng(seed, stream);
    int n = static_cast<int>(rng.uniform01() * (max_jumps + 1));
    std::vector<double> jumps(static_cast<std::size_t>(n));
    for (auto& t : jumps) t = rng.uniform01_open();
    std::sort(jumps.begin(), jumps.end());
    return Path(static_cast<int>(rng.uniform01() * 5), std::move(jumps));
}

} // namespace

TEST_CASE("girsanov density of a model against itself is 1")
{
    auto model = IntensityModel::exponential_time(0.8);
    for (int i = 0; i < 20; ++i) {
        Path p = random_path(201, static_cast<std::uint64_t>(i));
        CHECK(girsanov_density(model, model, p).density() == doctest::Approx(1.0));
    }
}

TEST_CASE("girsanov density between constant intensities")
{
    // dP_alpha / dP_1 on a path with n jumps: e^{1-alpha} alpha^n
    for (double alpha : {0.5, 2.0, 3.5}) {
        auto num = IntensityModel::constant(alpha);
        auto den = IntensityModel::constant(1.0);
        for (int i = 0; i < 10; ++i) {
            Path p = random_path(202, static_cast<std::uint64_t>(i));
            double expected = std::exp(1.0 - alpha) *
                              std::pow(alpha, p.jump_count());
            CHECK(girsanov_density(num, den, p).density() ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("density against the standard Poisson")
{
    auto unit = IntensityModel::constant(1.0);
    Path p = random_path(203, 0);
    CHECK(density_vs_std_poisson(unit, p).density() == doctest::Approx(1.0));

    double lam = 1.3;
    auto e = IntensityModel::exponential_time(lam);
    Path empty(4, {});
    double expected = std::exp(-(std::exp(lam) - 1.0) / lam + 1.0);
    CHECK(density_vs_std_poisson(e, empty).density() ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("girsanov chain rule and reciprocity")
{
    auto l = IntensityModel::exponential_time(0.6);
    auto k = IntensityModel::constant(2.0);
    auto m = IntensityModel::constant(0.7);
    for (int i = 0; i < 100; ++i) {
        Path p = random_path(204, static_cast<std::uint64_t>(i));
        double lk = girsanov_density(l, k, p).log_density;
        double km = girsanov_density(k, m, p).log_density;
        double lm = girsanov_density(l, m, p).log_density;
        CHECK(lk + km == doctest::Approx(lm).epsilon(1e-10));
        double kl = girsanov_density(k, l, p).log_density;
        CHECK(lk + kl == doctest::Approx(0.0).epsilon(1e-10));
    }
}

TEST_CASE("density normalization under the reference law")
{
    auto num = IntensityModel::exponential_time(1.0);
    auto den = IntensityModel::constant(1.0);
    const int n = 100000;
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        RngStream rng(205, static_cast<std::uint64_t>(i));
        w[static_cast<std::size_t>(i)] =
            girsanov_density(num, den, sample_nmc(den, 0, rng)).density();
    }
    auto s = sample_stats(w);
    CHECK(std::abs(s.mean - 1.0) < 3.0 * s.stderr_mean);
}

TEST_CASE("importance sampling transfers expectations")
{
    auto l = IntensityModel::exponential_time(0.9);
    auto unit = IntensityModel::constant(1.0);
    const int n = 100000;
    std::vector<double> weighted(static_cast<std::size_t>(n)),
        direct(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        RngStream r1(206, static_cast<std::uint64_t>(i));
        RngStream r2(207, static_cast<std::uint64_t>(i));
        Path p = sample_nmc(unit, 0, r1);
        weighted[static_cast<std::size_t>(i)] =
            density_vs_std_poisson(l, p).density() * p.jump_count();
        direct[static_cast<std::size_t>(i)] =
            sample_nmc(l, 0, r2).jump_count();
    }
    auto sw = sample_stats(weighted);
    auto sd = sample_stats(direct);
    double se = std::hypot(sw.stderr_mean, sd.stderr_mean);
    CHECK(std::abs(sw.mean - sd.mean) < 4.0 * se);
}

TEST_CASE("h-transform with constant terminal function leaves the intensity")
{
    auto model = IntensityModel::exponential_time(0.5);
    auto field = htransform_intensity_field(model, [](int) { return 1.0; }, 0, 10);
    for (double t : {0.1, 0.5, 0.9})
        for (int z : {0, 3, 7})
            CHECK(field.intensity(t, z) ==
                  doctest::Approx(model.value(t, z)).epsilon(1e-9));
}

TEST_CASE("h-transform with an indicator terminal reproduces the bridge intensity")
{
    auto model = IntensityModel::constant(1.0);
    const int y = 3;
    auto field = htransform_intensity_field(
        model, [y](int z) { return z == y ? 1.0 : 0.0; }, 0, y);
    HarmonicTable table(model, y, 0);
    for (double t : {0.1, 0.4, 0.8})
        for (int z = 0; z < y; ++z)
            CHECK(field.intensity(t, z) ==
                  doctest::Approx(bridge_intensity(model, table, t, z))
                      .epsilon(1e-6));
}

TEST_CASE("geometric terminal tilts a constant intensity to alpha*beta")
{
    double alpha = 1.5, beta = 1.2;
    auto model = IntensityModel::constant(alpha);
    auto field = htransform_intensity_field(
        model, [beta](int z) { return std::pow(beta, z); }, 0, 10);
    for (double t : {0.0, 0.3, 0.7, 0.95})
        for (int z : {0, 2, 5})
            CHECK(field.intensity(t, z) ==
                  doctest::Approx(alpha * beta).epsilon(1e-6));
}

TEST_CASE("sampling the indicator h-transform reproduces the bridge law")
{
    auto model = IntensityModel::exponential_time(1.0);
    const int y = 2;
    auto field = htransform_intensity_field(
        model, [y](int z) { return z == y ? 1.0 : 0.0; }, 0, y);
    std::vector<double> t1_f, t1_r;
    for (int i = 0; i < 10000; ++i) {
        RngStream r1(208, static_cast<std::uint64_t>(i));
        RngStream r2(209, static_cast<std::uint64_t>(i));
        Path a = field.sample(0, r1);
        CHECK(a.terminal_state() == y);
        t1_f.push_back(a.jump_times()[0]);
        t1_r.push_back(sample_bridge_rejection(model, 0, y, r2).jump_times()[0]);
    }
    CHECK(ks_test_two_sample(t1_f, t1_r) > 0.01);
}

TEST_CASE("h-transform rejects degenerate terminal data")
{
    auto model = IntensityModel::constant(1.0);
    CHECK_THROWS_AS(
        htransform_intensity_field(model, [](int) { return 0.0; }, 0, 5),
        DegenerateConditioningError);
    CHECK_THROWS_AS(
        htransform_intensity_field(model, [](int) { return -1.0; }, 0, 5),
        DomainError);
}

TEST_CASE("directional derivative of the Poisson density follows the invariant")
{
    // D_u G_l = -G_l * sum_i Xi(T_i, X_{T_i^-}) u(T_i); the left side is
    // approximated with a fourth-order Richardson stencil of G_l o Theta_u^eps.
    auto model = IntensityModel::exponential_time(0.9);
    Perturbation u = Perturbation::sine(1);
    const double eps = 1e-3;
    for (int i = 0; i < 30; ++i) {
        Path p = random_path(210, static_cast<std::uint64_t>(i));
        if (p.jump_count() == 0) continue;
        auto g_at = [&](double e) {
            return density_vs_std_poisson(model, perturb_path(p, u, e)).density();
        };
        double fd = (8.0 * (g_at(eps) - g_at(-eps)) -
                     (g_at(2.0 * eps) - g_at(-2.0 * eps))) /
                    (12.0 * eps);
        double g0 = density_vs_std_poisson(model, p).density();
        double expected = -g0 * stochastic_integral_dX(p, [&](double t, int z) {
                              return model.invariant(t, z) * u(t);
                          });
        CHECK(fd == doctest::Approx(expected).epsilon(1e-8));
    }
}
