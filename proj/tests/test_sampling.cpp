#include <doctest.h>

#include <cmath>
#include <vector>

#include "nmc/sampling.hpp"
#include "nmc/stats.hpp"

using namespace nmc;

namespace {

std::vector<Path> draw_nmc(const IntensityModel& model, int x0, int n,
                           std::uint64_t seed)
{
    std::vector<Path> paths;
    paths.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        paths.push_back(sample_nmc(model, x0, rng));
    }
    return paths;
}

double poisson_factorial_h(double t, int m)
{
    // e^{-(1-t)} (1-t)^m / m!
    return std::exp(-(1.0 - t)) * std::pow(1.0 - t, m) / std::tgamma(m + 1.0);
}

} // namespace

TEST_CASE("forward sampler mean increments")
{
    const int n = 100000;

    auto paths = draw_nmc(IntensityModel::constant(1.0), 0, n, 101);
    std::vector<double> incr;
    incr.reserve(paths.size());
    for (const auto& p : paths) incr.push_back(p.jump_count());
    auto s = sample_stats(incr);
    CHECK(std::abs(s.mean - 1.0) < 3.0 * s.stderr_mean);

    // E[X1 - X0] = int_0^1 e^t dt = e - 1
    paths = draw_nmc(IntensityModel::exponential_time(1.0), 0, n, 102);
    incr.clear();
    for (const auto& p : paths) incr.push_back(p.jump_count());
    s = sample_stats(incr);
    CHECK(std::abs(s.mean - (std::exp(1.0) - 1.0)) < 3.0 * s.stderr_mean);
}

TEST_CASE("forward sampler zero-jump frequency for a rare process")
{
    const int n = 100000;
    auto paths = draw_nmc(IntensityModel::constant(0.01), 0, n, 103);
    double empty = 0.0;
    for (const auto& p : paths)
        if (p.jump_count() == 0) empty += 1.0;
    double freq = empty / n;
    double target = std::exp(-0.01);
    double se = std::sqrt(target * (1.0 - target) / n);
    CHECK(std::abs(freq - target) < 3.0 * se);
}

TEST_CASE("forward sampler is deterministic per (seed, stream)")
{
    auto model = IntensityModel::exponential_time(0.5);
    RngStream a(7, 3), b(7, 3);
    CHECK(sample_nmc(model, 0, a) == sample_nmc(model, 0, b));
}

TEST_CASE("thinning matches integrated intensity per interval")
{
    auto model = IntensityModel::exponential_time(1.0);
    const int n = 100000, bins = 10;
    std::vector<std::vector<double>> counts(
        bins, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) {
        RngStream rng(104, static_cast<std::uint64_t>(i));
        Path p = sample_nmc(model, 0, rng);
        for (double t : p.jump_times())
            counts[std::min(static_cast<int>(t * bins), bins - 1)]
                  [static_cast<std::size_t>(i)] += 1.0;
    }
    for (int b = 0; b < bins; ++b) {
        auto s = sample_stats(counts[static_cast<std::size_t>(b)]);
        double expected = std::exp((b + 1.0) / bins) - std::exp(b * 1.0 / bins);
        CHECK(std::abs(s.mean - expected) < 4.0 * s.stderr_mean);
    }
}

TEST_CASE("poisson bridge endpoints and uniform law")
{
    RngStream rng(105, 0);
    for (int i = 0; i < 20; ++i) {
        Path p = sample_poisson_bridge(0, 0, rng);
        CHECK(p.jump_count() == 0);
    }
    CHECK_THROWS_AS(sample_poisson_bridge(2, 1, rng), DomainError);

    std::vector<double> t1;
    for (int i = 0; i < 10000; ++i) {
        RngStream r(106, static_cast<std::uint64_t>(i));
        t1.push_back(sample_poisson_bridge(0, 1, r).jump_times()[0]);
    }
    CHECK(ks_test_uniform(t1) > 0.01);
}

TEST_CASE("harmonic table reproduces the Poisson conditional law")
{
    auto model = IntensityModel::constant(1.0);
    const int y = 5;
    HarmonicTable table(model, y, 0);
    double worst = 0.0;
    for (std::size_t i = 0; i < table.times().size(); ++i) {
        double t = table.times()[i];
        for (int z = 0; z <= y; ++z)
            worst = std::max(worst,
                             std::abs(table.node_value(static_cast<int>(i), z) -
                                      poisson_factorial_h(t, y - z)));
    }
    CHECK(worst < 1e-7);
    // boundary condition
    int last = static_cast<int>(table.times().size()) - 1;
    CHECK(table.node_value(last, y) == doctest::Approx(1.0));
    for (int z = 0; z < y; ++z) CHECK(table.node_value(last, z) == 0.0);
}

TEST_CASE("harmonic table residual stays below tolerance")
{
    HarmonicTable table(IntensityModel::exponential_time(1.0), 4, 0);
    CHECK(table.max_residual() <= 1e-8);
}

TEST_CASE("bridge intensity")
{
    auto model = IntensityModel::constant(1.0);
    const int y = 4;
    HarmonicTable table(model, y, 0);
    for (double t : {0.1, 0.5, 0.9, 0.999})
        for (int z = 0; z < y; ++z)
            CHECK(bridge_intensity(model, table, t, z) ==
                  doctest::Approx((y - z) / (1.0 - t)).epsilon(1e-5));
    CHECK(bridge_intensity(model, table, 0.5, y) == 0.0);
}

TEST_CASE("bridge samplers pin the terminal state")
{
    auto model = IntensityModel::exponential_time(1.0);
    HarmonicTable table(model, 3, 0);
    for (int i = 0; i < 200; ++i) {
        RngStream rng(107, static_cast<std::uint64_t>(i));
        CHECK(sample_bridge(model, table, 0, 3, rng).terminal_state() == 3);
    }
    for (int i = 0; i < 50; ++i) {
        RngStream rng(108, static_cast<std::uint64_t>(i));
        CHECK(sample_bridge_rejection(model, 0, 2, rng).terminal_state() == 2);
    }
    RngStream rng(109, 0);
    CHECK(sample_bridge(model, table, 3, 3, rng).jump_count() == 0);
}

TEST_CASE("h-transform bridge matches the order-statistics sampler")
{
    auto model = IntensityModel::constant(1.0);
    HarmonicTable table(model, 3, 0);
    std::vector<double> t1_h, t1_os;
    for (int i = 0; i < 10000; ++i) {
        RngStream r1(110, static_cast<std::uint64_t>(i));
        RngStream r2(111, static_cast<std::uint64_t>(i));
        t1_h.push_back(sample_bridge(model, table, 0, 3, r1).jump_times()[0]);
        t1_os.push_back(sample_poisson_bridge(0, 3, r2).jump_times()[0]);
    }
    CHECK(ks_test_two_sample(t1_h, t1_os) > 0.01);
}

TEST_CASE("h-transform bridge matches the rejection oracle")
{
    auto model = IntensityModel::exponential_time(1.0);
    HarmonicTable table(model, 2, 0);
    std::vector<double> t1_h, t2_h, t1_r, t2_r;
    for (int i = 0; i < 10000; ++i) {
        RngStream r1(112, static_cast<std::uint64_t>(i));
        RngStream r2(113, static_cast<std::uint64_t>(i));
        Path a = sample_bridge(model, table, 0, 2, r1);
        Path b = sample_bridge_rejection(model, 0, 2, r2);
        t1_h.push_back(a.jump_times()[0]);
        t2_h.push_back(a.jump_times()[1]);
        t1_r.push_back(b.jump_times()[0]);
        t2_r.push_back(b.jump_times()[1]);
    }
    CHECK(ks_test_two_sample(t1_h, t1_r) > 0.01);
    CHECK(ks_test_two_sample(t2_h, t2_r) > 0.01);
}

TEST_CASE("rejection sampler acceptance rates for the unit Poisson")
{
    auto model = IntensityModel::constant(1.0);
    double target = std::exp(-1.0); // pmf of Poisson(1) at both 0 and 1
    for (int y : {0, 1}) {
        RejectionStats stats;
        RngStream rng(114 + static_cast<std::uint64_t>(y), 0);
        for (int i = 0; i < 20000; ++i)
            sample_bridge_rejection(model, 0, y, rng, 1000000, &stats);
        double rate = stats.acceptance_rate();
        double se = std::sqrt(target * (1.0 - target) /
                              static_cast<double>(stats.attempts));
        CHECK(std::abs(rate - target) < 4.0 * se);
    }
}

TEST_CASE("thinning edge cases")
{
    Path p(1, {0.2, 0.5, 0.8});
    RngStream rng(115, 0);
    CHECK(thin_path(p, 1.0, rng) == p);
    CHECK(thin_path(p, 0.0, rng).jump_count() == 0);
    CHECK(thin_path(p, 0.0, rng).x0() == 1);
    CHECK_THROWS_AS(thin_path(p, 1.5, rng), DomainError);
}

TEST_CASE("thinned Poisson(2) counts match Poisson(1)")
{
    auto model = IntensityModel::constant(2.0);
    const int n = 100000;
    std::vector<double> observed(8, 0.0);
    for (int i = 0; i < n; ++i) {
        RngStream rng(116, static_cast<std::uint64_t>(i));
        Path thinned = thin_path(sample_nmc(model, 0, rng), 0.5, rng);
        int k = std::min(thinned.jump_count(), 7);
        observed[static_cast<std::size_t>(k)] += 1.0;
    }
    std::vector<double> expected(8, 0.0);
    double tail = 1.0;
    for (int k = 0; k < 7; ++k) {
        expected[static_cast<std::size_t>(k)] = n * poisson_pmf(k, 1.0);
        tail -= poisson_pmf(k, 1.0);
    }
    expected[7] = n * tail;
    CHECK(chi_square_gof_pvalue(observed, expected) > 0.01);
}

TEST_CASE("superposition basics and tie detection")
{
    Path p1(2, {0.3, 0.6});
    Path empty(0, {});
    CHECK(superpose_paths(p1, empty) == p1);
    CHECK(superpose_paths(p1, Path(0, {0.4})).jump_count() == 3);
    CHECK(superpose_paths(p1, Path(5, {0.4})).x0() == 2);
    CHECK_THROWS_AS(superpose_paths(p1, Path(0, {0.3})), TieError);
}

TEST_CASE("superposing two unit Poissons gives Poisson(2) counts")
{
    auto model = IntensityModel::constant(1.0);
    const int n = 100000;
    std::vector<double> observed(10, 0.0);
    for (int i = 0; i < n; ++i) {
        RngStream r1(117, static_cast<std::uint64_t>(i));
        RngStream r2(118, static_cast<std::uint64_t>(i));
        Path merged;
        for (;;) {
            try {
                merged = superpose_paths(sample_nmc(model, 0, r1),
                                         sample_nmc(model, 0, r2));
                break;
            } catch (const TieError&) {
            }
        }
        int k = std::min(merged.jump_count(), 9);
        observed[static_cast<std::size_t>(k)] += 1.0;
    }
    std::vector<double> expected(10, 0.0);
    double tail = 1.0;
    for (int k = 0; k < 9; ++k) {
        expected[static_cast<std::size_t>(k)] = n * poisson_pmf(k, 2.0);
        tail -= poisson_pmf(k, 2.0);
    }
    expected[9] = n * tail;
    CHECK(chi_square_gof_pvalue(observed, expected) > 0.01);
}
