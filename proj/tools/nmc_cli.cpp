// Command-line front end: model configs in, CSV paths and JSON reports out.
//
// Exit codes: 0 pass/accept, 2 statistical reject, 3 inconclusive,
// 64 config/parse error, 70 numeric error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nmc/config.hpp"
#include "nmc/nmc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitReject = 2;
constexpr int kExitInconclusive = 3;
constexpr int kExitConfig = 64;
constexpr int kExitNumeric = 70;

struct CommonOpts {
    std::string config_file;
    std::string out_dir = ".";
    long paths = -1;          // -1: take from config
    long long seed = -1;      // -1: take from config
    int workers = 1;
};

json load_config(const CommonOpts& opts)
{
    std::ifstream in(opts.config_file);
    if (!in) throw nmc::ConfigError("cannot open config file " + opts.config_file);
    json cfg = json::parse(in);
    if (opts.paths >= 0) cfg["paths"] = opts.paths;
    if (opts.seed >= 0) cfg["seed"] = opts.seed;
    if (const char* env = std::getenv("NMC_SEED")) cfg["seed"] = std::atoll(env);
    return cfg;
}

std::uint64_t seed_from(const json& cfg)
{
    return cfg.value("seed", std::uint64_t{0});
}

long path_count_from(const json& cfg)
{
    long n = cfg.value("paths", 0L);
    if (n < 1) throw nmc::ConfigError("path count must be >= 1");
    return n;
}

json provenance(const json& cfg)
{
    return json{{"config", cfg}, {"library_version", nmc::kVersion}};
}

void write_json(const fs::path& file, const json& j)
{
    std::ofstream out(file);
    out << j.dump(2) << "\n";
}

void write_paths_csv(const fs::path& file, const std::vector<nmc::Path>& paths)
{
    std::ofstream out(file);
    for (const auto& p : paths) out << p.to_csv() << "\n";
}

std::vector<nmc::Path> read_paths_csv(const std::string& file)
{
    std::ifstream in(file);
    if (!in) throw nmc::ConfigError("cannot open path file " + file);
    std::vector<nmc::Path> paths;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        paths.push_back(nmc::Path::from_csv(line));
    }
    if (paths.empty()) throw nmc::ConfigError("path file is empty: " + file);
    return paths;
}

// Deterministic at any worker count: path i always uses stream index i.
template <typename SampleOne>
std::vector<nmc::Path> sample_indexed(long n, int workers, SampleOne&& sample_one)
{
    std::vector<nmc::Path> paths(static_cast<std::size_t>(n));
    nmc::detail::parallel_for(
        static_cast<std::size_t>(n), workers,
        [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i)
                paths[i] = sample_one(static_cast<std::uint64_t>(i));
        });
    return paths;
}

// Path source spec: {"type": "nmc"|"poisson_bridge"|"bridge"|"mixture", ...}.
std::vector<nmc::Path> sample_source(const json& src, long n, std::uint64_t seed,
                                     int workers)
{
    const std::string type = src.at("type").get<std::string>();
    if (type == "nmc") {
        auto model = nmc::model_from_json(src.at("model"));
        int x0 = src.value("x0", 0);
        return sample_indexed(n, workers, [&](std::uint64_t i) {
            nmc::RngStream rng(seed, i);
            return nmc::sample_nmc(model, x0, rng);
        });
    }
    if (type == "poisson_bridge") {
        int x = src.at("x").get<int>();
        int y = src.at("y").get<int>();
        return sample_indexed(n, workers, [&](std::uint64_t i) {
            nmc::RngStream rng(seed, i);
            return nmc::sample_poisson_bridge(x, y, rng);
        });
    }
    if (type == "bridge") {
        auto model = nmc::model_from_json(src.at("model"));
        int x = src.at("x").get<int>();
        int y = src.at("y").get<int>();
        nmc::HarmonicTable htable(model, y, x);
        return sample_indexed(n, workers, [&](std::uint64_t i) {
            nmc::RngStream rng(seed, i);
            return nmc::sample_bridge(model, htable, x, y, rng);
        });
    }
    if (type == "mixture") {
        const auto& comps = src.at("components");
        // sample each component law up front per path index
        std::vector<double> weights;
        for (const auto& c : comps) weights.push_back(c.at("weight").get<double>());
        return sample_indexed(n, workers, [&](std::uint64_t i) {
            nmc::RngStream rng(seed, i);
            double u = rng.uniform01();
            double acc = 0.0;
            std::size_t pick = weights.size() - 1;
            for (std::size_t c = 0; c < weights.size(); ++c) {
                acc += weights[c];
                if (u < acc) { pick = c; break; }
            }
            // one-shot recursion with the already-advanced stream
            const json& sub = comps.at(pick).at("source");
            const std::string sub_type = sub.at("type").get<std::string>();
            if (sub_type == "poisson_bridge")
                return nmc::sample_poisson_bridge(sub.at("x").get<int>(),
                                                  sub.at("y").get<int>(), rng);
            if (sub_type == "nmc")
                return nmc::sample_nmc(nmc::model_from_json(sub.at("model")),
                                       sub.value("x0", 0), rng);
            throw nmc::ConfigError("mixture component type must be nmc or poisson_bridge");
        });
    }
    throw nmc::ConfigError("unknown path source type '" + type + "'");
}

json summarize_paths(const std::vector<nmc::Path>& paths)
{
    std::map<int, long> histogram;
    double mean_incr = 0.0;
    for (const auto& p : paths) {
        ++histogram[p.jump_count()];
        mean_incr += p.jump_count();
    }
    mean_incr /= static_cast<double>(paths.size());
    json hist = json::object();
    for (auto [k, v] : histogram) hist[std::to_string(k)] = v;
    return json{{"paths", paths.size()},
                {"mean_terminal_increment", mean_incr},
                {"jump_count_histogram", hist}};
}

json report_to_json(const nmc::DualityReport& report)
{
    json pairs = json::array();
    for (const auto& r : report.pairs) {
        pairs.push_back(json{{"pair", r.name},
                             {"lhs_estimate", r.lhs_estimate},
                             {"rhs_estimate", r.rhs_estimate},
                             {"paired_diff_mean", r.paired_diff_mean},
                             {"paired_diff_stderr", r.paired_diff_stderr},
                             {"z_score", r.z_score},
                             {"p_value", r.p_value},
                             {"pass", r.pass}});
    }
    return json{{"pairs", pairs},
                {"n", report.n},
                {"alpha_level", report.alpha_level},
                {"all_pass", report.all_pass},
                {"verdict", nmc::verdict_name(report.verdict)}};
}

int exit_code_for(const nmc::DualityReport& report)
{
    switch (report.verdict) {
    case nmc::Verdict::Accept: return kExitPass;
    case nmc::Verdict::Reject: return kExitReject;
    default: return kExitInconclusive;
    }
}

int cmd_simulate(const CommonOpts& opts)
{
    json cfg = load_config(opts);
    auto model = nmc::model_from_json(cfg.at("model"));
    int x0 = cfg.value("x0", 0);
    long n = path_count_from(cfg);
    std::uint64_t seed = seed_from(cfg);
    auto paths = sample_indexed(n, opts.workers, [&](std::uint64_t i) {
        nmc::RngStream rng(seed, i);
        return nmc::sample_nmc(model, x0, rng);
    });
    fs::create_directories(opts.out_dir);
    write_paths_csv(fs::path(opts.out_dir) / "paths.csv", paths);
    json summary = summarize_paths(paths);
    summary["provenance"] = provenance(cfg);
    write_json(fs::path(opts.out_dir) / "summary.json", summary);
    std::cout << "simulate: " << n << " paths, mean increment "
              << summary["mean_terminal_increment"] << "\n";
    return kExitPass;
}

int cmd_bridge(const CommonOpts& opts)
{
    json cfg = load_config(opts);
    auto model = nmc::model_from_json(cfg.at("model"));
    int x = cfg.value("x0", 0);
    int y = cfg.at("y").get<int>();
    long n = path_count_from(cfg);
    std::uint64_t seed = seed_from(cfg);
    const std::string sampler = cfg.value("sampler", std::string("htransform"));

    std::vector<nmc::Path> paths;
    if (sampler == "htransform") {
        nmc::HarmonicTable htable(model, y, x);
        paths = sample_indexed(n, opts.workers, [&](std::uint64_t i) {
            nmc::RngStream rng(seed, i);
            return nmc::sample_bridge(model, htable, x, y, rng);
        });
    } else if (sampler == "rejection") {
        paths = sample_indexed(n, opts.workers, [&](std::uint64_t i) {
            nmc::RngStream rng(seed, i);
            return nmc::sample_bridge_rejection(model, x, y, rng);
        });
    } else {
        throw nmc::ConfigError("bridge sampler must be htransform or rejection");
    }
    fs::create_directories(opts.out_dir);
    write_paths_csv(fs::path(opts.out_dir) / "paths.csv", paths);
    json summary = summarize_paths(paths);
    summary["sampler"] = sampler;
    summary["provenance"] = provenance(cfg);
    write_json(fs::path(opts.out_dir) / "summary.json", summary);
    std::cout << "bridge: " << n << " paths from " << x << " to " << y << "\n";
    return kExitPass;
}

int cmd_invariant(const CommonOpts& opts)
{
    json cfg = load_config(opts);
    auto model = nmc::model_from_json(cfg.at("model"));
    int time_points = cfg.value("time_points", 1001);
    json out;
    out["provenance"] = provenance(cfg);
    fs::create_directories(opts.out_dir);

    if (cfg.contains("model2")) {
        auto model2 = nmc::model_from_json(cfg.at("model2"));
        double tol = cfg.value("tol", nmc::default_class_tol(model, model2));
        auto cmp = nmc::same_reciprocal_class(model, model2, tol, time_points);
        out["grid"] = {{"time_points", time_points}};
        out["tol"] = tol;
        out["max_abs_deviation"] = cmp.max_abs_deviation;
        out["same_class"] = cmp.same_class;
        out["verdict"] = cmp.same_class ? "same-class" : "different-class";
        write_json(fs::path(opts.out_dir) / "invariant.json", out);
        std::cout << "invariant: " << out["verdict"].get<std::string>()
                  << ", max deviation " << cmp.max_abs_deviation << "\n";
        return kExitPass;
    }

    auto [z_lo, z_hi] = model.space_window();
    int z_min = cfg.value("z_min", z_lo);
    int z_max = cfg.value("z_max", z_hi - 1);
    auto grid = nmc::evaluate_invariant_grid(model, time_points, z_min, z_max);
    out["grid"] = {{"time_points", time_points},
                   {"z_min", grid.z_min},
                   {"z_max", grid.z_max}};
    out["values"] = grid.values;
    write_json(fs::path(opts.out_dir) / "invariant.json", out);
    std::cout << "invariant: grid " << time_points << " x "
              << (z_max - z_min + 1) << " written\n";
    return kExitPass;
}

int cmd_girsanov(const CommonOpts& opts)
{
    json cfg = load_config(opts);
    auto num = nmc::model_from_json(cfg.at("model"));
    auto den = nmc::model_from_json(cfg.at("model2"));
    std::uint64_t seed = seed_from(cfg);
    json out;
    out["provenance"] = provenance(cfg);

    if (cfg.contains("paths_file")) {
        auto paths = read_paths_csv(cfg.at("paths_file").get<std::string>());
        json densities = json::array();
        for (const auto& p : paths)
            densities.push_back(nmc::girsanov_density(num, den, p).log_density);
        out["log_densities"] = densities;
    }

    // normalization check: E_den[dP_num/dP_den] = 1
    long n = cfg.value("paths", 100000L);
    int x0 = cfg.value("x0", 0);
    std::vector<double> weights(static_cast<std::size_t>(n));
    nmc::detail::parallel_for(
        static_cast<std::size_t>(n), opts.workers,
        [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                nmc::RngStream rng(seed, i);
                nmc::Path p = nmc::sample_nmc(den, x0, rng);
                weights[i] = nmc::girsanov_density(num, den, p).density();
            }
        });
    auto stats = nmc::sample_stats(weights);
    out["normalization_check"] = {{"n", n},
                                  {"mean", stats.mean},
                                  {"stderr", stats.stderr_mean},
                                  {"z_score",
                                   (stats.mean - 1.0) / stats.stderr_mean}};
    fs::create_directories(opts.out_dir);
    write_json(fs::path(opts.out_dir) / "girsanov.json", out);
    std::cout << "girsanov: normalization mean " << stats.mean << " +- "
              << stats.stderr_mean << "\n";
    return kExitPass;
}

int cmd_duality(const CommonOpts& opts, bool membership)
{
    json cfg = load_config(opts);
    auto model = nmc::model_from_json(cfg.at("model"));
    auto dict = nmc::dictionary_from_json(cfg.contains("dictionary")
                                              ? cfg.at("dictionary")
                                              : json());
    double alpha = cfg.value("alpha_level", 0.01);
    std::uint64_t seed = seed_from(cfg);

    std::vector<nmc::Path> paths;
    if (cfg.contains("paths_file"))
        paths = read_paths_csv(cfg.at("paths_file").get<std::string>());
    else if (cfg.contains("source"))
        paths = sample_source(cfg.at("source"), path_count_from(cfg), seed,
                              opts.workers);
    else
        throw nmc::ConfigError("need 'paths_file' or 'source'");

    auto report = nmc::membership_test(paths, model, dict, alpha, opts.workers);
    json out = report_to_json(report);
    out["provenance"] = provenance(cfg);
    if (membership && report.verdict == nmc::Verdict::Accept)
        out["note"] = "ACCEPT means not falsified by this finite dictionary, "
                      "not a proof of membership";
    fs::create_directories(opts.out_dir);
    const char* file = membership ? "membership.json" : "duality.json";
    write_json(fs::path(opts.out_dir) / file, out);
    std::cout << (membership ? "membership-test: " : "duality-check: ")
              << nmc::verdict_name(report.verdict) << " (n=" << report.n
              << ", " << report.pairs.size() << " pairs)\n";
    return exit_code_for(report);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulation and duality-formula verification for nice Markov "
                 "counting processes and their bridges"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string command;
    for (const char* name : {"simulate", "bridge", "invariant", "girsanov",
                             "duality-check", "membership-test"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opts.config_file, "config file (JSON)")
            ->required();
        sub->add_option("--seed", opts.seed, "RNG seed (overrides config)");
        sub->add_option("--paths", opts.paths, "path count (overrides config)");
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--workers", opts.workers, "worker thread count");
        sub->callback([&command, name] { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (command == "simulate") return cmd_simulate(opts);
        if (command == "bridge") return cmd_bridge(opts);
        if (command == "invariant") return cmd_invariant(opts);
        if (command == "girsanov") return cmd_girsanov(opts);
        if (command == "duality-check") return cmd_duality(opts, false);
        if (command == "membership-test") return cmd_duality(opts, true);
        std::cerr << "unknown command\n";
        return kExitConfig;
    } catch (const nmc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nmc::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
