// Batch front-end: experiment orchestration, seeding, replica fan-out and
// tabular outputs.  Exit status 0 on success, 2 on validation failure,
// 3 on step-budget exhaustion.

#include "rbmlab/experiments.hpp"
#include "rbmlab/sde.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using rbmlab::ExperimentConfig;

struct CliValues {
    std::string config_path;
    std::string rho;
    std::optional<double> dt, delta, b, eps, tol, far_radius;
    std::optional<std::uint64_t> n, seed;
    std::optional<unsigned> threads;
    std::string out_dir;
    std::string couple_mode;
};

void add_common_flags(CLI::App* cmd, CliValues& v) {
    cmd->add_option("--config", v.config_path, "JSON config file (flags override it)");
    cmd->add_option("--rho", v.rho, "torus scale rho > 1, or 'inf' for the exterior domain");
    cmd->add_option("--dt", v.dt, "base time step");
    cmd->add_option("--delta", v.delta, "launch offset of the excursion estimator");
    cmd->add_option("--b", v.b, "local-time quantum");
    cmd->add_option("--eps", v.eps, "separation / perturbation / cutoff (per experiment)");
    cmd->add_option("--N", v.n, "number of runs / replicas");
    cmd->add_option("--seed", v.seed, "master seed");
    cmd->add_option("--threads", v.threads,
                    "worker threads (falls back to RBM_LAB_THREADS)");
    cmd->add_option("--out", v.out_dir, "output directory");
    cmd->add_option("--tol", v.tol, "quadrature tolerance");
    cmd->add_option("--far", v.far_radius, "escape radius in the exterior domain");
}

ExperimentConfig build_config(const std::string& experiment, const CliValues& v) {
    nlohmann::json base = nlohmann::json::object();
    if (!v.config_path.empty()) {
        std::ifstream in(v.config_path);
        if (!in) throw rbmlab::ConfigError("cannot read config file '" + v.config_path + "'");
        try {
            in >> base;
        } catch (const nlohmann::json::parse_error& e) {
            throw rbmlab::ConfigError(std::string("config file is not valid JSON: ") + e.what());
        }
    }
    ExperimentConfig cfg = rbmlab::config_from_json(base);
    if (!experiment.empty()) cfg.experiment = experiment;
    if (cfg.experiment.empty())
        throw rbmlab::ConfigError("no experiment given (subcommand or config field)");

    if (!v.rho.empty()) {
        if (v.rho == "inf") {
            cfg.rho_inf = true;
            cfg.rho.reset();
        } else {
            try {
                cfg.rho = std::stod(v.rho);
                cfg.rho_inf = false;
            } catch (...) {
                throw rbmlab::ConfigError("--rho must be a number or 'inf'");
            }
        }
    }
    if (v.dt) cfg.dt = *v.dt;
    if (v.delta) cfg.delta = *v.delta;
    if (v.b) cfg.b = *v.b;
    if (v.eps) cfg.eps = *v.eps;
    if (v.n) cfg.n = *v.n;
    if (v.seed) cfg.seed = *v.seed;
    if (v.tol) cfg.tol = *v.tol;
    if (v.far_radius) cfg.far_radius = *v.far_radius;
    if (!v.out_dir.empty()) cfg.out_dir = v.out_dir;
    if (!v.couple_mode.empty()) cfg.couple.mode = v.couple_mode;

    if (v.threads) {
        cfg.threads = *v.threads;
    } else if (const char* env = std::getenv("RBM_LAB_THREADS")) {
        const long t = std::strtol(env, nullptr, 10);
        if (t >= 1) cfg.threads = static_cast<unsigned>(t);
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reflected-Brownian-motion lab: quadrature constants, excursion "
                 "Monte Carlo, synchronous-coupling and stochastic-flow experiments"};
    app.require_subcommand(0, 1);

    CliValues v;
    std::string experiment;
    app.add_option("--experiment", experiment,
                   "experiment name (alternative to a subcommand)");
    add_common_flags(&app, v);

    static const std::vector<std::pair<std::string, std::string>> subs{
        {"quad", "error-controlled quadrature of the two exponent integrals"},
        {"lambda", "Monte Carlo Lyapunov-exponent estimate at finite rho or rho=inf"},
        {"couple", "synchronous-coupling experiments (drift / flowcheck / pairhist)"},
        {"flow", "shared-noise particle-ensemble experiments"},
        {"validate-harmonic", "KS validation of simulated sphere-hit angles"},
    };
    for (const auto& [name, desc] : subs) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        add_common_flags(cmd, v);
        if (name == "couple")
            cmd->add_option("--couple-mode", v.couple_mode, "drift | flowcheck | pairhist");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& [name, desc] : subs)
            if (app.got_subcommand(name)) experiment = name;
        ExperimentConfig cfg = build_config(experiment, v);
        rbmlab::run_experiment(std::move(cfg));
        return 0;
    } catch (const rbmlab::ConfigError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const rbmlab::BudgetExceeded& e) {
        std::cerr << "budget exhausted: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
