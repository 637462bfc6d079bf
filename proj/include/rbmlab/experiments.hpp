#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace rbmlab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Resolved experiment configuration.  Optional fields left unset by the
/// config file / CLI are filled with per-experiment defaults; every run
/// writes the fully resolved form into its manifest.
struct ExperimentConfig {
    std::string experiment; // quad | lambda | couple | flow | validate-harmonic

    std::optional<double> rho; // unset -> per-experiment default; inf allowed
    bool rho_inf = false;
    std::optional<double> dt;
    double delta = 1e-3;
    std::optional<double> b;
    std::optional<double> eps;
    std::optional<std::uint64_t> n;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string out_dir = "rbm_out";
    double tol = 1e-8;
    double far_radius = 64.0;

    struct Couple {
        std::string mode = "drift"; // drift | flowcheck | pairhist
        std::size_t rungs = 1;
        double horizon = 50000.0;
        double c4 = 1.0;
        std::size_t n_seeds = 10;
        int hist_bins = 64;
        double hist_threshold = 1e-3;
    } couple;

    struct Flow {
        int lattice_n = 8;
        int bins = 4;
        double horizon = 40.0;
        int snapshots = 8;
        bool emit_frames = true;
    } flow;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

/// Fill unset optionals with the experiment's defaults.
void apply_defaults(ExperimentConfig& c);

/// Schema validation; throws ConfigError with a distinct message per rule.
void validate_config(const ExperimentConfig& c);

nlohmann::json run_quad(const ExperimentConfig& c);
nlohmann::json run_lambda(const ExperimentConfig& c);
nlohmann::json run_validate_harmonic(const ExperimentConfig& c);
nlohmann::json run_couple(const ExperimentConfig& c);
nlohmann::json run_flow(const ExperimentConfig& c);

/// Validate, dispatch, and write summary.json / manifest.json plus the
/// experiment's data files under out_dir.
void run_experiment(ExperimentConfig cfg);

} // namespace rbmlab
