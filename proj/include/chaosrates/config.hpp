#pragma once

#include "chaosrates/chaos.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace chaosrates {

// Any schema violation: unknown key, missing key, wrong type, bad value.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridConfig {
    double t_max = 0.0;
    Eigen::Index n_steps = 0;
    double tail_factor = 1.0;
};

struct McConfig {
    Eigen::Index n_paths = 0;
    std::uint64_t seed = 0;
    bool antithetic = false;
};

struct OptionConfig {
    double t = 0.0;
    double T = 0.0;
    double K = 0.0;
};

struct CashflowConfig {
    double pay_time = 0.0;
    double amount = 1.0;
};

struct RunConfig {
    bool has_spec = false;
    ChaosSpec spec{FirstChaos{}};
    bool has_grid = false;
    GridConfig grid;
    bool has_mc = false;
    McConfig mc;
    std::string outputs = "out";
    std::vector<double> maturities;
    bool has_option = false;
    OptionConfig option;
    bool has_cashflow = false;
    CashflowConfig cashflow;
    std::string curve_file;
    std::vector<double> validate_times;
    Eigen::Index dump_paths = 16;
    Eigen::Index surface_paths = 0; // per-path option price samples to emit
    nlohmann::json raw;             // echoed verbatim into the run manifest
};

DetFn detfn_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json detfn_to_json(const DetFn& fn);

ChaosSpec spec_from_json(const nlohmann::json& j);
// Serializes the three closed-form families and the named custom integrands.
nlohmann::json spec_to_json(const ChaosSpec& spec);

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

} // namespace chaosrates
