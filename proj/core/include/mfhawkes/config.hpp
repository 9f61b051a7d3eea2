#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mfhawkes/hawkes.hpp"
#include "mfhawkes/model.hpp"

namespace mfh
{
//! Invalid or incomplete experiment configuration
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct ModelConfig
{
    std::string family = "sigmoid_erlang";  //!< builtin family or "user"
    std::vector<double> params{2.0, 2.0};
    std::optional<UserModelInput> user;

    ModelSpec build() const;
};

struct GridConfig
{
    double horizon = 10.0;
    std::size_t n_steps = 1000;

    TimeGrid build() const { return TimeGrid(horizon, n_steps); }
};

struct EnsembleConfig
{
    std::vector<std::size_t> N{50, 200, 800};  //!< decay checks
    std::size_t replicates = 200;
    std::uint64_t master_seed = 20240611;
    std::size_t clt_N = 500;
    std::size_t clt_replicates = 500;
    std::size_t limit_draws = 2000;      //!< limit draws for KS comparisons
    std::size_t reference_draws = 5000;  //!< limit draws for moment checks
    std::size_t cox_replicates = 200;
};

struct SimulationConfig
{
    SimMode mode = SimMode::thinning;
    double layer_height = 1.0;
    std::size_t jump_budget = 16;
};

struct Tolerances
{
    double slope_lo = -0.75;
    double slope_hi = -0.25;
    double mc_sigmas = 3.0;       //!< slack for Monte Carlo mean bounds
    double coupling_sigmas = 4.0;
    double route_gap = 1e-4;
    std::size_t route_seeds = 20;
    double closed_form = 1e-6;
    std::size_t closed_form_steps = 2000;
    double neumann_tail = 1e-10;
    double cross_method = 1e-6;
    double ratio_lo = 0.5;
    double ratio_hi = 2.0;
    double clipped_fraction = 0.01;
    std::size_t allowed_failures = 1;
};

struct TestsConfig
{
    std::vector<std::string> enabled;  //!< check names, or "all"
    double alpha = 0.01;
    Tolerances tol;
};

struct OutputConfig
{
    std::string directory = "out";
    std::vector<std::string> formats{"csv"};
};

struct RegimeConfig
{
    std::string name = "stable";
    std::size_t N = 50;
    std::size_t replicates = 200;
};

struct ExperimentConfig
{
    ModelConfig model;
    GridConfig grid;
    EnsembleConfig ensemble;
    SimulationConfig simulation;
    TestsConfig tests;
    OutputConfig output;
    RegimeConfig regime;

    SeedPolicy seed() const;
    SimOptions sim_options() const;
    bool enabled(std::string_view check) const;
    //! Throws ConfigError on the first violated invariant
    void validate() const;
};

//! Parse the JSON configuration text; throws ConfigError
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(std::filesystem::path const& path);

//! Canonical JSON form, used in output metadata
std::string to_json(ExperimentConfig const& cfg);

}  // namespace mfh
