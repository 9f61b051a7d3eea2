#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mfhawkes/config.hpp"
#include "mfhawkes/cox.hpp"

namespace mfh
{
//! Sigmoid-Erlang parameter sets of the three dynamical regimes
struct RegimeParams
{
    std::string name;
    double gamma = 0;
    double beta = 0;
};

//! "stable" (2, 2), "critical" (4, 2) or "bistable" (5, 4)
RegimeParams regime_params(std::string_view name);
std::vector<std::string> regime_names();

struct RegimePanel
{
    RegimeParams params;
    std::vector<FixedPoint> fixed_points;
    CoxComparison comparison;
    double ratio_lo = 0;  //!< variance ratio range over [T/2, T]
    double ratio_hi = 0;
    bool ratio_in_band = false;
    std::vector<std::filesystem::path> files;
};

/*!
 * Simulate the named regime (cfg.regime) and write plot data to `out_dir`:
 *  - regime_<name>_paths.csv: regime,replicate,t,lambda_N,lambda_limit,lambda_hat
 *  - regime_<name>_stats.csv: regime,t,statistic,value
 *  - regime_<name>.meta: key-value metadata
 */
RegimePanel emit_regime_panels(ExperimentConfig const& cfg,
                               std::filesystem::path const& out_dir,
                               unsigned threads = 1);

}  // namespace mfh
