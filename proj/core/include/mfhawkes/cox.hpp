#pragma once

#include <cstdint>
#include <vector>

#include "mfhawkes/hawkes.hpp"
#include "mfhawkes/limit.hpp"
#include "mfhawkes/model.hpp"
#include "mfhawkes/random.hpp"

namespace mfh
{
/*!
 * Second-order network approximation: N conditionally independent Cox
 * processes with intensity lambda_hat = lambda + sigma/sqrt(N), and the
 * first-order Poisson(lambda) baseline thinned from the same measures.
 */
struct CoxApproximation
{
    TimeGrid grid;
    GridFunction lambda_hat;  //!< unclipped lambda + sigma/sqrt(N)
    EventPaths events;
    EventPaths baseline;
    std::size_t N = 0;
    //! Fraction of grid points where lambda_hat < 0 (thinned as 0)
    double clipped_fraction = 0;
};

CoxApproximation build_cox(LimitSolution const& limit,
                           GridFunction const& sigma_draw,
                           std::size_t N,
                           TimeGrid const& grid,
                           SeedPolicy const& seed,
                           std::uint64_t replicate);

//! Seed for sigma draws feeding build_cox, disjoint from every other stream
SeedPolicy cox_noise_seed(SeedPolicy const& seed);

//! Mean over units of sup_t |Zhat_i(t) - Pi_i(t)|
double mean_coupling_distance(CoxApproximation const& cox);

struct CoxComparisonRow
{
    double t = 0;
    double var_hawkes = 0;   //!< Var lambda^N(t)
    double var_cox = 0;      //!< Var lambda_hat(t)
    double ratio = 0;        //!< var_cox / var_hawkes (1 if both vanish)
    double ks_cox = 0;       //!< KS of mean per-unit counts, Cox vs Hawkes
    double ks_cox_p = 1;
    double ks_poisson = 0;   //!< same, Poisson(lambda) vs Hawkes
    double ks_poisson_p = 1;
};

struct CoxComparison
{
    std::size_t N = 0;
    std::size_t replicates = 0;
    std::vector<CoxComparisonRow> rows;
    double mean_coupling = 0;     //!< mean ||Zhat_i - Pi_i||_T
    double coupling_se = 0;
    double mean_sigma_norm = 0;   //!< mean ||sigma||_T
    double sigma_norm_se = 0;
    double mean_clipped = 0;
    double max_clipped = 0;
    //! lambda^N, lambda_hat per replicate on the grid (for plot data)
    std::vector<GridFunction> hawkes_paths;
    std::vector<GridFunction> cox_paths;
};

//! Fractions of T at which the comparison table is evaluated
std::vector<double> comparison_fractions();

/*!
 * Run `replicates` Hawkes networks and Cox approximations side by side.
 * Replicate r of both uses the same Poisson measures. Requires at least 100
 * replicates.
 */
CoxComparison compare_cox_vs_hawkes(ModelSpec const& spec,
                                    LimitSolution const& limit,
                                    std::size_t N,
                                    TimeGrid const& grid,
                                    std::size_t replicates,
                                    SeedPolicy const& seed,
                                    unsigned threads = 1,
                                    bool keep_paths = false);

}  // namespace mfh
