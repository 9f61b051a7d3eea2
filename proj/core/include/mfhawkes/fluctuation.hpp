#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mfhawkes/hawkes.hpp"
#include "mfhawkes/limit.hpp"
#include "mfhawkes/model.hpp"
#include "mfhawkes/random.hpp"
#include "mfhawkes/volterra.hpp"

namespace mfh
{
/*!
 * Rescaled finite-N deviations from the mean-field limit.
 *
 * Y = (sum_i Z_i - N m)/sqrt(N), split as Y = Mbar + A with the martingale
 * Mbar = (sum_i Z_i - N Lambda^N)/sqrt(N) and drift A = sqrt(N)(Lambda^N - m).
 * X = sqrt(N)(u^N - x) is the rescaled input and r = A - int f'(x) X.
 */
struct FluctuationPaths
{
    TimeGrid grid;
    GridFunction Y;
    GridFunction X;
    GridFunction Mbar;
    GridFunction A;
    GridFunction r;
    GridFunction intensity_fluct;  //!< sqrt(N)(lambda^N - lambda)
};

FluctuationPaths compute_fluctuations(SimResult const& sim,
                                      LimitSolution const& limit,
                                      ModelSpec const& spec,
                                      std::size_t N);

//! Largest jump of Mbar: max over jump times of the counting-process step
double max_martingale_jump(EventPaths const& events, std::size_t N);

enum class LimitRoute
{
    resolvent,   //!< G_Y = W + int K W
    fixed_point  //!< forward march of G_Y = W + int kappa G_Y
};
std::string_view to_string(LimitRoute route);
LimitRoute parse_limit_route(std::string_view name);

//! One draw of the Gaussian limit (W_lambda, G_Y, G_X, sigma)
struct LimitFluctuationSample
{
    TimeGrid grid;
    GridFunction W_lambda;
    GridFunction G_Y;
    GridFunction G_X;
    GridFunction sigma;
    LimitRoute route = LimitRoute::resolvent;
};

/*!
 * Operators needed to sample the limit. The resolvent route reads
 * `resolvent`, the fixed-point route reads `kappa`; the other may be null.
 */
struct LimitOperators
{
    KernelTable const* kappa = nullptr;
    ResolventTable const* resolvent = nullptr;
};

//! W_lambda by left-point increments sqrt(lambda(t_k) dt) xi_k
GridFunction sample_time_changed_bm(GridFunction const& lambda,
                                    SeedPolicy const& seed,
                                    std::uint64_t replicate,
                                    std::uint32_t stream = 0);

LimitFluctuationSample sample_limit(LimitSolution const& limit,
                                    ModelSpec const& spec,
                                    LimitOperators const& ops,
                                    SeedPolicy const& seed,
                                    std::uint64_t replicate,
                                    LimitRoute route);

/*!
 * Multi-class limit draw. Class k uses noise stream `streams[k]` (default
 * k), which allows relabelling checks.
 */
std::vector<LimitFluctuationSample>
sample_limit_multiclass(std::vector<LimitSolution> const& limits,
                        MultiClassSpec const& spec,
                        LimitOperators const& ops,
                        SeedPolicy const& seed,
                        std::uint64_t replicate,
                        LimitRoute route,
                        std::vector<std::uint32_t> const& streams = {});

//! sup |G_X - int h(t - s) dG_Y(s)| with the integral as left-point sums
double psi_consistency_gap(ModelSpec const& spec, LimitFluctuationSample const& s);

}  // namespace mfh
