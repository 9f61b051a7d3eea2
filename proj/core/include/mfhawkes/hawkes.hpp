#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mfhawkes/limit.hpp"
#include "mfhawkes/model.hpp"
#include "mfhawkes/random.hpp"

namespace mfh
{
enum class SimMode
{
    thinning,  //!< exact rejection against a certified dominating rate
    euler      //!< intensity frozen on grid cells, at most one jump per cell
};
std::string_view to_string(SimMode mode);
SimMode parse_sim_mode(std::string_view name);

struct SimOptions
{
    SimMode mode = SimMode::thinning;
    //! Accepted-jump allowance in the dominating-rate formula
    std::size_t jump_budget = 16;
    //! Dominating rates above this abort the run
    double max_dominating_rate = 1e6;
    double euler_warn_rate = 1e-3;
    double euler_error_rate = 1e-2;
};

struct SimDiagnostics
{
    std::uint64_t master_seed = 0;
    std::uint64_t replicate = 0;
    std::size_t candidates = 0;  //!< Poisson-measure points examined
    std::size_t layers = 0;      //!< measure layers realised
    double max_dominating_rate = 0;
    double truncation_rate = 0;  //!< euler: fraction of truncated cell draws
    std::vector<std::string> warnings;
};

/*!
 * One network realisation: jump times, the intensity lambda^N on the grid,
 * its trapezoid integral Lambda^N, and the population input
 * u^N(t) = (1/N) sum_i sum_{tau < t} h(t - tau) with lambda^N = f(u^N).
 */
struct SimResult
{
    EventPaths events;
    GridFunction lambda_path;
    GridFunction Lambda_path;
    GridFunction input_path;
    SimMode mode = SimMode::thinning;
    SimDiagnostics diagnostics;
};

//! Multi-class realisation; per-class paths indexed by class
struct MultiClassSimResult
{
    EventPaths events;
    std::vector<std::size_t> class_sizes;
    std::vector<GridFunction> lambda_path;
    std::vector<GridFunction> Lambda_path;
    std::vector<GridFunction> input_path;
    SimMode mode = SimMode::thinning;
    SimDiagnostics diagnostics;
};

/*!
 * Simulate the interacting network driven by per-unit Poisson random
 * measures on [0, T] x [0, inf).
 *
 * Each unit's measure is realised in horizontal layers of height
 * seed.layer_height; layer l of unit i is an independent counter-based
 * stream, so the same (seed, replicate, unit) always yields the same
 * measure. A candidate (t, z) is a jump iff z <= lambda^N(t).
 */
SimResult simulate_hawkes(ModelSpec const& spec,
                          std::size_t N,
                          TimeGrid const& grid,
                          SeedPolicy const& seed,
                          std::uint64_t replicate,
                          SimOptions const& options = {});

MultiClassSimResult simulate_hawkes_multiclass(MultiClassSpec const& spec,
                                               std::size_t N,
                                               TimeGrid const& grid,
                                               SeedPolicy const& seed,
                                               std::uint64_t replicate,
                                               SimOptions const& options = {});

/*!
 * Thin the same Poisson measures against deterministic per-class
 * intensities (linearly interpolated between grid points, clipped at 0).
 * Unit u uses intensity[unit_class[u]].
 */
EventPaths thin_deterministic(TimeGrid const& grid,
                              std::vector<std::uint32_t> const& unit_class,
                              std::vector<GridFunction> const& intensity,
                              SeedPolicy const& seed,
                              std::uint64_t replicate);

//! Iid Poisson(lambda) processes coupled to simulate_hawkes via shared measures
EventPaths simulate_coupled_poisson(ModelSpec const& spec,
                                    std::size_t N,
                                    TimeGrid const& grid,
                                    LimitSolution const& limit,
                                    SeedPolicy const& seed,
                                    std::uint64_t replicate);

//! lambda^N(t) recomputed directly from the event history (strict past)
double recompute_intensity(ModelSpec const& spec, EventPaths const& events, double t);

//! Shift any exactly coincident jump times apart by one ulp
void enforce_distinct_times(EventPaths& events);

}  // namespace mfh
