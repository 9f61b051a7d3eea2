#include "mfhawkes/fluctuation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mfh
{
namespace
{
//! Running total of jumps at or before each grid time
std::vector<double> grid_counts(EventPaths const& events, TimeGrid const& grid)
{
    auto const merged = events.merged_times();
    std::vector<double> out(grid.size(), 0.0);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        double const t = grid.time(k);
        while (pos < merged.size() && merged[pos] <= t)
            ++pos;
        out[k] = static_cast<double>(pos);
    }
    return out;
}

void check_limit_rate(GridFunction const& lambda)
{
    for (std::size_t k = 0; k < lambda.size(); ++k)
        if (lambda[k] < 0 || !std::isfinite(lambda[k]))
            throw std::domain_error("sample_limit: limit rate is negative or "
                                    "not finite at grid index "
                                    + std::to_string(k));
}
}  // namespace

FluctuationPaths compute_fluctuations(SimResult const& sim,
                                      LimitSolution const& limit,
                                      ModelSpec const& spec,
                                      std::size_t N)
{
    auto const& grid = sim.lambda_path.grid;
    require_same_grid(limit.grid, grid, "compute_fluctuations");
    require_same_grid(sim.events.grid, grid, "compute_fluctuations");
    if (N == 0)
        throw std::invalid_argument("compute_fluctuations: N must be >= 1");

    double const n = static_cast<double>(N);
    double const rn = std::sqrt(n);
    auto const counts = grid_counts(sim.events, grid);

    FluctuationPaths out;
    out.grid = grid;
    out.Y = out.X = out.Mbar = out.A = out.r = out.intensity_fluct
        = GridFunction(grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        out.Y[k] = (counts[k] - n * limit.m[k]) / rn;
        out.Mbar[k] = (counts[k] - n * sim.Lambda_path[k]) / rn;
        out.A[k] = rn * (sim.Lambda_path[k] - limit.m[k]);
        out.X[k] = rn * (sim.input_path[k] - limit.x[k]);
        out.intensity_fluct[k] = rn * (sim.lambda_path[k] - limit.lambda[k]);
    }
    // r = A - int_0^t f'(x_s) X(s) ds
    double const half_dt = 0.5 * grid.dt();
    double drift = 0;
    double prev = spec.f_prime(limit.x[0]) * out.X[0];
    out.r[0] = out.A[0];
    for (std::size_t k = 1; k < grid.size(); ++k)
    {
        double const cur = spec.f_prime(limit.x[k]) * out.X[k];
        drift += half_dt * (prev + cur);
        prev = cur;
        out.r[k] = out.A[k] - drift;
    }
    return out;
}

double max_martingale_jump(EventPaths const& events, std::size_t N)
{
    if (N == 0)
        throw std::invalid_argument("max_martingale_jump: N must be >= 1");
    auto const merged = events.merged_times();
    if (merged.empty())
        return 0.0;
    // Lambda^N is continuous, so each jump of Mbar is the number of units
    // jumping at that instant divided by sqrt(N)
    std::size_t run = 1, best = 1;
    for (std::size_t i = 1; i < merged.size(); ++i)
    {
        run = merged[i] == merged[i - 1] ? run + 1 : 1;
        best = std::max(best, run);
    }
    return static_cast<double>(best) / std::sqrt(static_cast<double>(N));
}

std::string_view to_string(LimitRoute route)
{
    return route == LimitRoute::resolvent ? "resolvent" : "fixed_point";
}

LimitRoute parse_limit_route(std::string_view name)
{
    if (name == "resolvent")
        return LimitRoute::resolvent;
    if (name == "fixed_point")
        return LimitRoute::fixed_point;
    throw std::invalid_argument("unknown limit route '" + std::string(name) + "'");
}

GridFunction sample_time_changed_bm(GridFunction const& lambda,
                                    SeedPolicy const& seed,
                                    std::uint64_t replicate,
                                    std::uint32_t stream)
{
    check_limit_rate(lambda);
    auto const& grid = lambda.grid;
    RandomStream rng(seed, StreamPurpose::limit_noise, replicate, stream);
    double const sdt = std::sqrt(grid.dt());
    GridFunction W(grid);
    for (std::size_t k = 1; k < grid.size(); ++k)
        W[k] = W[k - 1] + std::sqrt(lambda[k - 1]) * sdt * rng.normal();
    return W;
}

LimitFluctuationSample sample_limit(LimitSolution const& limit,
                                    ModelSpec const& spec,
                                    LimitOperators const& ops,
                                    SeedPolicy const& seed,
                                    std::uint64_t replicate,
                                    LimitRoute route)
{
    auto out = sample_limit_multiclass({limit}, MultiClassSpec::from_scalar(spec),
                                       ops, seed, replicate, route);
    return std::move(out.front());
}

std::vector<LimitFluctuationSample>
sample_limit_multiclass(std::vector<LimitSolution> const& limits,
                        MultiClassSpec const& spec,
                        LimitOperators const& ops,
                        SeedPolicy const& seed,
                        std::uint64_t replicate,
                        LimitRoute route,
                        std::vector<std::uint32_t> const& streams)
{
    std::size_t const K = spec.classes();
    if (limits.size() != K)
        throw std::invalid_argument("sample_limit: one limit per class required");
    if (!streams.empty() && streams.size() != K)
        throw std::invalid_argument("sample_limit: one stream id per class required");
    auto const& grid = limits.front().grid;
    for (auto const& lim : limits)
        require_same_grid(lim.grid, grid, "sample_limit");

    std::vector<GridFunction> W;
    for (std::size_t k = 0; k < K; ++k)
    {
        auto const id = streams.empty() ? static_cast<std::uint32_t>(k) : streams[k];
        W.push_back(sample_time_changed_bm(limits[k].lambda, seed, replicate, id));
    }

    std::vector<GridFunction> G;
    if (route == LimitRoute::resolvent)
    {
        if (!ops.resolvent || ops.resolvent->dim() != K)
            throw std::invalid_argument("sample_limit: resolvent table missing or "
                                        "of the wrong dimension");
        require_same_grid(ops.resolvent->grid, grid, "sample_limit");
        G = apply_phi(*ops.resolvent, W);
    }
    else
    {
        if (!ops.kappa || ops.kappa->dim() != K)
            throw std::invalid_argument("sample_limit: kernel table missing or of "
                                        "the wrong dimension");
        require_same_grid(ops.kappa->grid, grid, "sample_limit");
        G = solve_second_kind(*ops.kappa, W);
    }

    // G_X of every class reads every G_l, so finish them before moving G out
    std::vector<GridFunction> filtered(K, GridFunction(grid));
    for (std::size_t k = 0; k < K; ++k)
    {
        for (std::size_t l = 0; l < K; ++l)
        {
            auto const& kernel = spec.kernel(k, l);
            if (kernel.kind == KernelKind::zero)
                continue;
            double const w = std::sqrt(spec.proportions[k] / spec.proportions[l]);
            auto const psi = apply_psi(kernel, G[l]);
            for (std::size_t i = 0; i < grid.size(); ++i)
                filtered[k][i] += w * psi[i];
        }
    }

    std::vector<LimitFluctuationSample> out(K);
    for (std::size_t k = 0; k < K; ++k)
    {
        auto& s = out[k];
        s.grid = grid;
        s.route = route;
        s.sigma = apply_xi(limits[k], spec.rates[k], filtered[k]);
        s.G_X = std::move(filtered[k]);
        s.G_Y = std::move(G[k]);
        s.W_lambda = std::move(W[k]);
    }
    return out;
}

double psi_consistency_gap(ModelSpec const& spec, LimitFluctuationSample const& s)
{
    auto const direct = convolve_increments(spec.kernel, s.G_Y);
    double gap = 0;
    for (std::size_t k = 0; k < direct.size(); ++k)
        gap = std::max(gap, std::abs(direct[k] - s.G_X[k]));
    return gap;
}

}  // namespace mfh
