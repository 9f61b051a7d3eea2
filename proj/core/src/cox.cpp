#include "mfhawkes/cox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfhawkes/fluctuation.hpp"
#include "mfhawkes/parallel.hpp"
#include "mfhawkes/stats.hpp"
#include "mfhawkes/volterra.hpp"

namespace mfh
{
SeedPolicy cox_noise_seed(SeedPolicy const& seed)
{
    return seed.reseeded(0xC0C5);
}

CoxApproximation build_cox(LimitSolution const& limit,
                           GridFunction const& sigma_draw,
                           std::size_t N,
                           TimeGrid const& grid,
                           SeedPolicy const& seed,
                           std::uint64_t replicate)
{
    require_same_grid(limit.grid, grid, "build_cox");
    require_same_grid(sigma_draw.grid, grid, "build_cox");
    if (N == 0)
        throw std::invalid_argument("build_cox: N must be >= 1");

    CoxApproximation out;
    out.grid = grid;
    out.N = N;
    out.lambda_hat = GridFunction(grid);
    GridFunction clipped(grid);
    double const rn = std::sqrt(static_cast<double>(N));
    std::size_t negative = 0;
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        double const v = limit.lambda[k] + sigma_draw[k] / rn;
        out.lambda_hat[k] = v;
        clipped[k] = std::max(v, 0.0);
        negative += v < 0;
    }
    out.clipped_fraction = static_cast<double>(negative) / grid.size();

    std::vector<std::uint32_t> labels(N, 0);
    out.events = thin_deterministic(grid, labels, {clipped}, seed, replicate);
    out.baseline = thin_deterministic(grid, labels, {limit.lambda}, seed, replicate);
    return out;
}

double mean_coupling_distance(CoxApproximation const& cox)
{
    double total = 0;
    for (std::size_t i = 0; i < cox.events.unit_count(); ++i)
        total += counting_distance(cox.events.times[i], cox.baseline.times[i]);
    return total / static_cast<double>(cox.events.unit_count());
}

std::vector<double> comparison_fractions()
{
    return {0.25, 0.5, 0.625, 0.75, 0.875, 1.0};
}

namespace
{
struct ReplicateOutcome
{
    GridFunction hawkes_lambda;
    GridFunction cox_lambda;
    std::vector<double> hawkes_counts;  //!< per comparison time
    std::vector<double> cox_counts;
    std::vector<double> poisson_counts;
    double coupling = 0;
    double sigma_norm = 0;
    double clipped = 0;
};

double mean_count_at(EventPaths const& events, double t)
{
    std::size_t total = 0;
    for (auto const& unit : events.times)
        total += static_cast<std::size_t>(
            std::upper_bound(unit.begin(), unit.end(), t) - unit.begin());
    return static_cast<double>(total) / events.unit_count();
}
}  // namespace

CoxComparison compare_cox_vs_hawkes(ModelSpec const& spec,
                                    LimitSolution const& limit,
                                    std::size_t N,
                                    TimeGrid const& grid,
                                    std::size_t replicates,
                                    SeedPolicy const& seed,
                                    unsigned threads,
                                    bool keep_paths)
{
    if (replicates < 100)
        throw std::invalid_argument("compare_cox_vs_hawkes: at least 100 replicates "
                                    "are required");
    require_same_grid(limit.grid, grid, "compare_cox_vs_hawkes");

    auto const kappa = build_kappa(limit, spec, grid);
    LimitOperators ops;
    ops.kappa = &kappa;
    auto const noise = cox_noise_seed(seed);

    std::vector<std::size_t> idx;
    for (double frac : comparison_fractions())
        idx.push_back(static_cast<std::size_t>(std::llround(frac * grid.steps())));

    std::vector<ReplicateOutcome> outcomes(replicates);
    parallel_for(replicates, threads, [&](std::size_t r) {
        auto& o = outcomes[r];
        auto const sim = simulate_hawkes(spec, N, grid, seed, r);
        auto const draw
            = sample_limit(limit, spec, ops, noise, r, LimitRoute::fixed_point);
        auto const cox = build_cox(limit, draw.sigma, N, grid, seed, r);
        for (auto k : idx)
        {
            double const t = grid.time(k);
            o.hawkes_counts.push_back(mean_count_at(sim.events, t));
            o.cox_counts.push_back(mean_count_at(cox.events, t));
            o.poisson_counts.push_back(mean_count_at(cox.baseline, t));
        }
        o.coupling = mean_coupling_distance(cox);
        o.sigma_norm = draw.sigma.sup_norm();
        o.clipped = cox.clipped_fraction;
        o.hawkes_lambda = sim.lambda_path;
        o.cox_lambda = cox.lambda_hat;
    });

    CoxComparison out;
    out.N = N;
    out.replicates = replicates;
    std::vector<double> coupling, sigma_norm;
    for (auto const& o : outcomes)
    {
        coupling.push_back(o.coupling);
        sigma_norm.push_back(o.sigma_norm);
        out.mean_clipped += o.clipped / replicates;
        out.max_clipped = std::max(out.max_clipped, o.clipped);
    }
    auto const cs = summarize(coupling);
    auto const ss = summarize(sigma_norm);
    out.mean_coupling = cs.mean;
    out.coupling_se = cs.std_error;
    out.mean_sigma_norm = ss.mean;
    out.sigma_norm_se = ss.std_error;

    for (std::size_t c = 0; c < idx.size(); ++c)
    {
        std::vector<double> lh, lc, nh, nc, np;
        for (auto const& o : outcomes)
        {
            lh.push_back(o.hawkes_lambda[idx[c]]);
            lc.push_back(o.cox_lambda[idx[c]]);
            nh.push_back(o.hawkes_counts[c]);
            nc.push_back(o.cox_counts[c]);
            np.push_back(o.poisson_counts[c]);
        }
        CoxComparisonRow row;
        row.t = grid.time(idx[c]);
        row.var_hawkes = variance(lh);
        row.var_cox = variance(lc);
        if (row.var_hawkes == 0 && row.var_cox == 0)
            row.ratio = 1.0;
        else
            row.ratio = row.var_cox / row.var_hawkes;
        auto const kc = two_sample_ks(nc, nh);
        auto const kp = two_sample_ks(np, nh);
        row.ks_cox = kc.statistic;
        row.ks_cox_p = kc.p_value;
        row.ks_poisson = kp.statistic;
        row.ks_poisson_p = kp.p_value;
        out.rows.push_back(row);
    }
    if (keep_paths)
    {
        for (auto& o : outcomes)
        {
            out.hawkes_paths.push_back(std::move(o.hawkes_lambda));
            out.cox_paths.push_back(std::move(o.cox_lambda));
        }
    }
    return out;
}

}  // namespace mfh
