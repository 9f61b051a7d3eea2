#include "mfhawkes/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "mfhawkes/csv.hpp"
#include "mfhawkes/limit.hpp"

namespace mfh
{
RegimeParams regime_params(std::string_view name)
{
    if (name == "stable")
        return {"stable", 2.0, 2.0};
    if (name == "critical")
        return {"critical", 4.0, 2.0};
    if (name == "bistable")
        return {"bistable", 5.0, 4.0};
    throw std::invalid_argument("unknown regime '" + std::string(name)
                                + "' (expected stable, critical or bistable)");
}

std::vector<std::string> regime_names()
{
    return {"stable", "critical", "bistable"};
}

RegimePanel emit_regime_panels(ExperimentConfig const& cfg,
                               std::filesystem::path const& out_dir,
                               unsigned threads)
{
    RegimePanel panel;
    panel.params = regime_params(cfg.regime.name);
    auto const& p = panel.params;
    double const params[] = {p.gamma, p.beta};
    auto const spec = builtin_model(BuiltinFamily::sigmoid_erlang, params);
    auto const grid = cfg.grid.build();
    auto const limit = solve_limit(spec, grid);
    panel.fixed_points = fixed_points(spec, 1e-10);
    panel.comparison = compare_cox_vs_hawkes(spec, limit, cfg.regime.N, grid,
                                             cfg.regime.replicates, cfg.seed(),
                                             threads, true);
    auto const& cmp = panel.comparison;

    panel.ratio_lo = INFINITY;
    panel.ratio_hi = -INFINITY;
    for (auto const& row : cmp.rows)
    {
        if (row.t < 0.5 * grid.horizon() - 1e-12)
            continue;
        panel.ratio_lo = std::min(panel.ratio_lo, row.ratio);
        panel.ratio_hi = std::max(panel.ratio_hi, row.ratio);
    }
    auto const& tol = cfg.tests.tol;
    panel.ratio_in_band = panel.ratio_lo >= tol.ratio_lo && panel.ratio_hi <= tol.ratio_hi;

    std::string const stem = "regime_" + p.name;
    {
        auto path = out_dir / (stem + "_paths.csv");
        auto os = open_output(path);
        CsvWriter w(os);
        w.header({"regime", "replicate", "t", "lambda_N", "lambda_limit", "lambda_hat"});
        for (std::size_t r = 0; r < cmp.hawkes_paths.size(); ++r)
            for (std::size_t k = 0; k < grid.size(); ++k)
            {
                w << p.name << std::uint64_t(r) << grid.time(k)
                  << cmp.hawkes_paths[r][k] << limit.lambda[k] << cmp.cox_paths[r][k];
                w.end_row();
            }
        panel.files.push_back(path);
    }
    {
        auto path = out_dir / (stem + "_stats.csv");
        auto os = open_output(path);
        CsvWriter w(os);
        w.header({"regime", "t", "statistic", "value"});
        for (auto const& row : cmp.rows)
        {
            std::pair<char const*, double> const items[] = {
                {"var_lambda_N", row.var_hawkes},
                {"var_lambda_hat", row.var_cox},
                {"variance_ratio", row.ratio},
                {"ks_counts_cox", row.ks_cox},
                {"ks_counts_cox_p", row.ks_cox_p},
                {"ks_counts_poisson", row.ks_poisson},
                {"ks_counts_poisson_p", row.ks_poisson_p},
            };
            for (auto const& [label, value] : items)
            {
                w << p.name << row.t << label << value;
                w.end_row();
            }
        }
        panel.files.push_back(path);
    }
    {
        auto path = out_dir / (stem + ".meta");
        Metadata meta{
            {"regime", p.name},
            {"gamma", format_double(p.gamma)},
            {"beta", format_double(p.beta)},
            {"N", std::to_string(cfg.regime.N)},
            {"replicates", std::to_string(cfg.regime.replicates)},
            {"T", format_double(grid.horizon())},
            {"n_steps", std::to_string(grid.steps())},
            {"master_seed", std::to_string(cfg.ensemble.master_seed)},
            {"variance_ratio_min", format_double(panel.ratio_lo)},
            {"variance_ratio_max", format_double(panel.ratio_hi)},
            {"variance_ratio_in_band", panel.ratio_in_band ? "yes" : "no"},
            {"mean_clipped_fraction", format_double(cmp.mean_clipped)},
        };
        for (std::size_t i = 0; i < panel.fixed_points.size(); ++i)
        {
            auto const& fp = panel.fixed_points[i];
            meta.emplace_back("fixed_point_" + std::to_string(i),
                              format_double(fp.x) + (fp.stable ? " stable" : " unstable")
                                  + " slope " + format_double(fp.slope));
        }
        if (panel.fixed_points.size() > 1)
            meta.emplace_back("note", "several fixed points; the second-order "
                                      "approximation is only expected to hold near "
                                      "one stable fixed point");
        write_metadata(path, meta);
        panel.files.push_back(path);
    }
    return panel;
}

}  // namespace mfh
