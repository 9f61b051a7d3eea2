// Command-line front end: limit solutions, resolvents, simulations,
// fluctuation ensembles, Cox approximations, verification and regime data.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mfhawkes/config.hpp"
#include "mfhawkes/cox.hpp"
#include "mfhawkes/csv.hpp"
#include "mfhawkes/fluctuation.hpp"
#include "mfhawkes/hawkes.hpp"
#include "mfhawkes/limit.hpp"
#include "mfhawkes/parallel.hpp"
#include "mfhawkes/regimes.hpp"
#include "mfhawkes/stats.hpp"
#include "mfhawkes/verify.hpp"
#include "mfhawkes/volterra.hpp"

namespace fs = std::filesystem;
using namespace mfh;

namespace
{
enum ExitCode
{
    kOk = 0,
    kCheckFailed = 1,
    kConfigError = 2,
};

struct Common
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    unsigned threads = 0;
    std::string format = "csv";
};

ExperimentConfig load(Common const& c)
{
    auto cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
    if (c.seed)
        cfg.ensemble.master_seed = *c.seed;
    if (!c.out.empty())
        cfg.output.directory = c.out;
    cfg.validate();
    return cfg;
}

unsigned threads_of(Common const& c)
{
    return c.threads ? c.threads : default_threads();
}

fs::path out_dir(ExperimentConfig const& cfg)
{
    fs::path dir(cfg.output.directory);
    fs::create_directories(dir);
    return dir;
}

Metadata base_metadata(ExperimentConfig const& cfg, ModelSpec const& spec)
{
    return {{"model", spec.name},
            {"T", format_double(cfg.grid.horizon)},
            {"n_steps", std::to_string(cfg.grid.n_steps)},
            {"master_seed", std::to_string(cfg.ensemble.master_seed)},
            {"layer_height", format_double(cfg.simulation.layer_height)},
            {"lip_f", format_double(spec.lip_f())},
            {"sup_f_prime", format_double(spec.sup_f_prime())},
            {"constants_estimated", spec.rate.constants_estimated ? "yes" : "no"}};
}

std::string replicate_file(std::string const& stem, std::size_t r)
{
    return stem + "_r" + std::to_string(r) + ".csv";
}

//---------------------------------------------------------------------------//
int cmd_solve_limit(Common const& c)
{
    auto const cfg = load(c);
    auto const spec = cfg.model.build();
    auto const grid = cfg.grid.build();
    auto const lim = solve_limit(spec, grid);
    auto const dir = out_dir(cfg);
    {
        auto os = open_output(dir / "limit.csv");
        write_grid_functions(os, {"m", "lambda", "x"}, {&lim.m, &lim.lambda, &lim.x});
    }
    auto meta = base_metadata(cfg, spec);
    try
    {
        auto const fps = fixed_points(spec, 1e-12);
        for (std::size_t i = 0; i < fps.size(); ++i)
            meta.emplace_back("fixed_point_" + std::to_string(i),
                              format_double(fps[i].x)
                                  + (fps[i].stable ? " stable" : " unstable"));
    }
    catch (std::exception const& e)
    {
        meta.emplace_back("fixed_points", std::string("unavailable: ") + e.what());
    }
    write_metadata(dir / "limit.meta", meta);
    std::cout << "limit written to " << (dir / "limit.csv").string() << '\n';
    return kOk;
}

//---------------------------------------------------------------------------//
int cmd_resolvent(Common const& c, std::string const& method, double tol)
{
    auto const cfg = load(c);
    auto const spec = cfg.model.build();
    auto const grid = cfg.grid.build();
    auto const lim = solve_limit(spec, grid);
    auto const kappa = build_kappa(lim, spec, grid);
    auto const m = parse_resolvent_method(method);
    auto const res = m == ResolventMethod::neumann
                         ? build_resolvent_neumann(kappa, tol, threads_of(c))
                         : build_resolvent_ieq(kappa, threads_of(c));
    auto const dir = out_dir(cfg);
    {
        auto os = open_output(dir / "resolvent.csv");
        CsvWriter w(os);
        w.header({"t", "s", "kappa", "K"});
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t j = 0; j <= i; ++j)
            {
                w << grid.time(i) << grid.time(j) << kappa.kappa(i, j) << res.K(i, j);
                w.end_row();
            }
    }
    auto meta = base_metadata(cfg, spec);
    meta.emplace_back("method", std::string(to_string(m)));
    meta.emplace_back("kappa_bound", format_double(kappa.bound));
    meta.emplace_back("resolvent_bound", format_double(res.a_priori_bound()));
    meta.emplace_back("resolvent_max_abs", format_double(res.K.max_abs()));
    meta.emplace_back("lipschitz_constant",
                      format_double(resolvent_lipschitz_constant(spec, grid.horizon())));
    meta.emplace_back("identity_residual",
                      format_double(resolvent_identity_residual(kappa, res)));
    if (m == ResolventMethod::neumann)
    {
        meta.emplace_back("truncation_order", std::to_string(res.truncation_order));
        meta.emplace_back("tail_bound", format_double(res.tail_bound));
    }
    write_metadata(dir / "resolvent.meta", meta);
    std::cout << "resolvent written to " << (dir / "resolvent.csv").string() << '\n';
    return kOk;
}

//---------------------------------------------------------------------------//
int cmd_simulate(Common const& c, std::optional<std::string> mode, std::size_t N,
                 std::size_t replicates)
{
    auto cfg = load(c);
    if (mode)
        cfg.simulation.mode = parse_sim_mode(*mode);
    auto const spec = cfg.model.build();
    auto const grid = cfg.grid.build();
    auto const dir = out_dir(cfg);
    std::vector<SimResult> runs(replicates);
    parallel_for(replicates, threads_of(c), [&](std::size_t r) {
        runs[r] = simulate_hawkes(spec, N, grid, cfg.seed(), r, cfg.sim_options());
    });
    auto meta = base_metadata(cfg, spec);
    meta.emplace_back("mode", std::string(to_string(cfg.simulation.mode)));
    meta.emplace_back("N", std::to_string(N));
    meta.emplace_back("replicates", std::to_string(replicates));
    for (std::size_t r = 0; r < replicates; ++r)
    {
        auto const& run = runs[r];
        {
            auto os = open_output(dir / replicate_file("events", r));
            write_event_paths_header(os);
            write_event_paths(os, run.events, r);
        }
        {
            auto os = open_output(dir / replicate_file("lambda", r));
            write_grid_functions(os, {"lambda_N", "Lambda_N", "u_N"},
                                 {&run.lambda_path, &run.Lambda_path, &run.input_path});
        }
        auto const& d = run.diagnostics;
        std::string const key = "replicate_" + std::to_string(r);
        meta.emplace_back(key + "_events", std::to_string(run.events.total_events()));
        meta.emplace_back(key + "_max_dominating_rate",
                          format_double(d.max_dominating_rate));
        if (cfg.simulation.mode == SimMode::euler)
            meta.emplace_back(key + "_truncation_rate", format_double(d.truncation_rate));
        for (auto const& wmsg : d.warnings)
        {
            meta.emplace_back(key + "_warning", wmsg);
            std::cerr << "warning (replicate " << r << "): " << wmsg << '\n';
        }
    }
    write_metadata(dir / "simulate.meta", meta);
    std::cout << replicates << " replicates written to " << dir.string() << '\n';
    return kOk;
}

//---------------------------------------------------------------------------//
void write_field_stats(CsvWriter& w, std::string const& field, TimeGrid const& grid,
                       std::vector<GridFunction const*> const& paths)
{
    if (paths.empty())
        return;
    std::vector<double> col(paths.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        for (std::size_t r = 0; r < paths.size(); ++r)
            col[r] = (*paths[r])[k];
        auto const s = summarize(col);
        w << grid.time(k) << field << s.mean << s.variance << quantile(col, 0.05)
          << quantile(col, 0.5) << quantile(col, 0.95);
        w.end_row();
    }
}

int cmd_fluctuations(Common const& c, std::size_t N, std::size_t replicates,
                     std::size_t draws, std::string const& route_name)
{
    auto const cfg = load(c);
    auto const spec = cfg.model.build();
    auto const grid = cfg.grid.build();
    auto const route = parse_limit_route(route_name);
    auto const lim = solve_limit(spec, grid);
    auto const kappa = build_kappa(lim, spec, grid);
    std::optional<ResolventTable> res;
    LimitOperators ops;
    ops.kappa = &kappa;
    if (route == LimitRoute::resolvent)
    {
        res = build_resolvent_ieq(kappa, threads_of(c));
        ops.resolvent = &*res;
    }
    auto const dir = out_dir(cfg);

    std::vector<FluctuationPaths> fl(replicates);
    parallel_for(replicates, threads_of(c), [&](std::size_t r) {
        auto const sim = simulate_hawkes(spec, N, grid, cfg.seed(), r, cfg.sim_options());
        fl[r] = compute_fluctuations(sim, lim, spec, N);
    });
    std::vector<LimitFluctuationSample> ls(draws);
    parallel_for(draws, threads_of(c), [&](std::size_t r) {
        ls[r] = sample_limit(lim, spec, ops, cfg.seed(), r, route);
    });

    for (std::size_t r = 0; r < replicates; ++r)
    {
        auto os = open_output(dir / replicate_file("fluct", r));
        auto const& f = fl[r];
        write_grid_functions(os, {"Y", "X", "Mbar", "A", "r", "intensity_fluct"},
                             {&f.Y, &f.X, &f.Mbar, &f.A, &f.r, &f.intensity_fluct});
    }
    for (std::size_t r = 0; r < draws; ++r)
    {
        auto os = open_output(dir / replicate_file("limit", r));
        auto const& s = ls[r];
        write_grid_functions(os, {"W_lambda", "G_Y", "G_X", "sigma"},
                             {&s.W_lambda, &s.G_Y, &s.G_X, &s.sigma});
    }
    {
        auto os = open_output(dir / "fluctuation_stats.csv");
        CsvWriter w(os);
        w.header({"t", "field", "mean", "variance", "q05", "q50", "q95"});
        auto collect = [&](auto const& v, auto member) {
            std::vector<GridFunction const*> out;
            for (auto const& x : v)
                out.push_back(&(x.*member));
            return out;
        };
        write_field_stats(w, "Y", grid, collect(fl, &FluctuationPaths::Y));
        write_field_stats(w, "X", grid, collect(fl, &FluctuationPaths::X));
        write_field_stats(w, "Mbar", grid, collect(fl, &FluctuationPaths::Mbar));
        write_field_stats(w, "A", grid, collect(fl, &FluctuationPaths::A));
        write_field_stats(w, "r", grid, collect(fl, &FluctuationPaths::r));
        write_field_stats(w, "intensity_fluct", grid,
                          collect(fl, &FluctuationPaths::intensity_fluct));
        write_field_stats(w, "W_lambda", grid,
                          collect(ls, &LimitFluctuationSample::W_lambda));
        write_field_stats(w, "G_Y", grid, collect(ls, &LimitFluctuationSample::G_Y));
        write_field_stats(w, "G_X", grid, collect(ls, &LimitFluctuationSample::G_X));
        write_field_stats(w, "sigma", grid, collect(ls, &LimitFluctuationSample::sigma));
    }
    auto meta = base_metadata(cfg, spec);
    meta.emplace_back("N", std::to_string(N));
    meta.emplace_back("replicates", std::to_string(replicates));
    meta.emplace_back("limit_draws", std::to_string(draws));
    meta.emplace_back("route", std::string(to_string(route)));
    write_metadata(dir / "fluctuations.meta", meta);
    std::cout << "fluctuation ensembles written to " << dir.string() << '\n';
    return kOk;
}

//---------------------------------------------------------------------------//
int cmd_cox(Common const& c, std::size_t N, std::size_t replicates,
            std::size_t event_files)
{
    auto const cfg = load(c);
    auto const spec = cfg.model.build();
    auto const grid = cfg.grid.build();
    auto const lim = solve_limit(spec, grid);
    auto const dir = out_dir(cfg);
    auto const cmp = compare_cox_vs_hawkes(spec, lim, N, grid, replicates, cfg.seed(),
                                           threads_of(c), true);

    // per-replicate approximations, rebuilt from the same streams
    auto const kappa = build_kappa(lim, spec, grid);
    LimitOperators ops;
    ops.kappa = &kappa;
    auto const noise = cox_noise_seed(cfg.seed());
    for (std::size_t r = 0; r < std::min(event_files, replicates); ++r)
    {
        auto const draw = sample_limit(lim, spec, ops, noise, r, LimitRoute::fixed_point);
        auto const cox = build_cox(lim, draw.sigma, N, grid, cfg.seed(), r);
        {
            auto os = open_output(dir / replicate_file("cox_events", r));
            write_event_paths_header(os);
            write_event_paths(os, cox.events, r);
        }
        {
            auto os = open_output(dir / replicate_file("poisson_events", r));
            write_event_paths_header(os);
            write_event_paths(os, cox.baseline, r);
        }
    }
    {
        auto os = open_output(dir / "lambda_hat.csv");
        CsvWriter w(os);
        w.header({"replicate", "t", "lambda_hat", "lambda_N", "lambda_limit"});
        for (std::size_t r = 0; r < cmp.cox_paths.size(); ++r)
            for (std::size_t k = 0; k < grid.size(); ++k)
            {
                w << std::uint64_t(r) << grid.time(k) << cmp.cox_paths[r][k]
                  << cmp.hawkes_paths[r][k] << lim.lambda[k];
                w.end_row();
            }
    }
    {
        auto os = open_output(dir / "cox_comparison.csv");
        CsvWriter w(os);
        w.header({"t", "var_lambda_N", "var_lambda_hat", "variance_ratio", "ks_cox",
                  "ks_cox_p", "ks_poisson", "ks_poisson_p"});
        for (auto const& row : cmp.rows)
        {
            w << row.t << row.var_hawkes << row.var_cox << row.ratio << row.ks_cox
              << row.ks_cox_p << row.ks_poisson << row.ks_poisson_p;
            w.end_row();
        }
    }
    {
        auto os = open_output(dir / "cox_plot.csv");
        CsvWriter w(os);
        w.header({"regime", "t", "statistic", "value"});
        std::vector<GridFunction const*> hp, cp;
        for (std::size_t r = 0; r < cmp.hawkes_paths.size(); ++r)
        {
            hp.push_back(&cmp.hawkes_paths[r]);
            cp.push_back(&cmp.cox_paths[r]);
        }
        std::vector<double> a(hp.size()), b(cp.size());
        for (std::size_t k = 0; k < grid.size(); ++k)
        {
            for (std::size_t r = 0; r < hp.size(); ++r)
            {
                a[r] = (*hp[r])[k];
                b[r] = (*cp[r])[k];
            }
            std::pair<char const*, double> const items[] = {
                {"lambda_limit", lim.lambda[k]},
                {"mean_lambda_N", mean(a)},
                {"var_lambda_N", variance(a)},
                {"mean_lambda_hat", mean(b)},
                {"var_lambda_hat", variance(b)},
            };
            for (auto const& [label, value] : items)
            {
                w << spec.name << grid.time(k) << label << value;
                w.end_row();
            }
        }
    }
    {
        auto os = open_output(dir / "cox_summary.txt");
        os << "cox approximation vs network, N = " << N << ", " << replicates
           << " replicates\n"
           << "mean ||Zhat_i - Pi_i||_T: " << format_double(cmp.mean_coupling)
           << " (se " << format_double(cmp.coupling_se) << ")\n"
           << "bound (T/sqrt(N)) E||sigma||_T: "
           << format_double(grid.horizon() / std::sqrt(double(N)) * cmp.mean_sigma_norm)
           << '\n'
           << "clipped time fraction: mean " << format_double(cmp.mean_clipped)
           << ", max " << format_double(cmp.max_clipped) << "\n\n";
        for (auto const& row : cmp.rows)
            os << "t = " << format_double(row.t)
               << ": variance ratio " << format_double(row.ratio) << ", KS cox "
               << format_double(row.ks_cox) << ", KS poisson "
               << format_double(row.ks_poisson) << '\n';
    }
    std::cout << "cox comparison written to " << dir.string() << '\n';
    return kOk;
}

//---------------------------------------------------------------------------//
int cmd_verify(Common const& c)
{
    auto const cfg = load(c);
    auto const report = run_verification_suite(cfg, threads_of(c));
    auto const dir = out_dir(cfg);
    {
        auto os = open_output(dir / "report.csv");
        write_report_csv(os, report);
    }
    {
        auto os = open_output(dir / "report.txt");
        write_report_text(os, report);
    }
    {
        auto os = open_output(dir / "report_timing.csv");
        write_report_timing(os, report);
    }
    write_report_text(std::cout, report);
    return report.passed ? kOk : kCheckFailed;
}

int cmd_regimes(Common const& c, std::string const& which)
{
    auto cfg = load(c);
    auto const dir = out_dir(cfg);
    std::vector<std::string> names;
    if (which == "all")
        names = regime_names();
    else
        names = {which};
    for (auto const& name : names)
    {
        regime_params(name);  // validate before running anything
        cfg.regime.name = name;
        auto const panel = emit_regime_panels(cfg, dir, threads_of(c));
        std::cout << name << ": variance ratio on [T/2, T] in ["
                  << format_double(panel.ratio_lo) << ", "
                  << format_double(panel.ratio_hi) << "]"
                  << (panel.fixed_points.size() > 1 ? " (several fixed points)" : "")
                  << '\n';
    }
    return kOk;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mean-field Hawkes network simulation and verification"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "JSON experiment configuration")
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", common.seed, "master seed override");
        sub->add_option("--out", common.out, "output directory");
        sub->add_option("--threads", common.threads, "worker threads (0 = all cores)");
        sub->add_option("--format", common.format, "output format")
            ->check(CLI::IsMember({"csv"}));
    };

    auto* solve = app.add_subcommand("solve-limit", "solve the mean-field limit");
    add_common(solve);

    auto* resolvent = app.add_subcommand("resolvent", "tabulate kappa and its resolvent");
    add_common(resolvent);
    std::string method = "integral_equation";
    double tol = 1e-10;
    resolvent->add_option("--method", method)
        ->check(CLI::IsMember({"neumann", "integral_equation"}));
    resolvent->add_option("--tol", tol, "Neumann tail tolerance");

    auto* simulate = app.add_subcommand("simulate", "simulate network replicates");
    add_common(simulate);
    std::optional<std::string> mode;
    std::size_t sim_N = 50, sim_reps = 1;
    simulate->add_option("--mode", mode)->check(CLI::IsMember({"thinning", "euler"}));
    simulate->add_option("--N", sim_N)->check(CLI::PositiveNumber);
    simulate->add_option("--replicates", sim_reps)->check(CLI::PositiveNumber);

    auto* fluct = app.add_subcommand("fluctuations", "finite-N and limit fluctuations");
    add_common(fluct);
    std::size_t fl_N = 500, fl_reps = 20, fl_draws = 20;
    std::string route = "resolvent";
    fluct->add_option("--N", fl_N)->check(CLI::PositiveNumber);
    fluct->add_option("--replicates", fl_reps)->check(CLI::PositiveNumber);
    fluct->add_option("--draws", fl_draws)->check(CLI::PositiveNumber);
    fluct->add_option("--route", route)->check(CLI::IsMember({"resolvent", "fixed_point"}));

    auto* cox = app.add_subcommand("cox-approx", "second-order Cox approximation");
    add_common(cox);
    std::size_t cox_N = 50, cox_reps = 200, cox_files = 5;
    cox->add_option("--N", cox_N)->check(CLI::PositiveNumber);
    cox->add_option("--replicates", cox_reps)->check(CLI::Range(100, 1000000));
    cox->add_option("--event-files", cox_files, "replicates whose events are written");

    auto* verify = app.add_subcommand("verify", "run the verification suite");
    add_common(verify);

    auto* regimes = app.add_subcommand("regimes", "plot data for the three regimes");
    add_common(regimes);
    std::string regime = "all";
    regimes->add_option("--regime", regime)
        ->check(CLI::IsMember({"all", "stable", "critical", "bistable"}));

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try
    {
        if (*solve)
            return cmd_solve_limit(common);
        if (*resolvent)
            return cmd_resolvent(common, method, tol);
        if (*simulate)
            return cmd_simulate(common, mode, sim_N, sim_reps);
        if (*fluct)
            return cmd_fluctuations(common, fl_N, fl_reps, fl_draws, route);
        if (*cox)
            return cmd_cox(common, cox_N, cox_reps, cox_files);
        if (*verify)
            return cmd_verify(common);
        if (*regimes)
            return cmd_regimes(common, regime);
    }
    catch (ConfigError const& e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (std::invalid_argument const& e)
    {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kConfigError;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kCheckFailed;
    }
    return kOk;
}
