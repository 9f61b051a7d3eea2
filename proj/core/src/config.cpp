#include "mfhawkes/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mfh
{
namespace
{
using nlohmann::json;

//! Object reader that rejects keys nobody asked for
class Section
{
  public:
    Section(json const& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ConfigError(path_ + ": expected an object");
    }

    ~Section() noexcept(false)
    {
        if (std::uncaught_exceptions())
            return;
        for (auto const& [key, value] : j_.items())
            if (!seen_.count(key))
                throw ConfigError(path_ + ": unknown key '" + key + "'");
    }

    bool has(std::string const& key) const { return j_.contains(key); }

    template<class T>
    void read(std::string const& key, T& out)
    {
        seen_.insert(key);
        if (!j_.contains(key))
            return;
        try
        {
            out = j_.at(key).get<T>();
        }
        catch (json::exception const& e)
        {
            throw ConfigError(path_ + "." + key + ": " + e.what());
        }
    }

    json const& child(std::string const& key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string const& path() const { return path_; }

  private:
    json const& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_model(json const& j, ModelConfig& m)
{
    Section s(j, "model");
    s.read("family", m.family);
    s.read("params", m.params);
    if (m.family != "user")
        return;
    UserModelInput u;
    s.read("f", u.f);
    s.read("h", u.h);
    s.read("f_prime", u.f_prime);
    s.read("h_prime", u.h_prime);
    std::vector<double> domain{u.domain_lo, u.domain_hi};
    s.read("domain", domain);
    if (domain.size() != 2)
        throw ConfigError("model.domain: expected [lo, hi]");
    u.domain_lo = domain[0];
    u.domain_hi = domain[1];
    std::map<std::string, double> constants;
    s.read("constants", constants);
    u.constants.assign(constants.begin(), constants.end());
    if (u.f.empty() || u.h.empty())
        throw ConfigError("model: user models need 'f' and 'h' expressions");
    m.user = std::move(u);
}

void read_tolerances(json const& j, Tolerances& t)
{
    Section s(j, "tests.tolerances");
    s.read("slope_lo", t.slope_lo);
    s.read("slope_hi", t.slope_hi);
    s.read("mc_sigmas", t.mc_sigmas);
    s.read("coupling_sigmas", t.coupling_sigmas);
    s.read("route_gap", t.route_gap);
    s.read("route_seeds", t.route_seeds);
    s.read("closed_form", t.closed_form);
    s.read("closed_form_steps", t.closed_form_steps);
    s.read("neumann_tail", t.neumann_tail);
    s.read("cross_method", t.cross_method);
    s.read("ratio_lo", t.ratio_lo);
    s.read("ratio_hi", t.ratio_hi);
    s.read("clipped_fraction", t.clipped_fraction);
    s.read("allowed_failures", t.allowed_failures);
}

json model_json(ModelConfig const& m)
{
    json j{{"family", m.family}};
    if (!m.user)
    {
        j["params"] = m.params;
        return j;
    }
    auto const& u = *m.user;
    j["f"] = u.f;
    j["h"] = u.h;
    if (!u.f_prime.empty())
        j["f_prime"] = u.f_prime;
    if (!u.h_prime.empty())
        j["h_prime"] = u.h_prime;
    j["domain"] = {u.domain_lo, u.domain_hi};
    json c = json::object();
    for (auto const& [k, v] : u.constants)
        c[k] = v;
    j["constants"] = c;
    return j;
}
}  // namespace

ModelSpec ModelConfig::build() const
{
    try
    {
        if (user)
            return user_model(*user);
        return builtin_model(family, params);
    }
    catch (std::invalid_argument const& e)
    {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

SeedPolicy ExperimentConfig::seed() const
{
    SeedPolicy p;
    p.master_seed = ensemble.master_seed;
    p.layer_height = simulation.layer_height;
    return p;
}

SimOptions ExperimentConfig::sim_options() const
{
    SimOptions o;
    o.mode = simulation.mode;
    o.jump_budget = simulation.jump_budget;
    return o;
}

bool ExperimentConfig::enabled(std::string_view check) const
{
    return std::any_of(tests.enabled.begin(), tests.enabled.end(),
                       [&](std::string const& e) { return e == "all" || e == check; });
}

void ExperimentConfig::validate() const
{
    model.build();
    if (!(grid.horizon > 0) || grid.n_steps == 0 || grid.n_steps > kMaxSteps)
        throw ConfigError("grid: need T > 0 and 1 <= n_steps <= "
                          + std::to_string(kMaxSteps));
    if (ensemble.N.empty())
        throw ConfigError("ensemble.N: list must be non-empty");
    for (std::size_t i = 0; i < ensemble.N.size(); ++i)
    {
        if (ensemble.N[i] == 0)
            throw ConfigError("ensemble.N: sizes must be positive");
        if (i && ensemble.N[i] <= ensemble.N[i - 1])
            throw ConfigError("ensemble.N: list must be strictly ascending");
    }
    if (ensemble.replicates < 2 || ensemble.clt_replicates < 50
        || ensemble.limit_draws < 50 || ensemble.reference_draws < 50
        || ensemble.clt_N == 0)
        throw ConfigError("ensemble: replicate and draw counts too small for the "
                          "statistical checks");
    if (tests.alpha != 0.10 && tests.alpha != 0.05 && tests.alpha != 0.025
        && tests.alpha != 0.01)
        throw ConfigError("tests.alpha: must be one of 0.10, 0.05, 0.025, 0.01");
    if (!(simulation.layer_height > 0))
        throw ConfigError("simulation.layer_height: must be positive");
    if (tests.tol.slope_lo >= tests.tol.slope_hi)
        throw ConfigError("tests.tolerances: slope_lo must be below slope_hi");
    for (auto const& f : output.formats)
        if (f != "csv")
            throw ConfigError("output.formats: only 'csv' is supported");
    if (regime.N == 0)
        throw ConfigError("regime.N: must be positive");
}

ExperimentConfig parse_config(std::string_view text)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (json::parse_error const& e)
    {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    {
        Section s(root, "config");
        for (char const* required : {"model", "grid", "ensemble"})
            if (!s.has(required))
                throw ConfigError(std::string("config: missing section '") + required
                                  + "'");
        read_model(s.child("model"), cfg.model);
        {
            Section g(s.child("grid"), "grid");
            g.read("T", cfg.grid.horizon);
            g.read("n_steps", cfg.grid.n_steps);
        }
        {
            Section e(s.child("ensemble"), "ensemble");
            e.read("N", cfg.ensemble.N);
            e.read("replicates", cfg.ensemble.replicates);
            e.read("master_seed", cfg.ensemble.master_seed);
            e.read("clt_N", cfg.ensemble.clt_N);
            e.read("clt_replicates", cfg.ensemble.clt_replicates);
            e.read("limit_draws", cfg.ensemble.limit_draws);
            e.read("reference_draws", cfg.ensemble.reference_draws);
            e.read("cox_replicates", cfg.ensemble.cox_replicates);
        }
        if (s.has("simulation"))
        {
            Section m(s.child("simulation"), "simulation");
            std::string mode(to_string(cfg.simulation.mode));
            m.read("mode", mode);
            try
            {
                cfg.simulation.mode = parse_sim_mode(mode);
            }
            catch (std::invalid_argument const& e)
            {
                throw ConfigError(std::string("simulation.mode: ") + e.what());
            }
            m.read("layer_height", cfg.simulation.layer_height);
            m.read("jump_budget", cfg.simulation.jump_budget);
        }
        if (s.has("tests"))
        {
            Section t(s.child("tests"), "tests");
            t.read("enabled", cfg.tests.enabled);
            t.read("alpha", cfg.tests.alpha);
            if (t.has("tolerances"))
                read_tolerances(t.child("tolerances"), cfg.tests.tol);
        }
        if (s.has("output"))
        {
            Section o(s.child("output"), "output");
            o.read("directory", cfg.output.directory);
            o.read("formats", cfg.output.formats);
        }
        if (s.has("regime"))
        {
            Section r(s.child("regime"), "regime");
            r.read("name", cfg.regime.name);
            r.read("N", cfg.regime.N);
            r.read("replicates", cfg.regime.replicates);
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(std::filesystem::path const& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot read config '" + path.string() + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string to_json(ExperimentConfig const& cfg)
{
    auto const& t = cfg.tests.tol;
    json j{
        {"model", model_json(cfg.model)},
        {"grid", {{"T", cfg.grid.horizon}, {"n_steps", cfg.grid.n_steps}}},
        {"ensemble",
         {{"N", cfg.ensemble.N},
          {"replicates", cfg.ensemble.replicates},
          {"master_seed", cfg.ensemble.master_seed},
          {"clt_N", cfg.ensemble.clt_N},
          {"clt_replicates", cfg.ensemble.clt_replicates},
          {"limit_draws", cfg.ensemble.limit_draws},
          {"reference_draws", cfg.ensemble.reference_draws},
          {"cox_replicates", cfg.ensemble.cox_replicates}}},
        {"simulation",
         {{"mode", std::string(to_string(cfg.simulation.mode))},
          {"layer_height", cfg.simulation.layer_height},
          {"jump_budget", cfg.simulation.jump_budget}}},
        {"tests",
         {{"enabled", cfg.tests.enabled},
          {"alpha", cfg.tests.alpha},
          {"tolerances",
           {{"slope_lo", t.slope_lo},
            {"slope_hi", t.slope_hi},
            {"mc_sigmas", t.mc_sigmas},
            {"coupling_sigmas", t.coupling_sigmas},
            {"route_gap", t.route_gap},
            {"route_seeds", t.route_seeds},
            {"closed_form", t.closed_form},
            {"closed_form_steps", t.closed_form_steps},
            {"neumann_tail", t.neumann_tail},
            {"cross_method", t.cross_method},
            {"ratio_lo", t.ratio_lo},
            {"ratio_hi", t.ratio_hi},
            {"clipped_fraction", t.clipped_fraction},
            {"allowed_failures", t.allowed_failures}}}}},
        {"output", {{"directory", cfg.output.directory}, {"formats", cfg.output.formats}}},
        {"regime",
         {{"name", cfg.regime.name},
          {"N", cfg.regime.N},
          {"replicates", cfg.regime.replicates}}}};
    return j.dump(2);
}

}  // namespace mfh
