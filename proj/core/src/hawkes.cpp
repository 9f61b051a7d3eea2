#include "mfhawkes/hawkes.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace mfh
{
std::string_view to_string(SimMode mode)
{
    return mode == SimMode::thinning ? "thinning" : "euler";
}

SimMode parse_sim_mode(std::string_view name)
{
    if (name == "thinning")
        return SimMode::thinning;
    if (name == "euler")
        return SimMode::euler;
    throw std::invalid_argument("unknown simulation mode '" + std::string(name)
                                + "'");
}

namespace
{
//---------------------------------------------------------------------------//
/*!
 * One horizontal layer [l H, (l+1) H) of one unit's Poisson measure,
 * generated sequentially in time.
 */
class MeasureLayer
{
  public:
    MeasureLayer(SeedPolicy const& seed, std::uint64_t replicate,
                 std::uint32_t unit, std::uint32_t layer)
        : stream_(seed, StreamPurpose::poisson_measure, replicate, unit, layer),
          height_(seed.layer_height),
          base_(layer * seed.layer_height)
    {
        advance();
    }

    double time() const { return t_; }
    double mark() const { return z_; }

    void advance()
    {
        auto const u = stream_.uniform_pair();
        t_ += -std::log(u[0]) / height_;
        z_ = base_ + height_ * u[1];
    }

  private:
    RandomStream stream_;
    double height_;
    double base_;
    double t_ = 0;
    double z_ = 0;
};

std::size_t layers_for(double rate, double height)
{
    if (!(rate > 0))
        return 0;
    return static_cast<std::size_t>(std::ceil(rate / height));
}

//---------------------------------------------------------------------------//
/*!
 * Running value of sum_{tau < t} h(t - tau) over one source class.
 */
class KernelSum
{
  public:
    explicit KernelSum(MemoryKernel const* kernel) : kernel_(kernel) {}

    void advance(double t)
    {
        double const delta = t - t_ref_;
        t_ref_ = t;
        if (kernel_->kind == KernelKind::erlang && delta > 0)
        {
            double const e = std::exp(-kernel_->beta * delta);
            s1_ = e * (s1_ + delta * s0_);
            s0_ *= e;
        }
    }

    void add_event(double tau)
    {
        switch (kernel_->kind)
        {
            case KernelKind::zero: return;
            case KernelKind::erlang: s0_ += 1.0; return;  // at tau == t_ref
            case KernelKind::linear:
                s0_ += 1.0;
                s1_ += tau;
                return;
            case KernelKind::generic: history_.push_back(tau); return;
        }
    }

    double value() const
    {
        switch (kernel_->kind)
        {
            case KernelKind::zero: return 0.0;
            case KernelKind::erlang:
                return kernel_->scale * kernel_->beta * kernel_->beta * s1_;
            case KernelKind::linear:
                return kernel_->scale * (s0_ * t_ref_ - s1_);
            case KernelKind::generic: break;
        }
        double sum = 0;
        for (double tau : history_)
            sum += kernel_->h(t_ref_ - tau);
        return sum;
    }

  private:
    MemoryKernel const* kernel_;
    double t_ref_ = 0;
    double s0_ = 0;
    double s1_ = 0;
    std::vector<double> history_;
};

struct Candidate
{
    double t;
    std::uint32_t unit;
    std::uint32_t layer;
};
struct LaterFirst
{
    bool operator()(Candidate const& a, Candidate const& b) const
    {
        return std::tie(a.t, a.unit, a.layer) > std::tie(b.t, b.unit, b.layer);
    }
};

//---------------------------------------------------------------------------//
class NetworkSimulator
{
  public:
    NetworkSimulator(MultiClassSpec const& spec,
                     std::size_t N,
                     TimeGrid const& grid,
                     SeedPolicy const& seed,
                     std::uint64_t replicate,
                     SimOptions const& options)
        : spec_(spec),
          grid_(grid),
          seed_(seed),
          replicate_(replicate),
          options_(options),
          K_(spec.classes())
    {
        spec.validate();
        if (N == 0)
            throw std::invalid_argument("simulate_hawkes: N must be >= 1");
        if (!(seed.layer_height > 0))
            throw std::invalid_argument("simulate_hawkes: layer height must be > 0");
        sizes_ = spec.sizes(N);
        for (std::size_t k = 0; k < K_; ++k)
            for (std::size_t i = 0; i < sizes_[k]; ++i)
                unit_class_.push_back(static_cast<std::uint32_t>(k));
        for (std::size_t kl = 0; kl < K_ * K_; ++kl)
        {
            sums_.emplace_back(&spec.kernels[kl]);
            norms_.push_back(spec.kernels[kl].norms(grid.horizon()));
        }
        jumps_.assign(K_, 0);
        layers_.resize(unit_class_.size());

        result_.events = EventPaths(grid, unit_class_.size());
        result_.events.unit_class = unit_class_;
        result_.class_sizes = sizes_;
        result_.mode = options.mode;
        for (std::size_t k = 0; k < K_; ++k)
        {
            result_.lambda_path.emplace_back(grid);
            result_.Lambda_path.emplace_back(grid);
            result_.input_path.emplace_back(grid);
        }
        result_.diagnostics.master_seed = seed.master_seed;
        result_.diagnostics.replicate = replicate;
    }

    MultiClassSimResult run()
    {
        record_grid(0);
        if (options_.mode == SimMode::thinning)
            run_thinning();
        else
            run_euler();
        finish();
        return std::move(result_);
    }

  private:
    MultiClassSpec const& spec_;
    TimeGrid grid_;
    SeedPolicy seed_;
    std::uint64_t replicate_;
    SimOptions options_;
    std::size_t K_;
    std::vector<std::size_t> sizes_;
    std::vector<std::uint32_t> unit_class_;
    std::vector<KernelSum> sums_;
    std::vector<KernelNorms> norms_;
    std::vector<std::size_t> jumps_;
    std::vector<std::vector<MeasureLayer>> layers_;
    std::size_t active_layers_ = 0;
    std::priority_queue<Candidate, std::vector<Candidate>, LaterFirst> heap_;
    double now_ = 0;
    MultiClassSimResult result_;

    void advance_to(double t)
    {
        for (auto& s : sums_)
            s.advance(t);
        now_ = t;
    }

    double input(std::size_t k) const
    {
        double u = 0;
        for (std::size_t l = 0; l < K_; ++l)
        {
            if (spec_.kernel(k, l).kind == KernelKind::zero)
                continue;
            u += sums_[k * K_ + l].value() / static_cast<double>(sizes_[l]);
        }
        return u;
    }

    double intensity(std::size_t k) const { return spec_.rates[k].f(input(k)); }

    void add_event(std::size_t unit, double t)
    {
        std::size_t const l = unit_class_[unit];
        for (std::size_t k = 0; k < K_; ++k)
            sums_[k * K_ + l].add_event(t);
        ++jumps_[l];
        result_.events.times[unit].push_back(t);
    }

    void record_grid(std::size_t g)
    {
        for (std::size_t k = 0; k < K_; ++k)
        {
            double const u = input(k);
            result_.input_path[k][g] = u;
            result_.lambda_path[k][g] = spec_.rates[k].f(u);
        }
    }

    //! Certified bound on every class intensity over [now, b]
    double dominating_rate(double b) const
    {
        double worst = 0;
        double const width = b - now_;
        double const budget = static_cast<double>(options_.jump_budget);
        for (std::size_t k = 0; k < K_; ++k)
        {
            auto const& rate = spec_.rates[k];
            double drift = 0;
            for (std::size_t l = 0; l < K_; ++l)
            {
                auto const& nrm = norms_[k * K_ + l];
                double const Nl = static_cast<double>(sizes_[l]);
                drift += static_cast<double>(jumps_[l]) / Nl * nrm.sup_h_prime * width
                         + nrm.sup_h * budget / Nl;
            }
            double bound = rate.f(input(k)) + rate.sup_f_prime * drift;
            if (rate.sup_f)
                bound = std::min(bound, *rate.sup_f);
            worst = std::max(worst, bound);
        }
        return worst;
    }

    void ensure_layers(double rate)
    {
        if (!(rate <= options_.max_dominating_rate))
            throw std::runtime_error(
                "simulate_hawkes: dominating rate " + std::to_string(rate)
                + " exceeds the limit " + std::to_string(options_.max_dominating_rate)
                + " at t = " + std::to_string(now_) + " with "
                + std::to_string(result_.events.total_events()) + " events");
        result_.diagnostics.max_dominating_rate
            = std::max(result_.diagnostics.max_dominating_rate, rate);
        std::size_t const needed = layers_for(rate, seed_.layer_height);
        while (active_layers_ < needed)
        {
            auto const layer = static_cast<std::uint32_t>(active_layers_);
            for (std::size_t u = 0; u < layers_.size(); ++u)
            {
                auto& ml = layers_[u].emplace_back(
                    seed_, replicate_, static_cast<std::uint32_t>(u), layer);
                while (ml.time() <= now_)
                    ml.advance();
                heap_.push({ml.time(), static_cast<std::uint32_t>(u), layer});
            }
            ++active_layers_;
        }
        result_.diagnostics.layers = active_layers_;
    }

    double ceiling() const
    {
        return static_cast<double>(active_layers_) * seed_.layer_height;
    }

    Candidate pop_next()
    {
        Candidate c = heap_.top();
        heap_.pop();
        return c;
    }

    void push_next(Candidate const& c)
    {
        auto& ml = layers_[c.unit][c.layer];
        ml.advance();
        heap_.push({ml.time(), c.unit, c.layer});
    }

    double peek_time() const
    {
        return heap_.empty() ? INFINITY : heap_.top().t;
    }

    void run_thinning()
    {
        std::size_t const n = grid_.steps();
        for (std::size_t g = 1; g <= n; ++g)
        {
            double const b = grid_.time(g);
            ensure_layers(dominating_rate(b));
            while (peek_time() <= b)
            {
                Candidate const c = pop_next();
                ++result_.diagnostics.candidates;
                advance_to(c.t);
                auto const& ml = layers_[c.unit][c.layer];
                std::size_t const k = unit_class_[c.unit];
                double const lam = intensity(k);
                if (lam > ceiling())
                    throw std::logic_error(
                        "simulate_hawkes: intensity exceeded the certified bound");
                bool const accepted = ml.mark() <= lam;
                push_next(c);
                if (accepted)
                {
                    add_event(c.unit, c.t);
                    ensure_layers(dominating_rate(b));
                }
            }
            advance_to(b);
            record_grid(g);
        }
    }

    void run_euler()
    {
        std::size_t const n = grid_.steps();
        std::size_t const units = unit_class_.size();
        std::vector<std::uint32_t> hits(units, 0);
        std::vector<std::uint32_t> touched;
        std::vector<std::pair<double, std::uint32_t>> window_events;
        std::size_t draws = 0, truncated = 0;

        for (std::size_t g = 1; g <= n; ++g)
        {
            double const b = grid_.time(g);
            std::vector<double> frozen(K_);
            double top = 0;
            for (std::size_t k = 0; k < K_; ++k)
            {
                frozen[k] = result_.lambda_path[k][g - 1];
                top = std::max(top, frozen[k]);
            }
            ensure_layers(top);
            window_events.clear();
            touched.clear();
            while (peek_time() <= b)
            {
                Candidate const c = pop_next();
                ++result_.diagnostics.candidates;
                auto const& ml = layers_[c.unit][c.layer];
                bool const below = ml.mark() <= frozen[unit_class_[c.unit]];
                push_next(c);
                if (!below)
                    continue;
                if (hits[c.unit]++ == 0)
                {
                    touched.push_back(c.unit);
                    window_events.emplace_back(c.t, c.unit);
                }
            }
            for (auto u : touched)
            {
                if (hits[u] > 1)
                    ++truncated;
                hits[u] = 0;
            }
            draws += units;
            // window events arrive in time order from the heap
            for (auto const& [t, u] : window_events)
            {
                advance_to(t);
                add_event(u, t);
            }
            advance_to(b);
            record_grid(g);
        }
        double const rate = draws ? static_cast<double>(truncated) / draws : 0.0;
        result_.diagnostics.truncation_rate = rate;
        if (rate > options_.euler_error_rate)
            throw std::runtime_error("simulate_hawkes (euler): truncation rate "
                                     + std::to_string(rate)
                                     + " is too high; refine the grid");
        if (rate > options_.euler_warn_rate)
            result_.diagnostics.warnings.push_back(
                "euler truncation rate " + std::to_string(rate) + " exceeds "
                + std::to_string(options_.euler_warn_rate));
    }

    void finish()
    {
        double const half_dt = 0.5 * grid_.dt();
        for (std::size_t k = 0; k < K_; ++k)
        {
            auto const& lam = result_.lambda_path[k];
            auto& cum = result_.Lambda_path[k];
            for (std::size_t g = 1; g < lam.size(); ++g)
                cum[g] = cum[g - 1] + half_dt * (lam[g - 1] + lam[g]);
        }
        enforce_distinct_times(result_.events);
    }
};
}  // namespace

//---------------------------------------------------------------------------//
MultiClassSimResult simulate_hawkes_multiclass(MultiClassSpec const& spec,
                                               std::size_t N,
                                               TimeGrid const& grid,
                                               SeedPolicy const& seed,
                                               std::uint64_t replicate,
                                               SimOptions const& options)
{
    return NetworkSimulator(spec, N, grid, seed, replicate, options).run();
}

SimResult simulate_hawkes(ModelSpec const& spec,
                          std::size_t N,
                          TimeGrid const& grid,
                          SeedPolicy const& seed,
                          std::uint64_t replicate,
                          SimOptions const& options)
{
    auto const mc = MultiClassSpec::from_scalar(spec);
    auto r = simulate_hawkes_multiclass(mc, N, grid, seed, replicate, options);
    SimResult out;
    out.events = std::move(r.events);
    out.lambda_path = std::move(r.lambda_path.front());
    out.Lambda_path = std::move(r.Lambda_path.front());
    out.input_path = std::move(r.input_path.front());
    out.mode = r.mode;
    out.diagnostics = std::move(r.diagnostics);
    return out;
}

EventPaths thin_deterministic(TimeGrid const& grid,
                              std::vector<std::uint32_t> const& unit_class,
                              std::vector<GridFunction> const& intensity,
                              SeedPolicy const& seed,
                              std::uint64_t replicate)
{
    std::vector<double> sup(intensity.size(), 0.0);
    for (std::size_t k = 0; k < intensity.size(); ++k)
    {
        require_same_grid(intensity[k].grid, grid, "thin_deterministic");
        for (double v : intensity[k].values)
            sup[k] = std::max(sup[k], v);
    }
    EventPaths out(grid, unit_class.size());
    out.unit_class = unit_class;
    double const T = grid.horizon();
    for (std::size_t u = 0; u < unit_class.size(); ++u)
    {
        std::size_t const k = unit_class[u];
        if (k >= intensity.size())
            throw std::invalid_argument("thin_deterministic: unknown class label");
        auto const& lam = intensity[k];
        std::size_t const layers = layers_for(sup[k], seed.layer_height);
        auto& times = out.times[u];
        for (std::size_t l = 0; l < layers; ++l)
        {
            MeasureLayer ml(seed, replicate, static_cast<std::uint32_t>(u),
                            static_cast<std::uint32_t>(l));
            while (ml.time() <= T)
            {
                double const rate = std::max(0.0, lam.at(ml.time()));
                if (ml.mark() <= rate)
                    times.push_back(ml.time());
                ml.advance();
            }
        }
        std::sort(times.begin(), times.end());
    }
    enforce_distinct_times(out);
    return out;
}

EventPaths simulate_coupled_poisson(ModelSpec const&,
                                    std::size_t N,
                                    TimeGrid const& grid,
                                    LimitSolution const& limit,
                                    SeedPolicy const& seed,
                                    std::uint64_t replicate)
{
    require_same_grid(limit.grid, grid, "simulate_coupled_poisson");
    if (N == 0)
        throw std::invalid_argument("simulate_coupled_poisson: N must be >= 1");
    return thin_deterministic(grid, std::vector<std::uint32_t>(N, 0),
                              {limit.lambda}, seed, replicate);
}

double recompute_intensity(ModelSpec const& spec, EventPaths const& events, double t)
{
    double sum = 0;
    for (auto const& unit : events.times)
        for (double tau : unit)
            if (tau < t)
                sum += spec.h(t - tau);
    return spec.f(sum / static_cast<double>(events.unit_count()));
}

void enforce_distinct_times(EventPaths& events)
{
    std::vector<std::pair<double, std::size_t>> all;
    all.reserve(events.total_events());
    for (std::size_t u = 0; u < events.times.size(); ++u)
        for (double t : events.times[u])
            all.emplace_back(t, u);
    std::sort(all.begin(), all.end());
    bool changed = false;
    for (std::size_t k = 1; k < all.size(); ++k)
    {
        if (all[k].first <= all[k - 1].first)
        {
            double const bumped = std::nextafter(all[k - 1].first, INFINITY);
            auto& v = events.times[all[k].second];
            auto it = std::find(v.begin(), v.end(), all[k].first);
            if (it != v.end())
                *it = bumped;
            all[k].first = bumped;
            changed = true;
        }
    }
    if (changed)
        for (auto& v : events.times)
            std::sort(v.begin(), v.end());
}

}  // namespace mfh
