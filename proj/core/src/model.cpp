#include "mfhawkes/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mfhawkes/expression.hpp"
#include "mfhawkes/random.hpp"

namespace mfh
{
//---------------------------------------------------------------------------//
// TimeGrid / GridFunction
//---------------------------------------------------------------------------//
TimeGrid::TimeGrid(double horizon, std::size_t n_steps)
    : horizon_(horizon), steps_(n_steps)
{
    if (!(horizon > 0) || !std::isfinite(horizon))
        throw std::invalid_argument("time grid horizon must be positive");
    if (n_steps == 0)
        throw std::invalid_argument("time grid needs at least one step");
    if (n_steps > kMaxSteps)
        throw std::invalid_argument(
            "time grid has " + std::to_string(n_steps)
            + " steps; the dense-table limit is " + std::to_string(kMaxSteps));
    dt_ = horizon / static_cast<double>(n_steps);
}

std::size_t TimeGrid::cell(double t) const
{
    if (t <= 0)
        return 0;
    auto k = static_cast<std::size_t>(t / dt_);
    return std::min(k, steps_ - 1);
}

GridFunction::GridFunction(TimeGrid g, std::vector<double> v)
    : grid(g), values(std::move(v))
{
    if (values.size() != grid.size())
        throw std::invalid_argument("grid function length does not match grid");
}

double GridFunction::at(double t) const
{
    if (t <= 0)
        return values.front();
    if (t >= grid.horizon())
        return values.back();
    std::size_t const k = grid.cell(t);
    double const w = (t - grid.time(k)) / grid.dt();
    return values[k] + w * (values[k + 1] - values[k]);
}

double GridFunction::sup_norm() const
{
    double result = 0;
    for (double v : values)
        result = std::max(result, std::fabs(v));
    return result;
}

void require_same_grid(TimeGrid const& a, TimeGrid const& b, char const* what)
{
    if (!(a == b))
        throw std::invalid_argument(std::string("grid mismatch: ") + what);
}

//---------------------------------------------------------------------------//
// EventPaths
//---------------------------------------------------------------------------//
EventPaths::EventPaths(TimeGrid g, std::size_t units)
    : grid(g), unit_class(units, 0), times(units)
{
}

std::size_t EventPaths::total_events() const
{
    std::size_t n = 0;
    for (auto const& t : times)
        n += t.size();
    return n;
}

std::size_t EventPaths::count_at(std::size_t unit, double t) const
{
    auto const& v = times[unit];
    return static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), t)
                                    - v.begin());
}

std::vector<double> EventPaths::merged_times() const
{
    std::vector<double> all;
    all.reserve(total_events());
    for (auto const& t : times)
        all.insert(all.end(), t.begin(), t.end());
    std::sort(all.begin(), all.end());
    return all;
}

std::vector<double> EventPaths::aggregate_counts() const
{
    auto const all = merged_times();
    std::vector<double> counts(grid.size(), 0.0);
    std::size_t idx = 0;
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        double const t = grid.time(k);
        while (idx < all.size() && all[idx] <= t)
            ++idx;
        counts[k] = static_cast<double>(idx);
    }
    return counts;
}

void EventPaths::validate() const
{
    if (unit_class.size() != times.size())
        throw std::logic_error("event paths: class labels do not match units");
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        auto const& v = times[i];
        for (std::size_t k = 0; k < v.size(); ++k)
        {
            if (!(v[k] > 0) || v[k] > grid.horizon())
                throw std::logic_error("event paths: jump time outside (0, T]");
            if (k > 0 && !(v[k] > v[k - 1]))
                throw std::logic_error(
                    "event paths: jump times not strictly increasing in unit "
                    + std::to_string(i));
        }
    }
    auto const all = merged_times();
    for (std::size_t k = 1; k < all.size(); ++k)
    {
        if (all[k] == all[k - 1])
            throw std::logic_error("event paths: simultaneous jumps across units");
    }
}

double counting_distance(std::span<double const> a, std::span<double const> b)
{
    std::size_t i = 0, j = 0;
    long diff = 0;
    long best = 0;
    while (i < a.size() || j < b.size())
    {
        double const t = std::min(i < a.size() ? a[i] : INFINITY,
                                  j < b.size() ? b[j] : INFINITY);
        while (i < a.size() && a[i] == t)
        {
            ++diff;
            ++i;
        }
        while (j < b.size() && b[j] == t)
        {
            --diff;
            ++j;
        }
        best = std::max(best, std::labs(diff));
    }
    return static_cast<double>(best);
}

//---------------------------------------------------------------------------//
// Kernels
//---------------------------------------------------------------------------//
MemoryKernel MemoryKernel::zero()
{
    MemoryKernel k;
    k.kind = KernelKind::zero;
    k.scale = 0;
    k.h = [](double) { return 0.0; };
    k.h_prime = [](double) { return 0.0; };
    k.description = "0";
    return k;
}

MemoryKernel MemoryKernel::erlang(double beta, double scale)
{
    if (!(beta > 0))
        throw std::invalid_argument("Erlang kernel needs beta > 0");
    MemoryKernel k;
    k.kind = KernelKind::erlang;
    k.beta = beta;
    k.scale = scale;
    double const c = scale * beta * beta;
    k.h = [c, beta](double t) { return c * t * std::exp(-beta * t); };
    k.h_prime = [c, beta](double t) {
        return c * (1.0 - beta * t) * std::exp(-beta * t);
    };
    k.description = std::to_string(scale) + "*beta^2*t*exp(-beta*t), beta="
                    + std::to_string(beta);
    return k;
}

MemoryKernel MemoryKernel::linear(double scale)
{
    MemoryKernel k;
    k.kind = KernelKind::linear;
    k.scale = scale;
    k.h = [scale](double t) { return scale * t; };
    k.h_prime = [scale](double) { return scale; };
    k.description = std::to_string(scale) + "*t";
    return k;
}

KernelNorms MemoryKernel::norms(double horizon) const
{
    KernelNorms n;
    double const s = std::fabs(scale);
    switch (kind)
    {
        case KernelKind::zero: return n;
        case KernelKind::linear:
            n.sup_h = s * horizon;
            n.sup_h_prime = s;
            n.l1_h_prime = s * horizon;
            return n;
        case KernelKind::erlang: {
            double const peak = 1.0 / beta;
            double const h_end = std::fabs(h(horizon));
            double const h_peak = std::fabs(h(peak));
            n.sup_h = horizon >= peak ? h_peak : h_end;
            n.sup_h_prime = s * beta * beta;
            n.l1_h_prime = horizon <= peak ? h_end : 2.0 * h_peak - h_end;
            return n;
        }
        case KernelKind::generic: break;
    }
    constexpr std::size_t samples = 100000;
    double const step = horizon / samples;
    double prev = std::fabs(h_prime(0.0));
    n.sup_h_prime = prev;
    for (std::size_t k = 1; k <= samples; ++k)
    {
        double const t = static_cast<double>(k) * step;
        double const dh = std::fabs(h_prime(t));
        n.sup_h = std::max(n.sup_h, std::fabs(h(t)));
        n.sup_h_prime = std::max(n.sup_h_prime, dh);
        n.l1_h_prime += 0.5 * step * (prev + dh);
        prev = dh;
    }
    return n;
}

double MemoryKernel::total_mass() const
{
    switch (kind)
    {
        case KernelKind::zero: return 0.0;
        case KernelKind::erlang: return scale;
        case KernelKind::linear: return scale == 0 ? 0.0 : INFINITY;
        case KernelKind::generic: break;
    }
    // Composite Simpson on [0, 1000]
    constexpr std::size_t panels = 1000000;
    constexpr double upper = 1000.0;
    double const step = upper / panels;
    double sum = h(0.0) + h(upper);
    for (std::size_t k = 1; k < panels; ++k)
        sum += (k % 2 ? 4.0 : 2.0) * h(static_cast<double>(k) * step);
    return sum * step / 3.0;
}

//---------------------------------------------------------------------------//
// Multi-class
//---------------------------------------------------------------------------//
std::vector<std::size_t> MultiClassSpec::sizes(std::size_t total) const
{
    std::size_t const K = classes();
    std::vector<std::size_t> result(K, 0);
    std::size_t used = 0;
    for (std::size_t k = 0; k + 1 < K; ++k)
    {
        result[k] = static_cast<std::size_t>(
            std::floor(proportions[k] * static_cast<double>(total)));
        used += result[k];
    }
    if (used > total)
        throw std::invalid_argument("class proportions exceed one");
    result[K - 1] = total - used;
    for (std::size_t k = 0; k < K; ++k)
    {
        if (result[k] == 0)
            throw std::invalid_argument("class " + std::to_string(k)
                                        + " is empty for N = "
                                        + std::to_string(total));
    }
    return result;
}

void MultiClassSpec::validate() const
{
    std::size_t const K = classes();
    if (K == 0)
        throw std::invalid_argument("multi-class spec has no classes");
    if (kernels.size() != K * K)
        throw std::invalid_argument("multi-class spec needs K*K kernels");
    if (proportions.size() != K)
        throw std::invalid_argument("multi-class spec needs K proportions");
    double sum = 0;
    for (double p : proportions)
    {
        if (!(p > 0) || p > 1)
            throw std::invalid_argument("class proportions must lie in (0, 1]");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("class proportions must sum to one");
    for (auto const& k : kernels)
    {
        if (k.h(0.0) != 0.0)
            throw std::invalid_argument("every kernel must satisfy h(0) = 0");
    }
}

MultiClassSpec MultiClassSpec::from_scalar(ModelSpec const& spec)
{
    MultiClassSpec mc;
    mc.name = spec.name;
    mc.rates = {spec.rate};
    mc.kernels = {spec.kernel};
    mc.proportions = {1.0};
    return mc;
}

//---------------------------------------------------------------------------//
// Builtin and user models
//---------------------------------------------------------------------------//
BuiltinFamily parse_family(std::string_view name)
{
    if (name == "sigmoid_erlang")
        return BuiltinFamily::sigmoid_erlang;
    if (name == "constant_rate")
        return BuiltinFamily::constant_rate;
    if (name == "linear_toy")
        return BuiltinFamily::linear_toy;
    throw std::invalid_argument("unknown model family '" + std::string(name)
                                + "'");
}

std::string_view to_string(BuiltinFamily family)
{
    switch (family)
    {
        case BuiltinFamily::sigmoid_erlang: return "sigmoid_erlang";
        case BuiltinFamily::constant_rate: return "constant_rate";
        case BuiltinFamily::linear_toy: return "linear_toy";
    }
    return "?";
}

namespace
{
double param(std::span<double const> params, std::size_t i, double fallback,
             char const* family)
{
    if (i < params.size())
        return params[i];
    if (std::isnan(fallback))
        throw std::invalid_argument(std::string(family) + ": missing parameter "
                                    + std::to_string(i));
    return fallback;
}
}  // namespace

ModelSpec builtin_model(BuiltinFamily family, std::span<double const> params)
{
    ModelSpec spec;
    char const* fname = to_string(family).data();
    switch (family)
    {
        case BuiltinFamily::sigmoid_erlang: {
            double const gamma = param(params, 0, NAN, fname);
            double const beta = param(params, 1, NAN, fname);
            if (!(gamma > 0))
                throw std::invalid_argument("sigmoid_erlang: gamma must be > 0");
            if (!(beta > 0))
                throw std::invalid_argument("sigmoid_erlang: beta must be > 0");
            auto sig = [gamma](double x) {
                return 1.0 / (1.0 + std::exp(-gamma * (x - 0.5)));
            };
            spec.rate.f = sig;
            spec.rate.f_prime = [gamma, sig](double x) {
                double const s = sig(x);
                return gamma * s * (1.0 - s);
            };
            spec.rate.lip_f = gamma / 4.0;
            spec.rate.sup_f_prime = gamma / 4.0;
            // max of s(1-s)(1-2s) over s in [0,1] is 1/(6 sqrt 3)
            spec.rate.lip_f_prime = gamma * gamma / (6.0 * std::sqrt(3.0));
            spec.rate.sup_f = 1.0;
            spec.rate.description = "1/(1+exp(-gamma*(x-0.5))), gamma="
                                    + std::to_string(gamma);
            spec.kernel = MemoryKernel::erlang(beta);
            break;
        }
        case BuiltinFamily::constant_rate: {
            double const c = param(params, 0, NAN, fname);
            double const beta = param(params, 1, 2.0, fname);
            if (!(c >= 0))
                throw std::invalid_argument("constant_rate: c must be >= 0");
            spec.rate.f = [c](double) { return c; };
            spec.rate.f_prime = [](double) { return 0.0; };
            spec.rate.sup_f = c;
            spec.rate.description = std::to_string(c);
            spec.kernel = MemoryKernel::erlang(beta);
            break;
        }
        case BuiltinFamily::linear_toy: {
            double const a = param(params, 0, NAN, fname);
            double const c = param(params, 1, NAN, fname);
            if (!(a >= 0) || !(c >= 0))
                throw std::invalid_argument("linear_toy: a and c must be >= 0");
            spec.rate.f = [a, c](double x) { return a + c * x; };
            spec.rate.f_prime = [c](double) { return c; };
            spec.rate.lip_f = c;
            spec.rate.sup_f_prime = c;
            spec.rate.probe_lo = 0;
            spec.rate.probe_hi = 10;
            spec.rate.description = std::to_string(a) + "+" + std::to_string(c)
                                    + "*x";
            spec.kernel = MemoryKernel::linear(1.0);
            break;
        }
    }
    spec.name = std::string(to_string(family));
    return spec;
}

ModelSpec builtin_model(std::string_view name, std::span<double const> params)
{
    return builtin_model(parse_family(name), params);
}

namespace
{
RealFunction central_difference(RealFunction g)
{
    return [g = std::move(g)](double x) {
        double const step = 1e-6 * std::max(1.0, std::fabs(x));
        return (g(x + step) - g(x - step)) / (2.0 * step);
    };
}
}  // namespace

ModelSpec user_model(UserModelInput const& input, std::string name)
{
    std::map<std::string, double> constants(input.constants.begin(),
                                            input.constants.end());
    if (!(input.domain_hi > input.domain_lo))
        throw std::invalid_argument("user model: empty probe domain");

    ModelSpec spec;
    spec.name = std::move(name);

    Expression f_expr(input.f, "x", constants);
    spec.rate.f = f_expr;
    spec.rate.f_prime = input.f_prime.empty()
                            ? central_difference(f_expr)
                            : RealFunction(Expression(input.f_prime, "x",
                                                      constants));
    spec.rate.probe_lo = input.domain_lo;
    spec.rate.probe_hi = input.domain_hi;
    spec.rate.constants_estimated = true;
    spec.rate.description = input.f;

    // Lipschitz constants: max over a 1e4-point probe grid, inflated by 10%
    constexpr std::size_t probes = 10000;
    double const width = input.domain_hi - input.domain_lo;
    double const step = width / (probes - 1);
    double max_df = 0, max_ddf = 0;
    double prev_df = spec.rate.f_prime(input.domain_lo);
    max_df = std::fabs(prev_df);
    for (std::size_t k = 1; k < probes; ++k)
    {
        double const x = input.domain_lo + static_cast<double>(k) * step;
        double const df = spec.rate.f_prime(x);
        max_df = std::max(max_df, std::fabs(df));
        max_ddf = std::max(max_ddf, std::fabs(df - prev_df) / step);
        prev_df = df;
    }
    spec.rate.lip_f = 1.1 * max_df;
    spec.rate.sup_f_prime = 1.1 * max_df;
    spec.rate.lip_f_prime = 1.1 * max_ddf;

    Expression h_expr(input.h, "t", constants);
    if (h_expr(0.0) != 0.0)
        throw std::invalid_argument("user model: kernel must satisfy h(0) = 0");
    spec.kernel.kind = KernelKind::generic;
    spec.kernel.h = h_expr;
    spec.kernel.h_prime = input.h_prime.empty()
                              ? central_difference(h_expr)
                              : RealFunction(Expression(input.h_prime, "t",
                                                        constants));
    spec.kernel.description = input.h;
    return spec;
}

void validate_model(ModelSpec const& spec, std::uint64_t probe_seed)
{
    auto const& r = spec.rate;
    if (spec.kernel.h(0.0) != 0.0)
        throw std::invalid_argument(spec.name + ": h(0) must be exactly 0");
    for (int k = 0; k <= 200; ++k)
    {
        double const x = r.probe_lo + (r.probe_hi - r.probe_lo) * k / 200.0;
        if (!(r.f(x) >= 0))
            throw std::invalid_argument(spec.name + ": f(" + std::to_string(x)
                                        + ") is negative");
    }
    SeedPolicy policy{probe_seed};
    RandomStream rng(policy, StreamPurpose::aux, 0, 0);
    for (int k = 0; k < 100; ++k)
    {
        double const x = r.probe_lo + (r.probe_hi - r.probe_lo) * rng.uniform();
        double const y = r.probe_lo + (r.probe_hi - r.probe_lo) * rng.uniform();
        double const slack = 1e-12 + 1e-9 * std::fabs(r.f(x));
        if (std::fabs(r.f(x) - r.f(y)) > r.lip_f * std::fabs(x - y) + slack)
            throw std::invalid_argument(spec.name
                                        + ": Lipschitz bound of f violated");
        if (std::fabs(r.f_prime(x)) > r.sup_f_prime * (1 + 1e-9) + 1e-12)
            throw std::invalid_argument(spec.name + ": bound on |f'| violated");
        if (std::fabs(r.f_prime(x) - r.f_prime(y))
            > r.lip_f_prime * std::fabs(x - y) * (1 + 1e-9) + 1e-12)
            throw std::invalid_argument(spec.name
                                        + ": Lipschitz bound of f' violated");
    }
}

std::vector<FixedPoint>
fixed_points(ModelSpec const& spec, double tol, double lo, double hi)
{
    if (!(tol > 0) || !(hi > lo))
        throw std::invalid_argument("fixed_points: invalid tolerance or bracket");
    double const mass = spec.kernel.total_mass();
    if (!(std::fabs(mass - 1.0) <= std::max(tol, 1e-6)))
        throw std::invalid_argument(
            "fixed_points: kernel mass is " + std::to_string(mass)
            + ", the fixed-point reduction needs unit mass");

    auto g = [&](double x) { return spec.f(x) - x; };
    constexpr int scan = 1000;
    std::vector<FixedPoint> result;
    bool any_sign_change = false;
    double x0 = lo;
    double g0 = g(x0);
    auto push = [&](double x) {
        FixedPoint p;
        p.x = x;
        p.slope = spec.f_prime(x);
        p.stable = std::fabs(p.slope) < 1.0;
        if (result.empty() || std::fabs(result.back().x - x) > tol)
            result.push_back(p);
    };
    if (g0 == 0.0)
    {
        any_sign_change = true;
        push(x0);
    }
    for (int k = 1; k <= scan; ++k)
    {
        double const x1 = lo + (hi - lo) * k / scan;
        double const g1 = g(x1);
        if (g1 == 0.0)
        {
            any_sign_change = true;
            push(x1);
        }
        else if (g0 != 0.0 && (g0 < 0) != (g1 < 0))
        {
            any_sign_change = true;
            double a = x0, b = x1, ga = g0;
            while (b - a > tol)
            {
                double const mid = 0.5 * (a + b);
                double const gm = g(mid);
                if (gm == 0.0)
                {
                    a = b = mid;
                    break;
                }
                if ((gm < 0) == (ga < 0))
                {
                    a = mid;
                    ga = gm;
                }
                else
                {
                    b = mid;
                }
            }
            push(0.5 * (a + b));
        }
        x0 = x1;
        g0 = g1;
    }
    if (!any_sign_change)
        throw std::invalid_argument(
            "fixed_points: f(x) - x has no sign change in the bracket");
    return result;
}

}  // namespace mfh
