#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mfh
{
//---------------------------------------------------------------------------//
// GRIDS AND PATHS
//---------------------------------------------------------------------------//
//! Largest supported grid; dense triangular tables grow as n_steps^2.
inline constexpr std::size_t kMaxSteps = 10000;

/*!
 * Uniform discretisation t_k = k * dt of [0, T], k = 0..n_steps.
 */
class TimeGrid
{
  public:
    TimeGrid() = default;
    TimeGrid(double horizon, std::size_t n_steps);

    double horizon() const { return horizon_; }
    std::size_t steps() const { return steps_; }
    std::size_t size() const { return steps_ + 1; }
    double dt() const { return dt_; }
    double time(std::size_t k) const
    {
        return k == steps_ ? horizon_ : static_cast<double>(k) * dt_;
    }
    //! Index of the grid cell [t_k, t_{k+1}) containing t (clamped)
    std::size_t cell(double t) const;

    friend bool operator==(TimeGrid const&, TimeGrid const&) = default;

  private:
    double horizon_ = 0;
    std::size_t steps_ = 0;
    double dt_ = 0;
};

//! Real function sampled on a TimeGrid.
struct GridFunction
{
    TimeGrid grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(TimeGrid g, double fill = 0.0)
        : grid(g), values(g.size(), fill)
    {
    }
    GridFunction(TimeGrid g, std::vector<double> v);

    double operator[](std::size_t k) const { return values[k]; }
    double& operator[](std::size_t k) { return values[k]; }
    std::size_t size() const { return values.size(); }

    //! Piecewise-linear interpolation; t is clamped to [0, T]
    double at(double t) const;
    //! sup_k |values[k]|
    double sup_norm() const;
};

//! Throws std::invalid_argument unless both functions live on the same grid.
void require_same_grid(TimeGrid const& a, TimeGrid const& b, char const* what);

/*!
 * Per-unit jump times of a family of counting processes on (0, T].
 *
 * Within a unit times are strictly increasing; across units no two jump
 * times coincide.
 */
struct EventPaths
{
    TimeGrid grid;
    std::vector<std::uint32_t> unit_class;  //!< class label per unit
    std::vector<std::vector<double>> times;

    EventPaths() = default;
    EventPaths(TimeGrid g, std::size_t units);

    std::size_t unit_count() const { return times.size(); }
    std::size_t total_events() const;
    //! Number of jumps of `unit` in (0, t]
    std::size_t count_at(std::size_t unit, double t) const;
    //! Sum over units of the jump counts at every grid time
    std::vector<double> aggregate_counts() const;
    //! All jump times of all units, sorted
    std::vector<double> merged_times() const;

    //! Throws std::logic_error if monotonicity or distinctness fails
    void validate() const;
};

//! sup_t |a(t) - b(t)| between two counting paths on (0, T]
double counting_distance(std::span<double const> a, std::span<double const> b);

//---------------------------------------------------------------------------//
// MODEL SPECIFICATIONS
//---------------------------------------------------------------------------//
using RealFunction = std::function<double(double)>;

/*!
 * Rate function f with its derivative and analytic constants.
 */
struct RateFunction
{
    RealFunction f;
    RealFunction f_prime;
    double lip_f = 0;        //!< Lipschitz constant of f
    double sup_f_prime = 0;  //!< sup |f'|
    double lip_f_prime = 0;  //!< Lipschitz constant of f'
    std::optional<double> sup_f;  //!< global bound on f when one is known
    double probe_lo = -5;  //!< domain used for spot checks
    double probe_hi = 5;
    bool constants_estimated = false;  //!< true when probed, not exact
    std::string description;
};

enum class KernelKind
{
    zero,    //!< h == 0
    erlang,  //!< h(t) = scale * beta^2 t exp(-beta t)
    linear,  //!< h(t) = scale * t
    generic
};

//! Norms of h and h' on [0, T]
struct KernelNorms
{
    double sup_h = 0;
    double sup_h_prime = 0;
    double l1_h_prime = 0;
};

/*!
 * Memory kernel h with derivative; h(0) = 0.
 */
struct MemoryKernel
{
    RealFunction h;
    RealFunction h_prime;
    KernelKind kind = KernelKind::generic;
    double beta = 0;
    double scale = 1;
    std::string description;

    KernelNorms norms(double horizon) const;
    //! Integral of h over [0, infinity); numeric on a long horizon if needed
    double total_mass() const;

    static MemoryKernel zero();
    static MemoryKernel erlang(double beta, double scale = 1.0);
    static MemoryKernel linear(double scale);
};

struct ModelSpec
{
    std::string name;
    RateFunction rate;
    MemoryKernel kernel;

    double f(double x) const { return rate.f(x); }
    double f_prime(double x) const { return rate.f_prime(x); }
    double h(double t) const { return kernel.h(t); }
    double h_prime(double t) const { return kernel.h_prime(t); }
    double lip_f() const { return rate.lip_f; }
    double sup_f_prime() const { return rate.sup_f_prime; }
    double lip_f_prime() const { return rate.lip_f_prime; }
};

/*!
 * K interacting classes: rates f_k, kernels h_{k,l}, proportions p_k.
 */
struct MultiClassSpec
{
    std::string name;
    std::vector<RateFunction> rates;
    std::vector<MemoryKernel> kernels;  //!< row-major K x K, entry (k, l)
    std::vector<double> proportions;

    std::size_t classes() const { return rates.size(); }
    MemoryKernel const& kernel(std::size_t k, std::size_t l) const
    {
        return kernels[k * classes() + l];
    }
    /*!
     * Class sizes for a total of N units: N_k = floor(p_k N) for k < K-1,
     * the last class takes the remainder. Every class must be non-empty.
     */
    std::vector<std::size_t> sizes(std::size_t total) const;
    void validate() const;

    static MultiClassSpec from_scalar(ModelSpec const& spec);
};

//---------------------------------------------------------------------------//
// OPERATIONS
//---------------------------------------------------------------------------//
enum class BuiltinFamily
{
    sigmoid_erlang,  //!< params (gamma, beta)
    constant_rate,   //!< params (c [, beta])
    linear_toy       //!< params (a, c): f(x) = a + c x, h(t) = t
};

BuiltinFamily parse_family(std::string_view name);
std::string_view to_string(BuiltinFamily family);

//! Builtin model with exact derivatives and closed-form constants
ModelSpec builtin_model(BuiltinFamily family, std::span<double const> params);
ModelSpec builtin_model(std::string_view name, std::span<double const> params);

//! Expression-defined model; see the config documentation for the rules
struct UserModelInput
{
    std::string f;
    std::string h;
    std::string f_prime;  //!< optional; central differences otherwise
    std::string h_prime;  //!< optional; central differences otherwise
    double domain_lo = -5;
    double domain_hi = 5;
    std::vector<std::pair<std::string, double>> constants;
};
ModelSpec user_model(UserModelInput const& input, std::string name = "user");

/*!
 * Spot-check the model invariants: f >= 0 on the probe domain, h(0) = 0,
 * Lipschitz and derivative bounds on random point pairs.
 *
 * Throws std::invalid_argument with the first violation.
 */
void validate_model(ModelSpec const& spec, std::uint64_t probe_seed = 1);

struct FixedPoint
{
    double x = 0;
    double slope = 0;  //!< f'(x*)
    bool stable = false;  //!< |f'(x*)| < 1
};

/*!
 * All solutions of f(x) = x in [lo, hi], found by a sign-change scan and
 * bisection to `tol`.
 *
 * Requires the kernel to have unit mass (checked within `tol`, at least
 * 1e-6). Throws if no sign change of f(x) - x occurs in the bracket.
 */
std::vector<FixedPoint>
fixed_points(ModelSpec const& spec, double tol, double lo = 0.0, double hi = 1.0);

}  // namespace mfh
