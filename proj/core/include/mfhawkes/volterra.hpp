#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "mfhawkes/limit.hpp"
#include "mfhawkes/model.hpp"

namespace mfh
{
//---------------------------------------------------------------------------//
/*!
 * Dense lower-triangular table of dim x dim blocks indexed by grid pairs
 * (i, j) with j <= i. Row i stores blocks j = 0..i contiguously; each block
 * is row-major in the class indices (k, l).
 */
class TriangularTable
{
  public:
    TriangularTable() = default;
    TriangularTable(std::size_t n_points, std::size_t dim);

    std::size_t points() const { return points_; }
    std::size_t dim() const { return dim_; }

    double operator()(std::size_t i, std::size_t j) const
    {
        return data_[offset(i, j)];
    }
    double& operator()(std::size_t i, std::size_t j)
    {
        return data_[offset(i, j)];
    }
    double at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const
    {
        return data_[offset(i, j) + k * dim_ + l];
    }
    double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l)
    {
        return data_[offset(i, j) + k * dim_ + l];
    }
    //! First block of row i (blocks j = 0..i follow)
    double const* row(std::size_t i) const { return data_.data() + offset(i, 0); }
    double* row(std::size_t i) { return data_.data() + offset(i, 0); }

    //! max over all entries of |value|
    double max_abs() const;

  private:
    std::size_t points_ = 0;
    std::size_t dim_ = 1;
    std::vector<double> data_;

    std::size_t offset(std::size_t i, std::size_t j) const
    {
        return (i * (i + 1) / 2 + j) * dim_ * dim_;
    }
};

//---------------------------------------------------------------------------//
/*!
 * Tabulated Volterra kernel kappa(t_i, t_j) with its a priori bound M_T.
 *
 * For model-built tables the diagonal is exactly zero. Synthetic tables may
 * carry the one-sided limit kappa(t, t-) on the diagonal; solvers then use a
 * locally implicit trapezoid step.
 */
struct KernelTable
{
    TimeGrid grid;
    TriangularTable kappa;
    double bound = 0;  //!< M_T

    std::size_t dim() const { return kappa.dim(); }

    //! Tabulate a scalar kernel k(t, s); the bound is the table maximum
    static KernelTable from_function(TimeGrid const& grid,
                                     std::function<double(double, double)> const& k);
};

enum class ResolventMethod
{
    neumann,
    integral_equation
};
std::string_view to_string(ResolventMethod m);
ResolventMethod parse_resolvent_method(std::string_view name);

struct ResolventTable
{
    TimeGrid grid;
    TriangularTable K;
    ResolventMethod method = ResolventMethod::integral_equation;
    double kappa_bound = 0;       //!< M_T of the source kernel
    std::size_t truncation_order = 0;  //!< neumann only
    double tail_bound = 0;             //!< certified neumann tail

    std::size_t dim() const { return K.dim(); }
    //! M_T exp(M_T T)
    double a_priori_bound() const;
};

//---------------------------------------------------------------------------//
// KERNEL CONSTRUCTION
//---------------------------------------------------------------------------//
//! kappa(t, s) = int_s^t f'(x_u) h'(u - s) du by trapezoid on the grid
KernelTable build_kappa(LimitSolution const& limit,
                        ModelSpec const& spec,
                        TimeGrid const& grid);

/*!
 * Matrix kernel kappa_{k,l}(t, s) = sqrt(p_k/p_l) int_s^t f_k'(x_k(u))
 * h'_{k,l}(u - s) du. The bound is the max row sum of the block bounds.
 */
KernelTable build_kappa_multiclass(std::vector<LimitSolution> const& limits,
                                   MultiClassSpec const& spec,
                                   TimeGrid const& grid);

//! M_T = ||f'||_inf ||h'||_{L1[0,T]}
double kappa_bound(ModelSpec const& spec, double horizon);

//---------------------------------------------------------------------------//
// RESOLVENT
//---------------------------------------------------------------------------//
//! Hard cap on the number of Neumann terms
inline constexpr std::size_t kMaxNeumannOrder = 400;

/*!
 * Certified tail sum_{m > n} M^m T^{m-1} / (m-1)! of the Neumann series.
 */
double neumann_tail_bound(double kappa_bound, double horizon, std::size_t order);

/*!
 * Truncated Neumann series of iterated kernels, stopping at the first order
 * whose certified tail is below `tol`.
 *
 * Throws std::runtime_error if the order would exceed kMaxNeumannOrder.
 */
ResolventTable build_resolvent_neumann(KernelTable const& kappa,
                                       double tol,
                                       unsigned threads = 1);

/*!
 * March K(t, s) = kappa(t, s) + int_s^t kappa(t, u) K(u, s) du row by row.
 * Column blocks are distributed over `threads` workers; results do not
 * depend on the worker count.
 */
ResolventTable build_resolvent_ieq(KernelTable const& kappa, unsigned threads = 1);

//! max |K(t_i, s_j) - K'(t_i, s_j)| over the table
double max_abs_difference(TriangularTable const& a, TriangularTable const& b);

//! Residual K - kappa - int kappa K on the grid (trapezoid), max-abs
double resolvent_identity_residual(KernelTable const& kappa,
                                   ResolventTable const& resolvent);

/*!
 * Lipschitz-in-t constant C_T of the resolvent:
 * C_T = L + M_T e^{M_T T} (L T + M_T) with L = ||f'||_inf ||h'||_{inf,[0,T]}.
 */
double resolvent_lipschitz_constant(ModelSpec const& spec, double horizon);

//---------------------------------------------------------------------------//
// OPERATORS
//---------------------------------------------------------------------------//
//! Phi(F)(t) = F(t) + int_0^t K(t, s) F(s) ds
GridFunction apply_phi(ResolventTable const& resolvent, GridFunction const& F);
std::vector<GridFunction> apply_phi(ResolventTable const& resolvent,
                                    std::vector<GridFunction> const& F);

//! Solve G = F + int_0^t kappa(t, s) G(s) ds by forward march
GridFunction solve_second_kind(KernelTable const& kappa, GridFunction const& F);
std::vector<GridFunction> solve_second_kind(KernelTable const& kappa,
                                            std::vector<GridFunction> const& F);

//! G - F - int kappa G, pointwise on the grid
GridFunction second_kind_residual(KernelTable const& kappa,
                                  GridFunction const& F,
                                  GridFunction const& G);

//! Psi(F)(t) = int_0^t F(s) h'(t - s) ds
GridFunction apply_psi(ModelSpec const& spec, GridFunction const& F);
GridFunction apply_psi(MemoryKernel const& kernel, GridFunction const& F);

//! Xi(F)(t) = f'(x_t) F(t)
GridFunction apply_xi(LimitSolution const& limit,
                      ModelSpec const& spec,
                      GridFunction const& F);
GridFunction apply_xi(LimitSolution const& limit,
                      RateFunction const& rate,
                      GridFunction const& F);

//! int_0^t h(t - s) dF(s) by left-point Ito sums over grid increments
GridFunction convolve_increments(MemoryKernel const& kernel, GridFunction const& F);

}  // namespace mfh
