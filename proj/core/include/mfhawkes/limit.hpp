#pragma once

#include <vector>

#include "mfhawkes/model.hpp"

namespace mfh
{
/*!
 * Deterministic mean-field limit on a grid: the compensator m, the rate
 * lambda = m' = f(x) and the filtered input x = int h(t - s) dm(s).
 */
struct LimitSolution
{
    TimeGrid grid;
    GridFunction m;
    GridFunction lambda;
    GridFunction x;
};

/*!
 * Explicit trapezoid march for the limit equation.
 *
 * lambda(t_0) = f(0); for k >= 1 the input x(t_k) is the trapezoid sum of
 * h(t_k - t_j) lambda(t_j) over j < k (the j = k term carries h(0) = 0),
 * lambda(t_k) = f(x(t_k)) and m is the running trapezoid of lambda.
 * Second-order accurate in dt.
 */
LimitSolution solve_limit(ModelSpec const& spec, TimeGrid const& grid);

/*!
 * Coupled multi-class limit: x_k = sum_l int h_{k,l}(t - s) dm_l(s).
 *
 * With one class the output is bit-identical to solve_limit.
 */
std::vector<LimitSolution>
solve_limit_multiclass(MultiClassSpec const& spec, TimeGrid const& grid);

}  // namespace mfh
