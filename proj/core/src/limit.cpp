#include "mfhawkes/limit.hpp"

#include <stdexcept>

namespace mfh
{
std::vector<LimitSolution>
solve_limit_multiclass(MultiClassSpec const& spec, TimeGrid const& grid)
{
    spec.validate();
    std::size_t const K = spec.classes();
    std::size_t const n = grid.steps();
    double const dt = grid.dt();

    // Kernel values on lags: table[k*K + l][d] = h_{k,l}(t_d)
    std::vector<std::vector<double>> lag(K * K);
    for (std::size_t kl = 0; kl < K * K; ++kl)
    {
        if (spec.kernels[kl].kind == KernelKind::zero)
            continue;
        lag[kl].resize(n + 1);
        for (std::size_t d = 0; d <= n; ++d)
            lag[kl][d] = spec.kernels[kl].h(grid.time(d));
    }

    std::vector<LimitSolution> out(K);
    for (std::size_t k = 0; k < K; ++k)
    {
        out[k].grid = grid;
        out[k].m = GridFunction(grid);
        out[k].lambda = GridFunction(grid);
        out[k].x = GridFunction(grid);
        out[k].lambda[0] = spec.rates[k].f(0.0);
    }

    for (std::size_t i = 1; i <= n; ++i)
    {
        for (std::size_t k = 0; k < K; ++k)
        {
            double x = 0;
            for (std::size_t l = 0; l < K; ++l)
            {
                auto const& hv = lag[k * K + l];
                if (hv.empty())
                    continue;
                auto const& lam = out[l].lambda.values;
                double conv = 0.5 * hv[i] * lam[0];
                for (std::size_t j = 1; j < i; ++j)
                    conv += hv[i - j] * lam[j];
                x += dt * conv;
            }
            out[k].x[i] = x;
        }
        for (std::size_t k = 0; k < K; ++k)
        {
            auto& sol = out[k];
            sol.lambda[i] = spec.rates[k].f(sol.x[i]);
            if (!(sol.lambda[i] >= 0))
                throw std::domain_error("limit solver: negative rate f(x)");
            sol.m[i] = sol.m[i - 1] + 0.5 * dt * (sol.lambda[i - 1] + sol.lambda[i]);
        }
    }
    return out;
}

LimitSolution solve_limit(ModelSpec const& spec, TimeGrid const& grid)
{
    if (spec.kernel.h(0.0) != 0.0)
        throw std::invalid_argument("solve_limit: kernel must satisfy h(0) = 0");
    auto sols = solve_limit_multiclass(MultiClassSpec::from_scalar(spec), grid);
    return std::move(sols.front());
}

}  // namespace mfh
