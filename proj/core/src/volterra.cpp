#include "mfhawkes/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mfhawkes/parallel.hpp"

namespace mfh
{
//---------------------------------------------------------------------------//
// TriangularTable
//---------------------------------------------------------------------------//
TriangularTable::TriangularTable(std::size_t n_points, std::size_t dim)
    : points_(n_points), dim_(dim)
{
    if (dim == 0)
        throw std::invalid_argument("triangular table needs dim >= 1");
    if (n_points > kMaxSteps + 1)
        throw std::invalid_argument("triangular table exceeds the grid limit of "
                                    + std::to_string(kMaxSteps) + " steps");
    data_.assign(n_points * (n_points + 1) / 2 * dim * dim, 0.0);
}

double TriangularTable::max_abs() const
{
    double result = 0;
    for (double v : data_)
        result = std::max(result, std::fabs(v));
    return result;
}

double max_abs_difference(TriangularTable const& a, TriangularTable const& b)
{
    if (a.points() != b.points() || a.dim() != b.dim())
        throw std::invalid_argument("table shape mismatch");
    double result = 0;
    std::size_t const bs = a.dim() * a.dim();
    for (std::size_t i = 0; i < a.points(); ++i)
    {
        double const* ra = a.row(i);
        double const* rb = b.row(i);
        for (std::size_t e = 0; e < (i + 1) * bs; ++e)
            result = std::max(result, std::fabs(ra[e] - rb[e]));
    }
    return result;
}

//---------------------------------------------------------------------------//
// Kernel tables
//---------------------------------------------------------------------------//
std::string_view to_string(ResolventMethod m)
{
    return m == ResolventMethod::neumann ? "neumann" : "integral_equation";
}

ResolventMethod parse_resolvent_method(std::string_view name)
{
    if (name == "neumann")
        return ResolventMethod::neumann;
    if (name == "integral_equation" || name == "ieq")
        return ResolventMethod::integral_equation;
    throw std::invalid_argument("unknown resolvent method '" + std::string(name)
                                + "'");
}

double ResolventTable::a_priori_bound() const
{
    return kappa_bound * std::exp(kappa_bound * grid.horizon());
}

KernelTable KernelTable::from_function(
    TimeGrid const& grid, std::function<double(double, double)> const& k)
{
    KernelTable table;
    table.grid = grid;
    table.kappa = TriangularTable(grid.size(), 1);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j)
            table.kappa(i, j) = k(grid.time(i), grid.time(j));
    table.bound = table.kappa.max_abs();
    return table;
}

double kappa_bound(ModelSpec const& spec, double horizon)
{
    return spec.sup_f_prime() * spec.kernel.norms(horizon).l1_h_prime;
}

KernelTable build_kappa_multiclass(std::vector<LimitSolution> const& limits,
                                   MultiClassSpec const& spec,
                                   TimeGrid const& grid)
{
    std::size_t const K = spec.classes();
    if (limits.size() != K)
        throw std::invalid_argument("build_kappa: one limit per class required");
    for (auto const& lim : limits)
        require_same_grid(lim.grid, grid, "build_kappa");

    std::size_t const n = grid.steps();
    double const half_dt = 0.5 * grid.dt();
    KernelTable table;
    table.grid = grid;
    table.kappa = TriangularTable(grid.size(), K);

    std::vector<double> fp(n + 1), hp(n + 1);
    double bound = 0;
    for (std::size_t k = 0; k < K; ++k)
    {
        for (std::size_t u = 0; u <= n; ++u)
            fp[u] = spec.rates[k].f_prime(limits[k].x[u]);
        double row_bound = 0;
        for (std::size_t l = 0; l < K; ++l)
        {
            auto const& kernel = spec.kernel(k, l);
            double const weight
                = std::sqrt(spec.proportions[k] / spec.proportions[l]);
            row_bound += weight * spec.rates[k].sup_f_prime
                         * kernel.norms(grid.horizon()).l1_h_prime;
            if (kernel.kind == KernelKind::zero)
                continue;
            for (std::size_t d = 0; d <= n; ++d)
                hp[d] = kernel.h_prime(grid.time(d));
            for (std::size_t j = 0; j <= n; ++j)
            {
                double acc = 0;
                for (std::size_t i = j + 1; i <= n; ++i)
                {
                    acc += half_dt
                           * (fp[i - 1] * hp[i - 1 - j] + fp[i] * hp[i - j]);
                    table.kappa.at(i, j, k, l) = weight * acc;
                }
            }
        }
        bound = std::max(bound, row_bound);
    }
    table.bound = bound;
    return table;
}

KernelTable build_kappa(LimitSolution const& limit,
                        ModelSpec const& spec,
                        TimeGrid const& grid)
{
    return build_kappa_multiclass(
        {limit}, MultiClassSpec::from_scalar(spec), grid);
}

//---------------------------------------------------------------------------//
// Resolvent construction
//---------------------------------------------------------------------------//
double neumann_tail_bound(double M, double T, std::size_t order)
{
    if (M <= 0)
        return 0.0;
    double const logM = std::log(M);
    double const logT = T > 0 ? std::log(T) : -INFINITY;
    double sum = 0;
    for (std::size_t m = order + 1;; ++m)
    {
        double const md = static_cast<double>(m);
        double const term = std::exp(md * logM + (md - 1) * logT - std::lgamma(md));
        sum += term;
        if (md > 2 * M * T + 2 && term <= 1e-17 * sum)
            break;
        if (m > order + 100000)
            break;
    }
    return sum;
}

namespace
{
// Small dense solve (I - a) x = b for dim x dim block a, in place on b
void solve_block(std::size_t d, double const* a, double scale, double* b)
{
    if (d == 1)
    {
        b[0] /= (1.0 - scale * a[0]);
        return;
    }
    std::vector<double> m(d * d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c)
            m[r * d + c] = (r == c ? 1.0 : 0.0) - scale * a[r * d + c];
    for (std::size_t p = 0; p < d; ++p)
    {
        std::size_t piv = p;
        for (std::size_t r = p + 1; r < d; ++r)
            if (std::fabs(m[r * d + p]) > std::fabs(m[piv * d + p]))
                piv = r;
        if (piv != p)
        {
            for (std::size_t c = 0; c < d; ++c)
                std::swap(m[p * d + c], m[piv * d + c]);
            for (std::size_t c = 0; c < d; ++c)
                std::swap(b[p * d + c], b[piv * d + c]);
        }
        for (std::size_t r = p + 1; r < d; ++r)
        {
            double const f = m[r * d + p] / m[p * d + p];
            for (std::size_t c = p; c < d; ++c)
                m[r * d + c] -= f * m[p * d + c];
            for (std::size_t c = 0; c < d; ++c)
                b[r * d + c] -= f * b[p * d + c];
        }
    }
    for (std::size_t p = d; p-- > 0;)
    {
        for (std::size_t c = 0; c < d; ++c)
        {
            double v = b[p * d + c];
            for (std::size_t q = p + 1; q < d; ++q)
                v -= m[p * d + q] * b[q * d + c];
            b[p * d + c] = v / m[p * d + p];
        }
    }
}

bool has_nonzero_diagonal(TriangularTable const& t)
{
    std::size_t const bs = t.dim() * t.dim();
    for (std::size_t i = 0; i < t.points(); ++i)
    {
        double const* blk = t.row(i) + i * bs;
        for (std::size_t e = 0; e < bs; ++e)
            if (blk[e] != 0.0)
                return true;
    }
    return false;
}

// out += s * a * b for dim x dim blocks
inline void gemm_acc(std::size_t d, double s, double const* a, double const* b,
                     double* out)
{
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t m = 0; m < d; ++m)
        {
            double const arm = s * a[r * d + m];
            for (std::size_t c = 0; c < d; ++c)
                out[r * d + c] += arm * b[m * d + c];
        }
}

// Scalar Neumann step for rows [i0, i1). Rows in a block share each pass over
// cur, which is what bounds the cost at large n.
void compose_scalar_rows(TriangularTable const& kappa, TriangularTable const& cur,
                         double dt, TriangularTable& next, std::size_t i0,
                         std::size_t i1)
{
    for (std::size_t i = i0; i < i1; ++i)
        std::fill(next.row(i), next.row(i) + i + 1, 0.0);
    // four l at a time; each out[j] still sums its terms in increasing l
    for (std::size_t l0 = 1; l0 + 1 < i1; l0 += 4)
    {
        double const* c0 = cur.row(l0);
        for (std::size_t i = std::max(i0, l0 + 1); i < i1; ++i)
        {
            double const* krow = kappa.row(i);
            double* out = next.row(i);
            std::size_t const lend = std::min(l0 + 4, i);
            if (lend - l0 < 4)
            {
                for (std::size_t l = l0; l < lend; ++l)
                {
                    double const a = krow[l];
                    double const* crow = cur.row(l);
                    for (std::size_t j = 0; j < l; ++j)
                        out[j] += a * crow[j];
                }
                continue;
            }
            double const a0 = krow[l0], a1 = krow[l0 + 1], a2 = krow[l0 + 2],
                         a3 = krow[l0 + 3];
            double const* c1 = cur.row(l0 + 1);
            double const* c2 = cur.row(l0 + 2);
            double const* c3 = cur.row(l0 + 3);
            for (std::size_t j = 0; j < l0; ++j)
                out[j] = out[j] + a0 * c0[j] + a1 * c1[j] + a2 * c2[j] + a3 * c3[j];
            for (std::size_t j = l0; j < l0 + 3; ++j)
                for (std::size_t l = j + 1; l < l0 + 4; ++l)
                    out[j] += krow[l] * cur.row(l)[j];
        }
    }
    for (std::size_t i = std::max<std::size_t>(i0, 1); i < i1; ++i)
    {
        double const* krow = kappa.row(i);
        double* out = next.row(i);
        double const kii = krow[i];
        double const* crow_i = cur.row(i);
        for (std::size_t j = 0; j < i; ++j)
        {
            double s = out[j] + 0.5 * krow[j] * cur(j, j) + 0.5 * kii * crow_i[j];
            out[j] = dt * s;
        }
    }
}

// One Neumann step: next(t_i, t_j) = int_{t_j}^{t_i} kappa(t_i, u) cur(u, t_j)
void compose(TriangularTable const& kappa, TriangularTable const& cur,
             double dt, TriangularTable& next, unsigned threads)
{
    std::size_t const n = kappa.points();
    std::size_t const d = kappa.dim();
    std::size_t const bs = d * d;
    if (d == 1)
    {
        constexpr std::size_t block = 16;
        std::size_t const blocks = (n + block - 1) / block;
        parallel_for(blocks, threads, [&](std::size_t b) {
            compose_scalar_rows(kappa, cur, dt, next, b * block,
                                std::min(n, (b + 1) * block));
        });
        return;
    }
    parallel_for(n, threads, [&](std::size_t i) {
        double* out = next.row(i);
        std::fill(out, out + (i + 1) * bs, 0.0);
        if (i == 0)
            return;
        double const* krow = kappa.row(i);
        for (std::size_t l = 1; l < i; ++l)
        {
            double const* a = krow + l * bs;
            double const* crow = cur.row(l);
            for (std::size_t j = 0; j < l; ++j)
                gemm_acc(d, 1.0, a, crow + j * bs, out + j * bs);
        }
        double const* kii = krow + i * bs;
        double const* crow_i = cur.row(i);
        for (std::size_t j = 0; j < i; ++j)
        {
            gemm_acc(d, 0.5, krow + j * bs, cur.row(j) + j * bs, out + j * bs);
            gemm_acc(d, 0.5, kii, crow_i + j * bs, out + j * bs);
            for (std::size_t e = 0; e < bs; ++e)
                out[j * bs + e] *= dt;
        }
    });
}
}  // namespace

ResolventTable
build_resolvent_neumann(KernelTable const& kappa, double tol, unsigned threads)
{
    if (!(tol > 0))
        throw std::invalid_argument("neumann resolvent: tolerance must be > 0");
    double const M = kappa.bound;
    double const T = kappa.grid.horizon();

    std::size_t order = 1;
    double tail = neumann_tail_bound(M, T, order);
    while (tail >= tol)
    {
        if (order >= kMaxNeumannOrder)
            throw std::runtime_error(
                "neumann resolvent: tolerance " + std::to_string(tol)
                + " needs more than " + std::to_string(kMaxNeumannOrder)
                + " terms; achievable tail bound at the cap is "
                + std::to_string(tail));
        ++order;
        tail = neumann_tail_bound(M, T, order);
    }

    ResolventTable out;
    out.grid = kappa.grid;
    out.method = ResolventMethod::neumann;
    out.kappa_bound = M;
    out.truncation_order = order;
    out.tail_bound = tail;
    out.K = kappa.kappa;

    TriangularTable cur = kappa.kappa;
    TriangularTable next(cur.points(), cur.dim());
    std::size_t const bs = cur.dim() * cur.dim();
    for (std::size_t term = 2; term <= order; ++term)
    {
        compose(kappa.kappa, cur, kappa.grid.dt(), next, threads);
        std::swap(cur, next);
        for (std::size_t i = 0; i < cur.points(); ++i)
        {
            double* dst = out.K.row(i);
            double const* src = cur.row(i);
            for (std::size_t e = 0; e < (i + 1) * bs; ++e)
                dst[e] += src[e];
        }
    }
    return out;
}

ResolventTable build_resolvent_ieq(KernelTable const& kappa, unsigned threads)
{
    auto const& kt = kappa.kappa;
    std::size_t const n_pts = kt.points();
    std::size_t const d = kt.dim();
    std::size_t const bs = d * d;
    double const dt = kappa.grid.dt();

    ResolventTable out;
    out.grid = kappa.grid;
    out.method = ResolventMethod::integral_equation;
    out.kappa_bound = kappa.bound;
    out.K = TriangularTable(n_pts, d);
    auto& K = out.K;

    bool const implicit = has_nonzero_diagonal(kt);
    constexpr std::size_t block = 64;
    std::size_t const n_blocks = (n_pts + block - 1) / block;

    parallel_for(n_blocks, threads, [&](std::size_t b) {
        std::size_t const j0 = b * block;
        std::size_t const j1 = std::min(n_pts, j0 + block);
        std::vector<double> acc(block * bs);
        for (std::size_t j = j0; j < j1; ++j)
            for (std::size_t e = 0; e < bs; ++e)
                K.row(j)[j * bs + e] = kt.row(j)[j * bs + e];

        for (std::size_t i = j0 + 1; i < n_pts; ++i)
        {
            std::size_t const jmax = std::min(j1, i);
            std::fill(acc.begin(), acc.end(), 0.0);
            double const* krow = kt.row(i);
            if (d == 1)
            {
                for (std::size_t l = j0 + 1; l < i; ++l)
                {
                    double const a = krow[l];
                    double const* Krow = K.row(l);
                    std::size_t const jl = std::min(jmax, l);
                    for (std::size_t j = j0; j < jl; ++j)
                        acc[j - j0] += a * Krow[j];
                }
                double const denom = implicit ? 1.0 - 0.5 * dt * krow[i] : 1.0;
                double* Kout = K.row(i);
                for (std::size_t j = j0; j < jmax; ++j)
                {
                    double const s = acc[j - j0] + 0.5 * krow[j] * K(j, j);
                    Kout[j] = (krow[j] + dt * s) / denom;
                }
                continue;
            }
            for (std::size_t l = j0 + 1; l < i; ++l)
            {
                double const* a = krow + l * bs;
                double const* Krow = K.row(l);
                std::size_t const jl = std::min(jmax, l);
                for (std::size_t j = j0; j < jl; ++j)
                    gemm_acc(d, 1.0, a, Krow + j * bs, acc.data() + (j - j0) * bs);
            }
            double* Kout = K.row(i);
            for (std::size_t j = j0; j < jmax; ++j)
            {
                double* s = acc.data() + (j - j0) * bs;
                gemm_acc(d, 0.5, krow + j * bs, K.row(j) + j * bs, s);
                double* dst = Kout + j * bs;
                for (std::size_t e = 0; e < bs; ++e)
                    dst[e] = krow[j * bs + e] + dt * s[e];
                if (implicit)
                    solve_block(d, krow + i * bs, 0.5 * dt, dst);
            }
        }
    });
    return out;
}

double resolvent_identity_residual(KernelTable const& kappa,
                                   ResolventTable const& resolvent)
{
    auto const& kt = kappa.kappa;
    auto const& K = resolvent.K;
    std::size_t const n = kt.points();
    std::size_t const d = kt.dim();
    std::size_t const bs = d * d;
    double const dt = kappa.grid.dt();
    double worst = 0;
    std::vector<double> acc(bs);
    for (std::size_t i = 1; i < n; ++i)
    {
        for (std::size_t j = 0; j < i; ++j)
        {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t l = j; l <= i; ++l)
            {
                double const w = (l == j || l == i) ? 0.5 : 1.0;
                gemm_acc(d, w, kt.row(i) + l * bs, K.row(l) + j * bs, acc.data());
            }
            for (std::size_t e = 0; e < bs; ++e)
            {
                double const r = K.row(i)[j * bs + e] - kt.row(i)[j * bs + e]
                                 - dt * acc[e];
                worst = std::max(worst, std::fabs(r));
            }
        }
    }
    return worst;
}

double resolvent_lipschitz_constant(ModelSpec const& spec, double horizon)
{
    auto const norms = spec.kernel.norms(horizon);
    double const M = spec.sup_f_prime() * norms.l1_h_prime;
    double const L = spec.sup_f_prime() * norms.sup_h_prime;
    double const Kb = M * std::exp(M * horizon);
    return L + Kb * (L * horizon + M);
}

//---------------------------------------------------------------------------//
// Operators
//---------------------------------------------------------------------------//
std::vector<GridFunction> apply_phi(ResolventTable const& resolvent,
                                    std::vector<GridFunction> const& F)
{
    std::size_t const d = resolvent.dim();
    if (F.size() != d)
        throw std::invalid_argument("apply_phi: one input per class required");
    for (auto const& f : F)
        require_same_grid(f.grid, resolvent.grid, "apply_phi");
    std::size_t const bs = d * d;
    double const dt = resolvent.grid.dt();
    std::size_t const n = resolvent.grid.size();

    std::vector<GridFunction> G = F;
    for (std::size_t i = 1; i < n; ++i)
    {
        double const* Krow = resolvent.K.row(i);
        for (std::size_t k = 0; k < d; ++k)
        {
            double acc = 0;
            for (std::size_t j = 0; j <= i; ++j)
            {
                double s = 0;
                for (std::size_t l = 0; l < d; ++l)
                    s += Krow[j * bs + k * d + l] * F[l][j];
                acc += (j == 0 || j == i) ? 0.5 * s : s;
            }
            G[k][i] = F[k][i] + dt * acc;
        }
    }
    return G;
}

GridFunction apply_phi(ResolventTable const& resolvent, GridFunction const& F)
{
    if (resolvent.dim() != 1)
        throw std::invalid_argument("apply_phi: scalar input for matrix resolvent");
    return std::move(apply_phi(resolvent, std::vector<GridFunction>{F}).front());
}

std::vector<GridFunction> solve_second_kind(KernelTable const& kappa,
                                            std::vector<GridFunction> const& F)
{
    std::size_t const d = kappa.dim();
    if (F.size() != d)
        throw std::invalid_argument("solve_second_kind: one input per class");
    for (auto const& f : F)
        require_same_grid(f.grid, kappa.grid, "solve_second_kind");
    std::size_t const bs = d * d;
    double const dt = kappa.grid.dt();
    std::size_t const n = kappa.grid.size();
    bool const implicit = has_nonzero_diagonal(kappa.kappa);

    std::vector<GridFunction> G = F;
    std::vector<double> rhs(d);
    for (std::size_t i = 1; i < n; ++i)
    {
        double const* krow = kappa.kappa.row(i);
        for (std::size_t k = 0; k < d; ++k)
        {
            double acc = 0;
            for (std::size_t j = 0; j < i; ++j)
            {
                double s = 0;
                for (std::size_t l = 0; l < d; ++l)
                    s += krow[j * bs + k * d + l] * G[l][j];
                acc += (j == 0) ? 0.5 * s : s;
            }
            rhs[k] = F[k][i] + dt * acc;
        }
        if (implicit)
        {
            // (I - dt/2 kappa_ii) G_i = rhs
            std::vector<double> sys(bs), b(bs, 0.0);
            for (std::size_t k = 0; k < d; ++k)
                b[k * d] = rhs[k];
            // Solve column 0 of a block system; other columns stay zero
            solve_block(d, krow + i * bs, 0.5 * dt, b.data());
            for (std::size_t k = 0; k < d; ++k)
                rhs[k] = b[k * d];
        }
        for (std::size_t k = 0; k < d; ++k)
            G[k][i] = rhs[k];
    }
    return G;
}

GridFunction solve_second_kind(KernelTable const& kappa, GridFunction const& F)
{
    if (kappa.dim() != 1)
        throw std::invalid_argument("solve_second_kind: scalar input, matrix kernel");
    return std::move(solve_second_kind(kappa, std::vector<GridFunction>{F}).front());
}

GridFunction second_kind_residual(KernelTable const& kappa,
                                  GridFunction const& F,
                                  GridFunction const& G)
{
    if (kappa.dim() != 1)
        throw std::invalid_argument("second_kind_residual: scalar kernels only");
    require_same_grid(F.grid, kappa.grid, "second_kind_residual");
    require_same_grid(G.grid, kappa.grid, "second_kind_residual");
    GridFunction R(kappa.grid);
    double const dt = kappa.grid.dt();
    R[0] = G[0] - F[0];
    for (std::size_t i = 1; i < R.size(); ++i)
    {
        double acc = 0;
        for (std::size_t j = 0; j <= i; ++j)
        {
            double const s = kappa.kappa(i, j) * G[j];
            acc += (j == 0 || j == i) ? 0.5 * s : s;
        }
        R[i] = G[i] - F[i] - dt * acc;
    }
    return R;
}

GridFunction apply_psi(MemoryKernel const& kernel, GridFunction const& F)
{
    auto const& grid = F.grid;
    std::size_t const n = grid.size();
    GridFunction out(grid);
    if (kernel.kind == KernelKind::zero)
        return out;
    std::vector<double> hp(n);
    for (std::size_t d = 0; d < n; ++d)
        hp[d] = kernel.h_prime(grid.time(d));
    double const dt = grid.dt();
    for (std::size_t i = 1; i < n; ++i)
    {
        double acc = 0.5 * (F[0] * hp[i] + F[i] * hp[0]);
        for (std::size_t j = 1; j < i; ++j)
            acc += F[j] * hp[i - j];
        out[i] = dt * acc;
    }
    return out;
}

GridFunction apply_psi(ModelSpec const& spec, GridFunction const& F)
{
    return apply_psi(spec.kernel, F);
}

GridFunction apply_xi(LimitSolution const& limit,
                      RateFunction const& rate,
                      GridFunction const& F)
{
    require_same_grid(limit.grid, F.grid, "apply_xi");
    GridFunction out(F.grid);
    for (std::size_t k = 0; k < F.size(); ++k)
        out[k] = rate.f_prime(limit.x[k]) * F[k];
    return out;
}

GridFunction apply_xi(LimitSolution const& limit,
                      ModelSpec const& spec,
                      GridFunction const& F)
{
    return apply_xi(limit, spec.rate, F);
}

GridFunction convolve_increments(MemoryKernel const& kernel, GridFunction const& F)
{
    auto const& grid = F.grid;
    std::size_t const n = grid.size();
    GridFunction out(grid);
    std::vector<double> hv(n);
    for (std::size_t d = 0; d < n; ++d)
        hv[d] = kernel.h(grid.time(d));
    for (std::size_t i = 1; i < n; ++i)
    {
        double acc = 0;
        for (std::size_t j = 0; j < i; ++j)
            acc += hv[i - j] * (F[j + 1] - F[j]);
        out[i] = acc;
    }
    return out;
}

}  // namespace mfh
