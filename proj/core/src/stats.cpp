#include "mfhawkes/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/statistics/anderson_darling.hpp>

namespace mfh
{
double kolmogorov_survival(double x)
{
    if (x < 0.18)
        return 1.0;  // series converges too slowly; Q is 1 to double precision
    double sum = 0, sign = 1;
    for (int j = 1; j <= 200; ++j)
    {
        double const term = std::exp(-2.0 * j * j * x * x);
        sum += sign * term;
        if (term < 1e-17 * sum)
            break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult two_sample_ks(std::span<double const> a, std::span<double const> b)
{
    if (a.size() < 50 || b.size() < 50)
        throw std::invalid_argument("two_sample_ks: both samples need at least 50 "
                                    "values (got "
                                    + std::to_string(a.size()) + " and "
                                    + std::to_string(b.size()) + ")");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double const n = static_cast<double>(x.size());
    double const m = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < x.size() && j < y.size())
    {
        double const v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v)
            ++i;
        while (j < y.size() && y[j] == v)
            ++j;
        d = std::max(d, std::abs(i / n - j / m));
    }
    KsResult r;
    r.statistic = d;
    double const ne = n * m / (n + m);
    double const sq = std::sqrt(ne);
    r.p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
    return r;
}

NormalityResult anderson_darling_normal(std::span<double const> sample, double alpha)
{
    double critical = 0;
    if (alpha == 0.10)
        critical = 0.631;
    else if (alpha == 0.05)
        critical = 0.752;
    else if (alpha == 0.025)
        critical = 0.873;
    else if (alpha == 0.01)
        critical = 1.035;
    else
        throw std::invalid_argument("anderson_darling_normal: unsupported level "
                                    + std::to_string(alpha));
    if (sample.size() < 8)
        throw std::invalid_argument("anderson_darling_normal: need at least 8 values");
    std::vector<double> v(sample.begin(), sample.end());
    std::sort(v.begin(), v.end());
    NormalityResult r;
    r.statistic = boost::math::statistics::anderson_darling_normality_statistic(v);
    double const n = static_cast<double>(v.size());
    r.adjusted = r.statistic * (1 + 0.75 / n + 2.25 / (n * n));
    r.critical = critical;
    r.reject = !(r.adjusted <= critical);
    return r;
}

double mean(std::span<double const> values)
{
    if (values.empty())
        throw std::invalid_argument("mean: empty sample");
    double s = 0;
    for (double v : values)
        s += v;
    return s / static_cast<double>(values.size());
}

double covariance(std::span<double const> a, std::span<double const> b)
{
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("covariance: need two equal samples of size >= 2");
    double const ma = mean(a), mb = mean(b);
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size() - 1);
}

double variance(std::span<double const> values)
{
    return covariance(values, values);
}

double correlation(std::span<double const> a, std::span<double const> b)
{
    double const va = variance(a), vb = variance(b);
    if (va == 0 || vb == 0)
        return 0.0;
    return covariance(a, b) / std::sqrt(va * vb);
}

Summary summarize(std::span<double const> values)
{
    Summary s;
    s.count = values.size();
    if (s.count == 0)
        return s;
    s.mean = mean(values);
    if (s.count > 1)
    {
        s.variance = variance(values);
        s.std_error = std::sqrt(s.variance / static_cast<double>(s.count));
    }
    return s;
}

double quantile(std::vector<double> values, double p)
{
    if (values.empty() || !(p >= 0 && p <= 1))
        throw std::invalid_argument("quantile: empty sample or p outside [0, 1]");
    std::sort(values.begin(), values.end());
    double const pos = p * static_cast<double>(values.size() - 1);
    auto const lo = static_cast<std::size_t>(std::floor(pos));
    auto const hi = std::min(lo + 1, values.size() - 1);
    double const frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

SlopeFit loglog_fit(std::span<double const> x, std::span<double const> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_fit: need at least two (x, y) pairs");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        if (!(x[i] > 0) || !(y[i] > 0))
            throw std::domain_error("loglog_fit: values must be positive");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    double const mx = mean(lx), my = mean(ly);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i)
    {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

}  // namespace mfh
