#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfh
{
struct KsResult
{
    double statistic = 0;
    double p_value = 1;
};

//! Kolmogorov survival function Q(x) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2)
double kolmogorov_survival(double x);

/*!
 * Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
 * Q((sqrt(ne) + 0.12 + 0.11/sqrt(ne)) D), ne = n m / (n + m).
 *
 * Both samples need at least 50 values.
 */
KsResult two_sample_ks(std::span<double const> a, std::span<double const> b);

struct NormalityResult
{
    double statistic = 0;  //!< A^2
    double adjusted = 0;   //!< A^2 (1 + 0.75/n + 2.25/n^2)
    double critical = 0;
    bool reject = false;
};

/*!
 * Anderson-Darling test for normality with mean and variance estimated from
 * the sample. Supported levels: 0.10, 0.05, 0.025, 0.01.
 */
NormalityResult anderson_darling_normal(std::span<double const> sample,
                                        double alpha = 0.01);

struct Summary
{
    std::size_t count = 0;
    double mean = 0;
    double variance = 0;  //!< unbiased
    double std_error = 0; //!< sqrt(variance / count)
};

Summary summarize(std::span<double const> values);

double mean(std::span<double const> values);
double variance(std::span<double const> values);
double covariance(std::span<double const> a, std::span<double const> b);
double correlation(std::span<double const> a, std::span<double const> b);

//! Linear-interpolation quantile of unsorted data, p in [0, 1]
double quantile(std::vector<double> values, double p);

struct SlopeFit
{
    double slope = 0;
    double intercept = 0;
};

//! Least-squares fit of log(y) against log(x); all values must be positive
SlopeFit loglog_fit(std::span<double const> x, std::span<double const> y);

}  // namespace mfh
