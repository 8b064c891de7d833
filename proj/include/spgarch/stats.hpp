#pragma once

#include <vector>

namespace spgarch {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile (Acklam's rational approximation polished by
/// one Halley step; absolute error well below 1e-12 on (0, 1)).
double normal_quantile(double p);

/// Two-sided Kolmogorov-Smirnov test of `sample` against U(0,1).
/// Returns the asymptotic p-value.
double ks_uniform_pvalue(std::vector<double> sample);

/// Fixed-order pairwise summation (order-independent of thread scheduling,
/// bitwise reproducible for a given input order).
double pairwise_sum(const std::vector<double>& values);

}  // namespace spgarch
