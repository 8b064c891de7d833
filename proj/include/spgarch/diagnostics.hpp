#pragma once

#include <cstdint>
#include <vector>

#include "spgarch/models.hpp"
#include "spgarch/weights.hpp"

namespace spgarch {

/// Geary's C: (n-1) sum_ij w_ij (x_i - x_j)^2 / (2 S0 sum_i (x_i - xbar)^2),
/// S0 = sum_ij w_ij. Values near 1 indicate no spatial association.
double gearys_c(const Vector& x, const WeightMatrix& w);

/// Two-sided Monte Carlo permutation test of C against the no-association
/// null: p = (1 + #{permuted |C-1| >= observed |C-1|}) / (n_perm + 1).
double permutation_pvalue(const Vector& x, const WeightMatrix& w, int n_perm,
                          std::uint64_t seed);

/// Per-site z-scores of the mean of Y^order across replicated simulations
/// (order must be odd; sign-symmetric innovations and an even h(eps) make
/// the population value zero).
Vector odd_moment_test(const std::vector<Vector>& fields, int order);

}  // namespace spgarch
