#include "spgarch/diagnostics.hpp"

#include <cmath>
#include <numeric>

#include "spgarch/rng.hpp"
#include "spgarch/simulate.hpp"

namespace spgarch {

double gearys_c(const Vector& x, const WeightMatrix& w) {
    const int n = static_cast<int>(x.size());
    if (n < 3) throw Error("gearys_c: need at least 3 observations");
    if (w.size() != n) throw Error("gearys_c: dimension mismatch");
    if (w.is_zero()) throw EmptyWeights("gearys_c: weight matrix has no entries");
    double mean = x.mean();
    double denom = (x.array() - mean).square().sum();
    if (denom == 0.0) throw ConstantInput("gearys_c: constant input");
    double s0 = 0.0, num = 0.0;
    for (const auto& e : w.entries()) {
        s0 += e.value;
        double d = x[e.row] - x[e.col];
        num += e.value * d * d;
    }
    return (n - 1) * num / (2.0 * s0 * denom);
}

double permutation_pvalue(const Vector& x, const WeightMatrix& w, int n_perm,
                          std::uint64_t seed) {
    if (n_perm < 99) throw Error("permutation_pvalue: n_perm must be >= 99");
    const double observed = std::abs(gearys_c(x, w) - 1.0);
    const int n = static_cast<int>(x.size());
    Philox rng(seed);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Vector shuffled(n);
    int extreme = 0;
    for (int r = 0; r < n_perm; ++r) {
        // Fisher-Yates with Philox uniforms.
        for (int i = n - 1; i > 0; --i) {
            int j = static_cast<int>(uniform01(rng) * (i + 1));
            if (j > i) j = i;
            std::swap(perm[i], perm[j]);
        }
        for (int i = 0; i < n; ++i) shuffled[i] = x[perm[i]];
        if (std::abs(gearys_c(shuffled, w) - 1.0) >= observed) ++extreme;
    }
    return (1.0 + extreme) / (n_perm + 1.0);
}

Vector odd_moment_test(const std::vector<Vector>& fields, int order) {
    if (order % 2 == 0) throw Error("odd_moment_test: order must be odd");
    if (fields.size() < 2) throw Error("odd_moment_test: need at least 2 replications");
    const int n = static_cast<int>(fields.front().size());
    const double m = static_cast<double>(fields.size());
    Vector mean = Vector::Zero(n), sq = Vector::Zero(n);
    for (const auto& f : fields) {
        Vector powered = f.array().pow(order);
        mean += powered;
        sq += powered.cwiseProduct(powered);
    }
    mean /= m;
    Vector var = sq / m - mean.cwiseProduct(mean);
    Vector z(n);
    for (int i = 0; i < n; ++i) {
        double sd = std::sqrt(std::max(var[i], 0.0) / (m - 1.0));
        z[i] = sd > 0.0 ? mean[i] / sd : 0.0;
    }
    return z;
}

}  // namespace spgarch
