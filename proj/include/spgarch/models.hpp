#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "spgarch/errors.hpp"
#include "spgarch/weights.hpp"

namespace spgarch {

using Vector = Eigen::VectorXd;

enum class ModelKind { spgarch, egarch, loggarch, hgarch };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Error distribution of the innovations. `bound` is only meaningful for
/// the truncated variant (support [-bound, bound]).
struct ErrorDist {
    enum class Kind { standard_normal, truncated_normal } kind = Kind::standard_normal;
    double bound = 0.0;

    static ErrorDist standard_normal() { return {}; }
    static ErrorDist truncated_normal(double bound);

    /// Analytic E|eps|; sqrt(2/pi) for the standard normal, the half-normal
    /// mean restricted to [-bound, bound] for the truncated variant.
    double mean_abs() const;

    /// log density at x (normalized; -inf outside the truncation interval).
    double log_density(double x) const;
};

/// Which GARCH variant plus its shape parameters.
struct ModelSpec {
    ModelKind kind = ModelKind::spgarch;
    double theta = 0.0;  // E-GARCH sign weight
    double zeta = 0.0;   // E-GARCH magnitude weight
    double b = 2.0;      // log-GARCH power, > 0
    ErrorDist error_dist;

    double mean_abs_eps() const { return error_dist.mean_abs(); }
    void validate() const;

    std::string to_json() const;
    static ModelSpec from_json(const std::string& text);
};

/// (rho, lambda, alpha): scales of the weight templates and the constant
/// variance level. rho, lambda >= 0, alpha > 0.
struct ParamVector {
    double rho = 0.0;
    double lambda = 0.0;
    double alpha = 1.0;

    void validate() const;
};

/// Observations at ordered locations, optionally with the latent h and the
/// innovations (populated for simulated data).
struct SpatialField {
    Vector y;
    std::optional<Vector> h;
    std::optional<Vector> eps;
    std::vector<std::string> meta;

    int size() const { return static_cast<int>(y.size()); }
    void validate() const;
};

/// E-GARCH innovation map g(eps) = theta*eps + zeta*(|eps| - E|eps|).
double g_egarch(double eps_i, const ModelSpec& spec);

/// Derivative g'(eps) for the Jacobian; sign convention at 0: sign(0) = 0.
double g_egarch_prime(double eps_i, const ModelSpec& spec);

/// Forward solves: conditional variance field h given innovations, with
/// W1 = rho*W1_star, W2 = lambda*W2_star, alpha constant.
///
/// spGARCH solves (I - W1 diag(eps^2) - W2) h = alpha and requires the
/// result strictly positive; the log-link variants solve for log h and are
/// positive by construction.
Vector solve_h_spgarch(const Vector& eps, const ParamVector& params,
                       const WeightMatrix& w1_star, const WeightMatrix& w2_star);
Vector solve_h_egarch(const Vector& eps, const ParamVector& params,
                      const WeightMatrix& w1_star, const WeightMatrix& w2_star,
                      const ModelSpec& spec);
Vector solve_h_loggarch(const Vector& eps, const ParamVector& params,
                        const WeightMatrix& w1_star, const WeightMatrix& w2_star,
                        const ModelSpec& spec);
Vector solve_h_hgarch(const Vector& eps, const ParamVector& params,
                      const WeightMatrix& w1_star, const WeightMatrix& w2_star);

/// Dispatch over `spec.kind`.
Vector solve_h(const Vector& eps, const ParamVector& params, const WeightMatrix& w1_star,
               const WeightMatrix& w2_star, const ModelSpec& spec);

/// Sparse solve of (I - A) x = rhs with A assembled from scaled templates;
/// throws SingularSystem. Shared by the forward solves and the likelihood.
Vector solve_i_minus(const Eigen::SparseMatrix<double>& a, const Vector& rhs);

/// |eps| below this is treated as an exact zero (log|eps| guard).
inline constexpr double kZeroInnovationTol = 1e-300;

}  // namespace spgarch
