#pragma once

#include <optional>
#include <string>

#include "spgarch/models.hpp"
#include "spgarch/weights.hpp"

namespace spgarch {

/// Residuals and latent variances recovered from observations.
struct Recovered {
    Vector eps;
    Vector h;
};

/// Inverse map xi: recovers (eps, h) from y under the given model and
/// parameters so that y = sqrt(h) .* eps and the model equation holds.
///
/// E-GARCH uses a forward recursion when the weights share a triangular
/// order and a damped fixed-point iteration otherwise.
Recovered recover_residuals(const Vector& y, const ParamVector& params,
                            const WeightMatrix& w1_star, const WeightMatrix& w2_star,
                            const ModelSpec& spec);

/// log|det J| of the change of variables eps -> y, assembled from the
/// model-specific dh/deps and the diagonal sqrt(h) term (dense LU).
double jacobian_logdet(const Vector& eps, const Vector& h, const ParamVector& params,
                       const WeightMatrix& w1_star, const WeightMatrix& w2_star,
                       const ModelSpec& spec);

/// Dense Jacobian matrix J_ij = d y_i / d eps_j (exposed for testing).
Eigen::MatrixXd jacobian_matrix(const Vector& eps, const Vector& h, const ParamVector& params,
                                const WeightMatrix& w1_star, const WeightMatrix& w2_star,
                                const ModelSpec& spec);

struct LogLikResult {
    double value;
    std::string diagnostic;  // empty on success

    bool ok() const { return diagnostic.empty(); }
};

/// Log-likelihood of y: sum_i log f_eps(eps_i) - log|det J|. Returns -inf
/// with a diagnostic instead of throwing when recovery or the Jacobian
/// fails, so optimizers can traverse infeasible regions.
LogLikResult log_likelihood_checked(const Vector& y, const ParamVector& params,
                                    const WeightMatrix& w1_star, const WeightMatrix& w2_star,
                                    const ModelSpec& spec);

double log_likelihood(const Vector& y, const ParamVector& params, const WeightMatrix& w1_star,
                      const WeightMatrix& w2_star, const ModelSpec& spec);

/// Per-dataset evaluation cache: precomputed sparse templates, row
/// adjacency, and the joint triangular order (fast log-det path). One
/// instance per concurrent evaluation thread.
class LikelihoodWorkspace {
public:
    LikelihoodWorkspace(const Vector& y, WeightMatrix w1_star, WeightMatrix w2_star,
                        ModelSpec spec);

    LogLikResult evaluate(const ParamVector& params) const;
    Recovered recover(const ParamVector& params) const;
    bool triangular() const { return joint_order_.has_value(); }

    const Vector& y() const { return y_; }
    const ModelSpec& spec() const { return spec_; }
    const WeightMatrix& w1_star() const { return w1_star_; }
    const WeightMatrix& w2_star() const { return w2_star_; }

private:
    Vector y_;
    WeightMatrix w1_star_;
    WeightMatrix w2_star_;
    ModelSpec spec_;
    std::optional<std::vector<int>> joint_order_;
};

}  // namespace spgarch
