#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spgarch/likelihood.hpp"
#include "spgarch/models.hpp"

namespace spgarch {

struct FitOptions {
    bool estimate_theta = false;  // E-GARCH only
    bool estimate_b = false;      // log-GARCH only
    int max_evals = 2000;
    double simplex_tol = 1e-8;
    int n_starts = 4;
};

struct FitResult {
    ParamVector params_hat;
    std::optional<double> extra_hat;  // theta or b when estimated
    /// Standard errors keyed like param_names(); nullopt when the parameter
    /// sits on the boundary or the Hessian is degenerate.
    std::vector<std::optional<double>> std_errors;
    std::vector<std::string> param_names;
    std::vector<bool> on_boundary;
    double loglik = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    Vector residuals;
    bool converged = false;
    int n_evals = 0;
    int n_free_params = 0;
    std::string se_diagnostic;  // non-empty when SEs are absent

    std::string to_json() const;
};

/// Box-constrained ML fit of (rho, lambda, alpha) and optionally theta or b.
/// Derivative-free Nelder-Mead on log-transformed (rho, lambda, alpha) with
/// multi-start; lambda is softly capped below 1/||W2*||_inf.
FitResult fit(const Vector& y, const ModelSpec& spec, const WeightMatrix& w1_star,
              const WeightMatrix& w2_star, const FitOptions& options = {});

/// Hessian-based standard errors at a fit point (central differences,
/// relative step 1e-4, inverse negative Hessian). Boundary parameters get
/// no SE; a non-positive-definite Hessian yields all-absent SEs.
void attach_standard_errors(FitResult& result, const LikelihoodWorkspace& workspace);

/// Generic Nelder-Mead minimizer (exposed for the SAR stage and tests).
struct NelderMeadResult {
    Eigen::VectorXd x;
    double value;
    bool converged;
    int n_evals;
};

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, double initial_step,
                             double diameter_tol, int max_evals);

}  // namespace spgarch
