#pragma once

#include <string>
#include <vector>

#include "spgarch/estimate.hpp"
#include "spgarch/models.hpp"
#include "spgarch/weights.hpp"

namespace spgarch {

/// Gaussian ML fit of the spatial autoregressive mean model
/// y = mu*1 + gamma*W*y + u, sigma^2 profiled out, gamma concentrated via
/// log det(I - gamma W) on a grid with local refinement.
struct SarFit {
    double mu = 0.0;
    double gamma = 0.0;
    double sigma2 = 0.0;
    std::optional<double> se_mu;
    std::optional<double> se_gamma;
    Vector residuals;
    double loglik = 0.0;
    bool near_unit_root = false;
};

SarFit fit_sar(const Vector& y, const WeightMatrix& w);

/// Two-stage pipeline: SAR mean fit, then each requested GARCH variant
/// fitted to the SAR residuals with W1* = W2* = W, plus Geary's C
/// diagnostics on (squared) residuals.
struct PipelineModelReport {
    ModelKind kind;
    FitResult fit;
    double geary_resid = 0.0;
    double geary_resid_p = 0.0;
    double geary_sq_resid = 0.0;
    double geary_sq_resid_p = 0.0;
};

struct PipelineReport {
    SarFit sar;
    double sar_geary_resid = 0.0;
    double sar_geary_sq_resid = 0.0;
    std::vector<PipelineModelReport> models;
    ModelKind best_by_bic;
    std::string error_dist_note;

    std::string to_json() const;
};

PipelineReport pipeline(const Vector& y, const WeightMatrix& w,
                        const std::vector<ModelSpec>& garch_specs,
                        int geary_perms = 999, std::uint64_t seed = 0);

}  // namespace spgarch
