#include "spgarch/sar.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "spgarch/diagnostics.hpp"

namespace spgarch {

namespace {

double sar_logdet(const Eigen::SparseMatrix<double>& w, double gamma) {
    Eigen::SparseMatrix<double> sys(w.rows(), w.cols());
    sys.setIdentity();
    sys -= gamma * w;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(sys);
    if (lu.info() != Eigen::Success) throw SingularSystem("I - gamma*W singular");
    return lu.logAbsDeterminant();
}

struct SarProfile {
    const Vector& y;
    const Eigen::SparseMatrix<double>& w;

    double mu = 0.0;
    double sigma2 = 0.0;

    /// Profile log-likelihood over gamma with mu, sigma^2 concentrated out.
    double operator()(double gamma) {
        const double n = static_cast<double>(y.size());
        Vector z = y - gamma * (w * y);
        mu = z.mean();
        sigma2 = (z.array() - mu).square().sum() / n;
        if (sigma2 <= 0.0) return -std::numeric_limits<double>::infinity();
        return sar_logdet(w, gamma) -
               0.5 * n * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
    }
};

double full_sar_loglik(const Vector& y, const Eigen::SparseMatrix<double>& w, double mu,
                       double gamma, double sigma2) {
    if (sigma2 <= 0.0) return -std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(y.size());
    Vector u = y - gamma * (w * y) - Vector::Constant(y.size(), mu);
    return sar_logdet(w, gamma) - 0.5 * n * std::log(2.0 * std::numbers::pi * sigma2) -
           u.squaredNorm() / (2.0 * sigma2);
}

}  // namespace

SarFit fit_sar(const Vector& y, const WeightMatrix& w) {
    const int n = static_cast<int>(y.size());
    if (n < 10) throw OptimFailed("fit_sar: need at least 10 observations");
    if (w.size() != n) throw OptimFailed("fit_sar: dimension mismatch");

    SarFit result;
    Eigen::SparseMatrix<double> ws = w.to_eigen();
    SarProfile profile{y, ws};

    if (w.is_zero()) {
        result.gamma = 0.0;
        result.loglik = profile(0.0);
    } else {
        // Coarse grid, then golden-section refinement around the best point.
        const double lo = -0.999, hi = 0.999;
        const int grid_points = 201;
        int best_idx = 0;
        double best_val = -std::numeric_limits<double>::infinity();
        std::vector<double> gammas(grid_points), values(grid_points);
        for (int i = 0; i < grid_points; ++i) {
            gammas[i] = lo + (hi - lo) * i / (grid_points - 1);
            values[i] = profile(gammas[i]);
            if (values[i] > best_val) {
                best_val = values[i];
                best_idx = i;
            }
        }
        double a = gammas[std::max(best_idx - 1, 0)];
        double b = gammas[std::min(best_idx + 1, grid_points - 1)];
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = profile(x1), f2 = profile(x2);
        while (b - a > 1e-10) {
            if (f1 > f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = profile(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = profile(x2);
            }
        }
        result.gamma = 0.5 * (a + b);
        result.loglik = profile(result.gamma);
    }
    result.mu = profile.mu;
    result.sigma2 = profile.sigma2;
    result.residuals =
        y - result.gamma * (ws * y) - Vector::Constant(n, result.mu);
    result.near_unit_root = result.gamma > 0.99;

    // Standard errors from the inverse negative Hessian in (mu, gamma, sigma2).
    Eigen::Vector3d p(result.mu, result.gamma, result.sigma2);
    Eigen::Vector3d step;
    for (int i = 0; i < 3; ++i) step[i] = 1e-4 * std::max(std::abs(p[i]), 1.0);
    auto ll = [&](const Eigen::Vector3d& q) {
        return full_sar_loglik(y, ws, q[0], q[1], q[2]);
    };
    Eigen::Matrix3d hess;
    double f0 = ll(p);
    for (int i = 0; i < 3; ++i) {
        Eigen::Vector3d ei = Eigen::Vector3d::Zero();
        ei[i] = step[i];
        hess(i, i) = (ll(p + ei) - 2.0 * f0 + ll(p - ei)) / (step[i] * step[i]);
        for (int j = i + 1; j < 3; ++j) {
            Eigen::Vector3d ej = Eigen::Vector3d::Zero();
            ej[j] = step[j];
            hess(i, j) = hess(j, i) = (ll(p + ei + ej) - ll(p + ei - ej) - ll(p - ei + ej) +
                                       ll(p - ei - ej)) /
                                      (4.0 * step[i] * step[j]);
        }
    }
    Eigen::LLT<Eigen::Matrix3d> llt(-hess);
    if (hess.allFinite() && llt.info() == Eigen::Success) {
        Eigen::Matrix3d cov = llt.solve(Eigen::Matrix3d::Identity());
        if (cov(0, 0) > 0.0) result.se_mu = std::sqrt(cov(0, 0));
        if (cov(1, 1) > 0.0) result.se_gamma = std::sqrt(cov(1, 1));
    }
    return result;
}

PipelineReport pipeline(const Vector& y, const WeightMatrix& w,
                        const std::vector<ModelSpec>& garch_specs, int geary_perms,
                        std::uint64_t seed) {
    PipelineReport report;
    report.sar = fit_sar(y, w);
    const Vector& u = report.sar.residuals;
    report.sar_geary_resid = gearys_c(u, w);
    report.sar_geary_sq_resid = gearys_c(u.cwiseProduct(u), w);
    report.error_dist_note = "standard normal innovations assumed for all residual fits";

    double best_bic = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < garch_specs.size(); ++k) {
        PipelineModelReport mr;
        mr.kind = garch_specs[k].kind;
        mr.fit = fit(u, garch_specs[k], w, w);
        if (mr.fit.residuals.size() == u.size()) {
            const Vector& eps = mr.fit.residuals;
            mr.geary_resid = gearys_c(eps, w);
            mr.geary_resid_p = permutation_pvalue(eps, w, geary_perms, seed + 2 * k);
            Vector eps2 = eps.cwiseProduct(eps);
            mr.geary_sq_resid = gearys_c(eps2, w);
            mr.geary_sq_resid_p = permutation_pvalue(eps2, w, geary_perms, seed + 2 * k + 1);
        }
        if (mr.fit.bic < best_bic) {
            best_bic = mr.fit.bic;
            report.best_by_bic = mr.kind;
        }
        report.models.push_back(std::move(mr));
    }
    if (report.models.empty()) throw OptimFailed("pipeline: no GARCH specs given");
    return report;
}

std::string PipelineReport::to_json() const {
    nlohmann::json j;
    j["mean_equation"] = {
        {"mu", sar.mu},
        {"mu_se", sar.se_mu ? nlohmann::json(*sar.se_mu) : nlohmann::json(nullptr)},
        {"gamma", sar.gamma},
        {"gamma_se", sar.se_gamma ? nlohmann::json(*sar.se_gamma) : nlohmann::json(nullptr)},
        {"sigma2", sar.sigma2},
        {"loglik", sar.loglik},
        {"near_unit_root", sar.near_unit_root},
        {"geary_resid", sar_geary_resid},
        {"geary_sq_resid", sar_geary_sq_resid},
    };
    nlohmann::json models_json = nlohmann::json::array();
    for (const auto& m : models) {
        nlohmann::json mj = nlohmann::json::parse(m.fit.to_json());
        mj.erase("residuals");
        models_json.push_back({{"model", to_string(m.kind)},
                               {"residual_process", mj},
                               {"geary_resid", m.geary_resid},
                               {"geary_resid_p", m.geary_resid_p},
                               {"geary_sq_resid", m.geary_sq_resid},
                               {"geary_sq_resid_p", m.geary_sq_resid_p}});
    }
    j["residual_models"] = models_json;
    j["summary"] = {{"best_by_bic", to_string(best_by_bic)},
                    {"error_dist_note", error_dist_note}};
    return j.dump(2);
}

}  // namespace spgarch
