#include "spgarch/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <nlohmann/json.hpp>

namespace spgarch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundaryTol = 1e-5;

double sample_variance(const Vector& y) {
    double mean = y.mean();
    return (y.array() - mean).square().sum() / y.size();
}

bool log_link(ModelKind kind) { return kind != ModelKind::spgarch; }

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, double initial_step,
                             double diameter_tol, int max_evals) {
    const int dim = static_cast<int>(start.size());
    int n_evals = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++n_evals;
        double v = objective(x);
        return std::isnan(v) ? kInf : v;
    };

    std::vector<Eigen::VectorXd> simplex(dim + 1, start);
    std::vector<double> values(dim + 1);
    for (int i = 0; i < dim; ++i) simplex[i + 1][i] += initial_step;
    for (int i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

    auto order = [&] {
        std::vector<int> idx(dim + 1);
        for (int i = 0; i <= dim; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return values[a] < values[b]; });
        std::vector<Eigen::VectorXd> s;
        std::vector<double> v;
        for (int i : idx) {
            s.push_back(simplex[i]);
            v.push_back(values[i]);
        }
        simplex = std::move(s);
        values = std::move(v);
    };

    bool converged = false;
    while (n_evals < max_evals) {
        order();
        double diameter = 0.0;
        for (int i = 1; i <= dim; ++i)
            diameter = std::max(diameter, (simplex[i] - simplex[0]).norm());
        if (diameter < diameter_tol) {
            converged = true;
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (int i = 0; i < dim; ++i) centroid += simplex[i];
        centroid /= dim;

        Eigen::VectorXd reflected = centroid + (centroid - simplex[dim]);
        double fr = eval(reflected);
        if (fr < values[0]) {
            Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[dim]);
            double fe = eval(expanded);
            if (fe < fr) {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
        } else if (fr < values[dim - 1]) {
            simplex[dim] = reflected;
            values[dim] = fr;
        } else {
            Eigen::VectorXd contracted = centroid + 0.5 * (simplex[dim] - centroid);
            double fc = eval(contracted);
            if (fc < values[dim]) {
                simplex[dim] = contracted;
                values[dim] = fc;
            } else {
                for (int i = 1; i <= dim; ++i) {
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
                    values[i] = eval(simplex[i]);
                }
            }
        }
    }
    order();
    return {simplex[0], values[0], converged, n_evals};
}

namespace {

/// Maps the free optimization vector to model parameters.
///
/// rho, lambda, alpha live on a log scale, which keeps the box rho, lambda
/// >= 0, alpha > 0 implicit; the optional fourth coordinate is theta (raw)
/// or log b.
struct ParamMap {
    ModelSpec base_spec;
    bool with_theta = false;
    bool with_b = false;
    double lambda_cap = kInf;

    int dim() const { return 3 + (with_theta || with_b ? 1 : 0); }

    bool unpack(const Eigen::VectorXd& u, ParamVector& params, ModelSpec& spec) const {
        params.rho = std::exp(u[0]);
        params.lambda = std::exp(u[1]);
        params.alpha = std::exp(u[2]);
        spec = base_spec;
        if (with_theta) spec.theta = u[3];
        if (with_b) spec.b = std::exp(u[3]);
        if (!std::isfinite(params.rho) || !std::isfinite(params.lambda) ||
            !std::isfinite(params.alpha))
            return false;
        if (params.lambda >= lambda_cap) return false;
        return true;
    }
};

std::vector<std::optional<double>> hessian_std_errors(
    const std::function<double(const Eigen::VectorXd&)>& loglik, const Eigen::VectorXd& p,
    const std::vector<bool>& on_boundary, std::string& diagnostic) {
    const int dim = static_cast<int>(p.size());
    std::vector<int> interior;
    for (int i = 0; i < dim; ++i)
        if (!on_boundary[i]) interior.push_back(i);
    std::vector<std::optional<double>> se(dim, std::nullopt);
    if (interior.empty()) {
        diagnostic = "all parameters on the boundary";
        return se;
    }
    const int m = static_cast<int>(interior.size());
    Eigen::VectorXd step(m);
    for (int a = 0; a < m; ++a) step[a] = 1e-4 * std::max(std::abs(p[interior[a]]), 1.0);

    auto at = [&](const std::vector<std::pair<int, double>>& shifts) {
        Eigen::VectorXd q = p;
        for (auto [a, d] : shifts) q[interior[a]] += d;
        return loglik(q);
    };
    double f0 = at({});
    Eigen::MatrixXd hess(m, m);
    for (int a = 0; a < m; ++a) {
        double ha = step[a];
        hess(a, a) = (at({{a, ha}}) - 2.0 * f0 + at({{a, -ha}})) / (ha * ha);
        for (int c = a + 1; c < m; ++c) {
            double hc = step[c];
            double v = (at({{a, ha}, {c, hc}}) - at({{a, ha}, {c, -hc}}) -
                        at({{a, -ha}, {c, hc}}) + at({{a, -ha}, {c, -hc}})) /
                       (4.0 * ha * hc);
            hess(a, c) = hess(c, a) = v;
        }
    }
    if (!hess.allFinite()) {
        diagnostic = "non-finite Hessian";
        return se;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(-hess);
    if (llt.info() != Eigen::Success) {
        diagnostic = "negative Hessian not positive definite";
        return se;
    }
    Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(m, m));
    for (int a = 0; a < m; ++a) {
        double v = cov(a, a);
        if (v > 0.0) se[interior[a]] = std::sqrt(v);
    }
    return se;
}

}  // namespace

FitResult fit(const Vector& y, const ModelSpec& spec, const WeightMatrix& w1_star,
              const WeightMatrix& w2_star, const FitOptions& options) {
    if (y.size() < 10) throw OptimFailed("fit: need at least 10 observations");
    if (w1_star.size() != y.size() || w2_star.size() != y.size())
        throw OptimFailed("fit: weight matrix dimension mismatch");
    if (options.estimate_theta && spec.kind != ModelKind::egarch)
        throw OptimFailed("fit: theta is only estimable for egarch");
    if (options.estimate_b && spec.kind != ModelKind::loggarch)
        throw OptimFailed("fit: b is only estimable for loggarch");

    LikelihoodWorkspace workspace(y, w1_star, w2_star, spec);

    ParamMap map;
    map.base_spec = spec;
    map.with_theta = options.estimate_theta;
    map.with_b = options.estimate_b;
    double w2_norm = w2_star.inf_norm();
    if (w2_norm > 0.0) map.lambda_cap = 1.0 / w2_norm;

    auto objective = [&](const Eigen::VectorXd& u) {
        ParamVector params;
        ModelSpec s;
        if (!map.unpack(u, params, s)) return kInf;
        LikelihoodWorkspace ws(y, w1_star, w2_star, s);
        return -ws.evaluate(params).value;
    };
    // Shape parameters change the workspace spec; when none are estimated,
    // reuse the prebuilt workspace.
    auto objective_fixed = [&](const Eigen::VectorXd& u) {
        ParamVector params;
        ModelSpec s;
        if (!map.unpack(u, params, s)) return kInf;
        return -workspace.evaluate(params).value;
    };
    std::function<double(const Eigen::VectorXd&)> obj =
        (map.with_theta || map.with_b) ? std::function<double(const Eigen::VectorXd&)>(objective)
                                       : std::function<double(const Eigen::VectorXd&)>(objective_fixed);

    double var_y = std::max(sample_variance(y), 1e-8);
    double alpha0 = log_link(spec.kind) ? std::max(std::log(var_y), 0.05) : var_y;
    const double start_pairs[4][2] = {{0.05, 0.05}, {0.3, 0.2}, {0.1, 0.4}, {0.4, 0.1}};

    NelderMeadResult best{};
    best.value = kInf;
    int total_evals = 0;
    int n_starts = std::clamp(options.n_starts, 1, 4);
    // Exploration passes at a loose tolerance, then a polishing restart of
    // the winner with a fresh small simplex and the full budget. Restarting
    // escapes the degenerate simplexes Nelder-Mead collapses into.
    double explore_tol = std::max(options.simplex_tol, 1e-6);
    for (int s = 0; s < n_starts; ++s) {
        Eigen::VectorXd u0(map.dim());
        u0[0] = std::log(start_pairs[s][0]);
        u0[1] = std::log(start_pairs[s][1]);
        u0[2] = std::log(alpha0);
        if (map.with_theta) u0[3] = spec.theta != 0.0 ? spec.theta : 0.5;
        if (map.with_b) u0[3] = std::log(spec.b);
        auto r = nelder_mead(obj, u0, 0.5, explore_tol, options.max_evals / n_starts);
        total_evals += r.n_evals;
        if (s == 0 || r.value < best.value) best = r;
    }
    if (!std::isfinite(best.value))
        throw OptimFailed("fit: no feasible point found from any start");
    auto polish = nelder_mead(obj, best.x, 0.05, options.simplex_tol, options.max_evals);
    total_evals += polish.n_evals;
    if (polish.value <= best.value) best = polish;

    FitResult result;
    ParamVector params;
    ModelSpec fitted_spec;
    map.unpack(best.x, params, fitted_spec);
    // Snap near-zero scales to the boundary.
    result.on_boundary = {params.rho <= kBoundaryTol, params.lambda <= kBoundaryTol, false};
    if (result.on_boundary[0]) params.rho = 0.0;
    if (result.on_boundary[1]) params.lambda = 0.0;
    result.params_hat = params;
    result.param_names = {"rho", "lambda", "alpha"};
    if (map.with_theta) {
        result.extra_hat = fitted_spec.theta;
        result.param_names.push_back("theta");
        result.on_boundary.push_back(false);
    }
    if (map.with_b) {
        result.extra_hat = fitted_spec.b;
        result.param_names.push_back("b");
        result.on_boundary.push_back(false);
    }
    result.n_free_params = static_cast<int>(result.param_names.size());
    result.n_evals = total_evals;
    result.converged = best.converged;

    LikelihoodWorkspace final_ws(y, w1_star, w2_star, fitted_spec);
    auto ll = final_ws.evaluate(params);
    result.loglik = ll.value;
    result.aic = -2.0 * result.loglik + 2.0 * result.n_free_params;
    result.bic = -2.0 * result.loglik + result.n_free_params * std::log(double(y.size()));
    if (ll.ok()) result.residuals = final_ws.recover(params).eps;

    attach_standard_errors(result, final_ws);
    return result;
}

void attach_standard_errors(FitResult& result, const LikelihoodWorkspace& workspace) {
    const int dim = result.n_free_params;
    Eigen::VectorXd p(dim);
    p[0] = result.params_hat.rho;
    p[1] = result.params_hat.lambda;
    p[2] = result.params_hat.alpha;
    if (dim == 4) p[3] = *result.extra_hat;

    bool with_theta = dim == 4 && result.param_names[3] == "theta";
    bool with_b = dim == 4 && result.param_names[3] == "b";
    auto loglik = [&](const Eigen::VectorXd& q) {
        ParamVector params{q[0], q[1], q[2]};
        if (params.rho < 0.0 || params.lambda < 0.0 || params.alpha <= 0.0)
            return -kInf;
        ModelSpec s = workspace.spec();
        if (with_theta) s.theta = q[3];
        if (with_b) s.b = q[3];
        LikelihoodWorkspace ws(workspace.y(), workspace.w1_star(), workspace.w2_star(), s);
        return ws.evaluate(params).value;
    };
    result.std_errors = hessian_std_errors(loglik, p, result.on_boundary, result.se_diagnostic);
}

std::string FitResult::to_json() const {
    nlohmann::json j;
    j["rho"] = params_hat.rho;
    j["lambda"] = params_hat.lambda;
    j["alpha"] = params_hat.alpha;
    if (extra_hat) j[param_names.back()] = *extra_hat;
    nlohmann::json se = nlohmann::json::object();
    for (size_t i = 0; i < param_names.size(); ++i) {
        if (i < std_errors.size() && std_errors[i])
            se[param_names[i]] = *std_errors[i];
        else
            se[param_names[i]] = nullptr;
    }
    j["std_errors"] = se;
    nlohmann::json boundary = nlohmann::json::object();
    for (size_t i = 0; i < param_names.size(); ++i)
        boundary[param_names[i]] = i < on_boundary.size() && on_boundary[i];
    j["on_boundary"] = boundary;
    j["loglik"] = loglik;
    j["aic"] = aic;
    j["bic"] = bic;
    j["converged"] = converged;
    j["n_evals"] = n_evals;
    j["n_free_params"] = n_free_params;
    if (!se_diagnostic.empty()) j["se_diagnostic"] = se_diagnostic;
    std::vector<double> res(residuals.begin(), residuals.end());
    j["residuals"] = res;
    return j.dump(2);
}

}  // namespace spgarch
