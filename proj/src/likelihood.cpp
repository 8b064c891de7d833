#include "spgarch/likelihood.hpp"

#include <Eigen/LU>
#include <Eigen/SparseLU>
#include <cmath>
#include <limits>

namespace spgarch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_no_zero_observation(const Vector& y) {
    if ((y.cwiseAbs().array() < kZeroInnovationTol).any())
        throw ZeroObservation("observation equal to zero: log y^2 undefined");
}

/// Dense solve X = (I - A)^-1 B with sparse A.
Eigen::MatrixXd solve_i_minus_dense(const Eigen::SparseMatrix<double>& a,
                                    const Eigen::MatrixXd& b) {
    Eigen::SparseMatrix<double> sys(a.rows(), a.cols());
    sys.setIdentity();
    sys -= a;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(sys);
    if (lu.info() != Eigen::Success) throw SingularSystem("I - A is numerically singular");
    return lu.solve(b);
}

/// Row-wise view of the nonzeros of a weight matrix.
std::vector<std::vector<std::pair<int, double>>> row_lists(const WeightMatrix& w) {
    std::vector<std::vector<std::pair<int, double>>> rows(w.size());
    for (const auto& e : w.entries()) rows[e.row].emplace_back(e.col, e.value);
    return rows;
}

Recovered recover_egarch(const Vector& y, const ParamVector& params,
                         const WeightMatrix& w1_star, const WeightMatrix& w2_star,
                         const ModelSpec& spec,
                         const std::optional<std::vector<int>>& joint_order) {
    const int n = static_cast<int>(y.size());
    Recovered out;
    out.eps.resize(n);
    out.h.resize(n);
    if (joint_order) {
        // In topological order every row of W1, W2 only references
        // already-resolved sites, so each component closes in one step.
        auto w1_rows = row_lists(w1_star);
        auto w2_rows = row_lists(w2_star);
        Vector g(n), log_h(n);
        for (int i : *joint_order) {
            double x = params.alpha;
            for (const auto& [j, w] : w1_rows[i]) x += params.rho * w * g[j];
            for (const auto& [j, w] : w2_rows[i]) x += params.lambda * w * log_h[j];
            log_h[i] = x;
            out.h[i] = std::exp(x);
            out.eps[i] = y[i] / std::sqrt(out.h[i]);
            g[i] = g_egarch(out.eps[i], spec);
        }
        return out;
    }
    // Damped fixed point eps <- y .* exp(-log_h(eps)/2); the update keeps
    // sign(eps_i) = sign(y_i).
    constexpr double damping = 0.5;
    constexpr double tol = 1e-10;
    constexpr int max_iter = 500;
    Vector eps = y;
    for (int it = 0; it < max_iter; ++it) {
        Vector h = solve_h_egarch(eps, params, w1_star, w2_star, spec);
        Vector next = (1.0 - damping) * eps.array() + damping * y.array() / h.array().sqrt();
        double delta = (next - eps).cwiseAbs().maxCoeff();
        eps = next;
        if (delta < tol) {
            out.h = solve_h_egarch(eps, params, w1_star, w2_star, spec);
            out.eps = y.array() / out.h.array().sqrt();
            return out;
        }
    }
    throw NoConvergence("E-GARCH residual recovery fixed point did not converge");
}

}  // namespace

Recovered recover_residuals(const Vector& y, const ParamVector& params,
                            const WeightMatrix& w1_star, const WeightMatrix& w2_star,
                            const ModelSpec& spec) {
    params.validate();
    const int n = static_cast<int>(y.size());
    Recovered out;
    switch (spec.kind) {
        case ModelKind::spgarch: {
            Vector rhs = Vector::Constant(n, params.alpha) +
                         params.rho * (w1_star.to_eigen() * y.array().square().matrix());
            out.h = solve_i_minus(params.lambda * w2_star.to_eigen(), rhs);
            if ((out.h.array() <= 0.0).any())
                throw NonPositiveH("spGARCH recovery: h <= 0 at these parameters");
            out.eps = y.array() / out.h.array().sqrt();
            return out;
        }
        case ModelKind::hgarch: {
            check_no_zero_observation(y);
            Vector y_l2 = 2.0 * y.cwiseAbs().array().log();
            Vector rhs =
                Vector::Constant(n, params.alpha) + params.rho * (w1_star.to_eigen() * y_l2);
            Vector x = solve_i_minus(params.lambda * w2_star.to_eigen(), rhs);
            out.h = x.array().exp();
            out.eps = y.array() * (-0.5 * x.array()).exp();
            return out;
        }
        case ModelKind::loggarch: {
            check_no_zero_observation(y);
            Vector y_l = y.cwiseAbs().array().log();
            Vector rhs = Vector::Constant(n, params.alpha) +
                         spec.b * params.rho * (w1_star.to_eigen() * y_l);
            // X = (I + 0.5*b*W1 - W2)^-1 rhs
            Eigen::SparseMatrix<double> a = params.lambda * w2_star.to_eigen();
            a -= (0.5 * spec.b * params.rho) * w1_star.to_eigen();
            Vector x = solve_i_minus(a, rhs);
            out.h = x.array().exp();
            out.eps = y.array() * (-0.5 * x.array()).exp();
            return out;
        }
        case ModelKind::egarch: {
            auto order = find_joint_triangular_order(w1_star, w2_star);
            return recover_egarch(y, params, w1_star, w2_star, spec, order);
        }
    }
    throw Error("unknown model kind");
}

Eigen::MatrixXd jacobian_matrix(const Vector& eps, const Vector& h, const ParamVector& params,
                                const WeightMatrix& w1_star, const WeightMatrix& w2_star,
                                const ModelSpec& spec) {
    const int n = static_cast<int>(eps.size());
    Eigen::MatrixXd dh(n, n);  // dh(i,j) = dh_i / deps_j
    switch (spec.kind) {
        case ModelKind::spgarch: {
            Eigen::SparseMatrix<double> a =
                params.rho * w1_star.to_eigen() * eps.array().square().matrix().asDiagonal();
            a += params.lambda * w2_star.to_eigen();
            Eigen::MatrixXd m =
                solve_i_minus_dense(a, params.rho * w1_star.to_dense());
            dh = m * (2.0 * eps.array() * h.array()).matrix().asDiagonal();
            break;
        }
        case ModelKind::egarch: {
            Eigen::MatrixXd c = solve_i_minus_dense(params.lambda * w2_star.to_eigen(),
                                                    params.rho * w1_star.to_dense());
            for (int j = 0; j < n; ++j) {
                double gp = g_egarch_prime(eps[j], spec);
                dh.col(j) = c.col(j).array() * h.array() * gp;
            }
            break;
        }
        case ModelKind::loggarch: {
            Eigen::MatrixXd c = solve_i_minus_dense(params.lambda * w2_star.to_eigen(),
                                                    params.rho * w1_star.to_dense());
            for (int j = 0; j < n; ++j)
                dh.col(j) = c.col(j).array() * h.array() * (spec.b / eps[j]);
            break;
        }
        case ModelKind::hgarch: {
            Eigen::SparseMatrix<double> a = params.rho * w1_star.to_eigen();
            a += params.lambda * w2_star.to_eigen();
            Eigen::MatrixXd d = solve_i_minus_dense(a, params.rho * w1_star.to_dense());
            for (int j = 0; j < n; ++j)
                dh.col(j) = d.col(j).array() * h.array() * (2.0 / eps[j]);
            break;
        }
    }
    Vector sqrt_h = h.array().sqrt();
    Vector front = 0.5 * eps.array() / sqrt_h.array();
    Eigen::MatrixXd jac = front.asDiagonal() * dh;
    jac += Eigen::MatrixXd(sqrt_h.asDiagonal());
    return jac;
}

double jacobian_logdet(const Vector& eps, const Vector& h, const ParamVector& params,
                       const WeightMatrix& w1_star, const WeightMatrix& w2_star,
                       const ModelSpec& spec) {
    Eigen::MatrixXd jac = jacobian_matrix(eps, h, params, w1_star, w2_star, spec);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    double log_abs_det = 0.0;
    for (int i = 0; i < jac.rows(); ++i) {
        double u = std::abs(lu.matrixLU()(i, i));
        if (u == 0.0) throw SingularJacobian("det J underflowed to zero");
        log_abs_det += std::log(u);
    }
    return log_abs_det;
}

LogLikResult log_likelihood_checked(const Vector& y, const ParamVector& params,
                                    const WeightMatrix& w1_star, const WeightMatrix& w2_star,
                                    const ModelSpec& spec) {
    LikelihoodWorkspace ws(y, w1_star, w2_star, spec);
    return ws.evaluate(params);
}

double log_likelihood(const Vector& y, const ParamVector& params, const WeightMatrix& w1_star,
                      const WeightMatrix& w2_star, const ModelSpec& spec) {
    return log_likelihood_checked(y, params, w1_star, w2_star, spec).value;
}

LikelihoodWorkspace::LikelihoodWorkspace(const Vector& y, WeightMatrix w1_star,
                                         WeightMatrix w2_star, ModelSpec spec)
    : y_(y), w1_star_(std::move(w1_star)), w2_star_(std::move(w2_star)), spec_(std::move(spec)) {
    spec_.validate();
    joint_order_ = find_joint_triangular_order(w1_star_, w2_star_);
}

Recovered LikelihoodWorkspace::recover(const ParamVector& params) const {
    return recover_residuals(y_, params, w1_star_, w2_star_, spec_);
}

LogLikResult LikelihoodWorkspace::evaluate(const ParamVector& params) const {
    try {
        Recovered rec = recover(params);
        double log_det;
        if (joint_order_) {
            // J is triangular with diagonal sqrt(h) under the joint order.
            log_det = 0.5 * rec.h.array().log().sum();
        } else {
            log_det = jacobian_logdet(rec.eps, rec.h, params, w1_star_, w2_star_, spec_);
        }
        double density = 0.0;
        for (int i = 0; i < rec.eps.size(); ++i)
            density += spec_.error_dist.log_density(rec.eps[i]);
        double value = density - log_det;
        if (!std::isfinite(value))
            return {kNegInf, "non-finite log-likelihood"};
        return {value, ""};
    } catch (const Error& e) {
        return {kNegInf, e.what()};
    }
}

}  // namespace spgarch
