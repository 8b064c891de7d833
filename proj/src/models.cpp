#include "spgarch/models.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace spgarch {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::spgarch: return "spgarch";
        case ModelKind::egarch: return "egarch";
        case ModelKind::loggarch: return "loggarch";
        case ModelKind::hgarch: return "hgarch";
    }
    throw Error("unknown model kind");
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "spgarch") return ModelKind::spgarch;
    if (name == "egarch") return ModelKind::egarch;
    if (name == "loggarch") return ModelKind::loggarch;
    if (name == "hgarch") return ModelKind::hgarch;
    throw Error("unknown model kind '" + name + "'");
}

ErrorDist ErrorDist::truncated_normal(double bound) {
    if (bound <= 0.0) throw Error("truncated_normal: bound must be positive");
    return {Kind::truncated_normal, bound};
}

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

double ErrorDist::mean_abs() const {
    const double sqrt_2_over_pi = std::sqrt(2.0 / std::numbers::pi);
    if (kind == Kind::standard_normal) return sqrt_2_over_pi;
    // E|X| for X ~ N(0,1) truncated to [-b, b]: by symmetry the half-normal
    // mean restricted to [0, b], i.e. sqrt(2/pi)(1 - e^{-b^2/2}) / (2 Phi(b) - 1).
    double mass = 2.0 * std_normal_cdf(bound) - 1.0;
    return sqrt_2_over_pi * (1.0 - std::exp(-0.5 * bound * bound)) / mass;
}

double ErrorDist::log_density(double x) const {
    const double log_phi = -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * x * x;
    if (kind == Kind::standard_normal) return log_phi;
    if (std::abs(x) > bound) return -std::numeric_limits<double>::infinity();
    return log_phi - std::log(2.0 * std_normal_cdf(bound) - 1.0);
}

void ModelSpec::validate() const {
    if (kind == ModelKind::loggarch && b <= 0.0)
        throw Error("ModelSpec: b must be positive for loggarch");
    if (error_dist.kind == ErrorDist::Kind::truncated_normal && error_dist.bound <= 0.0)
        throw Error("ModelSpec: truncated_normal requires a positive bound");
}

std::string ModelSpec::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["theta"] = theta;
    j["zeta"] = zeta;
    j["b"] = b;
    if (error_dist.kind == ErrorDist::Kind::standard_normal) {
        j["error_dist"] = "standard_normal";
    } else {
        j["error_dist"] = "truncated_normal";
        j["bound"] = error_dist.bound;
    }
    return j.dump();
}

ModelSpec ModelSpec::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    static const std::vector<std::string> known = {"kind", "theta", "zeta",
                                                   "b",    "bound", "error_dist"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw Error("ModelSpec JSON: unknown key '" + it.key() + "'");
    }
    ModelSpec spec;
    spec.kind = model_kind_from_string(j.at("kind").get<std::string>());
    spec.theta = j.value("theta", 0.0);
    spec.zeta = j.value("zeta", 0.0);
    spec.b = j.value("b", 2.0);
    std::string dist = j.value("error_dist", std::string("standard_normal"));
    if (dist == "standard_normal") {
        spec.error_dist = ErrorDist::standard_normal();
    } else if (dist == "truncated_normal") {
        spec.error_dist = ErrorDist::truncated_normal(j.at("bound").get<double>());
    } else {
        throw Error("ModelSpec JSON: unknown error_dist '" + dist + "'");
    }
    spec.validate();
    return spec;
}

void ParamVector::validate() const {
    if (rho < 0.0 || lambda < 0.0) throw Error("ParamVector: rho and lambda must be >= 0");
    if (alpha <= 0.0) throw Error("ParamVector: alpha must be > 0");
}

void SpatialField::validate() const {
    if (h && h->size() != y.size()) throw Error("SpatialField: h size mismatch");
    if (eps && eps->size() != y.size()) throw Error("SpatialField: eps size mismatch");
    if (h && (h->array() <= 0.0).any()) throw Error("SpatialField: h must be positive");
    if (h && eps) {
        Vector recon = h->array().sqrt() * eps->array();
        if ((recon - y).cwiseAbs().maxCoeff() > 1e-10)
            throw Error("SpatialField: y != sqrt(h)*eps");
    }
}

double g_egarch(double eps_i, const ModelSpec& spec) {
    return spec.theta * eps_i + spec.zeta * (std::abs(eps_i) - spec.mean_abs_eps());
}

double g_egarch_prime(double eps_i, const ModelSpec& spec) {
    double sign = eps_i > 0.0 ? 1.0 : (eps_i < 0.0 ? -1.0 : 0.0);
    return spec.theta + spec.zeta * sign;
}

Vector solve_i_minus(const Eigen::SparseMatrix<double>& a, const Vector& rhs) {
    Eigen::SparseMatrix<double> sys(a.rows(), a.cols());
    sys.setIdentity();
    sys -= a;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(sys);
    if (lu.info() != Eigen::Success) throw SingularSystem("I - A is numerically singular");
    Vector x = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw SingularSystem("sparse solve failed");
    return x;
}

namespace {

void check_no_zero_innovation(const Vector& eps) {
    if ((eps.cwiseAbs().array() < kZeroInnovationTol).any())
        throw ZeroInnovation("innovation equal to zero: log|eps| undefined");
}

Vector constant_vector(int n, double value) { return Vector::Constant(n, value); }

}  // namespace

Vector solve_h_spgarch(const Vector& eps, const ParamVector& params,
                       const WeightMatrix& w1_star, const WeightMatrix& w2_star) {
    const int n = w1_star.size();
    Eigen::SparseMatrix<double> a =
        params.rho * w1_star.to_eigen() * eps.array().square().matrix().asDiagonal();
    a += params.lambda * w2_star.to_eigen();
    Vector h = solve_i_minus(a, constant_vector(n, params.alpha));
    if ((h.array() <= 0.0).any()) throw NonPositiveH("spGARCH solve produced h <= 0");
    return h;
}

Vector solve_h_egarch(const Vector& eps, const ParamVector& params,
                      const WeightMatrix& w1_star, const WeightMatrix& w2_star,
                      const ModelSpec& spec) {
    const int n = w1_star.size();
    Vector g(n);
    for (int i = 0; i < n; ++i) g[i] = g_egarch(eps[i], spec);
    Vector rhs = constant_vector(n, params.alpha) + params.rho * (w1_star.to_eigen() * g);
    Vector log_h = solve_i_minus(params.lambda * w2_star.to_eigen(), rhs);
    return log_h.array().exp();
}

Vector solve_h_loggarch(const Vector& eps, const ParamVector& params,
                        const WeightMatrix& w1_star, const WeightMatrix& w2_star,
                        const ModelSpec& spec) {
    check_no_zero_innovation(eps);
    const int n = w1_star.size();
    Vector g = spec.b * eps.cwiseAbs().array().log();
    Vector rhs = constant_vector(n, params.alpha) + params.rho * (w1_star.to_eigen() * g);
    Vector log_h = solve_i_minus(params.lambda * w2_star.to_eigen(), rhs);
    return log_h.array().exp();
}

Vector solve_h_hgarch(const Vector& eps, const ParamVector& params,
                      const WeightMatrix& w1_star, const WeightMatrix& w2_star) {
    check_no_zero_innovation(eps);
    const int n = w1_star.size();
    Vector eps_l2 = 2.0 * eps.cwiseAbs().array().log();
    Eigen::SparseMatrix<double> w1 = params.rho * w1_star.to_eigen();
    Vector rhs = constant_vector(n, params.alpha) + w1 * eps_l2;
    Eigen::SparseMatrix<double> a = w1 + params.lambda * w2_star.to_eigen();
    Vector x = solve_i_minus(a, rhs);
    return x.array().exp();
}

Vector solve_h(const Vector& eps, const ParamVector& params, const WeightMatrix& w1_star,
               const WeightMatrix& w2_star, const ModelSpec& spec) {
    switch (spec.kind) {
        case ModelKind::spgarch: return solve_h_spgarch(eps, params, w1_star, w2_star);
        case ModelKind::egarch: return solve_h_egarch(eps, params, w1_star, w2_star, spec);
        case ModelKind::loggarch:
            return solve_h_loggarch(eps, params, w1_star, w2_star, spec);
        case ModelKind::hgarch: return solve_h_hgarch(eps, params, w1_star, w2_star);
    }
    throw Error("unknown model kind");
}

}  // namespace spgarch
