#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "spgarch/likelihood.hpp"
#include "spgarch/select.hpp"
#include "spgarch/simulate.hpp"

using namespace spgarch;

namespace {

WeightMatrix pair_link() { return WeightMatrix(2, {{1, 0, 1.0}}); }

double iid_gaussian_loglik(const Vector& y, double alpha) {
    double ll = 0.0;
    for (int i = 0; i < y.size(); ++i)
        ll += -0.5 * std::log(2.0 * std::numbers::pi * alpha) - 0.5 * y[i] * y[i] / alpha;
    return ll;
}

}  // namespace

TEST_CASE("rho = lambda = 0 degenerates to i.i.d. N(0, v)") {
    // spGARCH links h directly (h = alpha); the other three link log h
    // (h = exp(alpha)). Pick alpha so the common variance is v = 2.5.
    auto [w1, w2] = directed_study_weights(4, 4);
    Philox rng(17);
    Vector y = draw_innovations(16, ErrorDist::standard_normal(), rng) * 1.7;
    FixedShapes shapes;
    for (ModelKind kind : kAllModels) {
        CAPTURE(to_string(kind));
        ModelSpec spec = shapes.spec_for(kind);
        double alpha = kind == ModelKind::spgarch ? 2.5 : std::log(2.5);
        ParamVector params{0.0, 0.0, alpha};
        Recovered rec = recover_residuals(y, params, w1, w2, spec);
        CHECK((rec.h.array() - 2.5).abs().maxCoeff() < 1e-12);
        CHECK((rec.eps - y / std::sqrt(2.5)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(jacobian_logdet(rec.eps, rec.h, params, w1, w2, spec) ==
              doctest::Approx(0.5 * 16 * std::log(2.5)).epsilon(1e-12));
        CHECK(log_likelihood(y, params, w1, w2, spec) ==
              doctest::Approx(iid_gaussian_loglik(y, 2.5)).epsilon(1e-12));
    }
}

TEST_CASE("n=2 hand Jacobian: log|det J| = 0.5*log(3.4)") {
    WeightMatrix link = pair_link();
    ParamVector params{0.5, 0.4, 1.0};
    Vector eps(2);
    eps << 2.0, -1.0;
    Vector h = solve_h_spgarch(eps, params, link, link);
    CHECK(h[0] == 1.0);
    CHECK(h[1] == doctest::Approx(3.4).epsilon(1e-15));
    ModelSpec spec{};
    double logdet = jacobian_logdet(eps, h, params, link, link, spec);
    CHECK(logdet == doctest::Approx(0.5 * std::log(3.4)).epsilon(1e-12));
    // Lower-triangular J: det is the product of sqrt(h).
    Eigen::MatrixXd j = jacobian_matrix(eps, h, params, link, link, spec);
    CHECK(j(0, 1) == 0.0);
    CHECK(j(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(j(1, 1) == doctest::Approx(std::sqrt(3.4)).epsilon(1e-12));
}

TEST_CASE("jacobian_matrix matches finite differences") {
    auto [w1, w2] = directed_study_weights(4, 4);
    const int n = 16;
    FixedShapes shapes;
    ParamVector params{0.3, 0.25, 1.2};
    Philox rng(23);
    Vector eps = draw_innovations(n, ErrorDist::standard_normal(), rng);
    // Keep |eps| away from 0 so the log-link derivative b/eps stays tame.
    for (int i = 0; i < n; ++i)
        if (std::abs(eps[i]) < 0.2) eps[i] = eps[i] < 0 ? -0.2 : 0.2;

    for (ModelKind kind : kAllModels) {
        CAPTURE(to_string(kind));
        ModelSpec spec = shapes.spec_for(kind);
        Vector h = solve_h(eps, params, w1, w2, spec);
        Eigen::MatrixXd j = jacobian_matrix(eps, h, params, w1, w2, spec);

        const double step = 1e-6;
        Eigen::MatrixXd fd(n, n);
        for (int col = 0; col < n; ++col) {
            Vector plus = eps, minus = eps;
            plus[col] += step;
            minus[col] -= step;
            Vector y_plus = solve_h(plus, params, w1, w2, spec).array().sqrt() * plus.array();
            Vector y_minus = solve_h(minus, params, w1, w2, spec).array().sqrt() * minus.array();
            fd.col(col) = (y_plus - y_minus) / (2.0 * step);
        }
        CHECK((j - fd).cwiseAbs().maxCoeff() < 1e-5);
    }
}

TEST_CASE("Jacobian is triangular under the joint order for directed weights") {
    auto [w1, w2] = directed_study_weights(3, 5);
    auto order = find_joint_triangular_order(w1, w2);
    REQUIRE(order.has_value());
    Philox rng(31);
    Vector eps = draw_innovations(15, ErrorDist::standard_normal(), rng);
    ParamVector params{0.4, 0.3, 1.0};
    FixedShapes shapes;
    for (ModelKind kind : kAllModels) {
        ModelSpec spec = shapes.spec_for(kind);
        Vector h = solve_h(eps, params, w1, w2, spec);
        Eigen::MatrixXd j = jacobian_matrix(eps, h, params, w1, w2, spec);
        std::vector<int> pos(15);
        for (int k = 0; k < 15; ++k) pos[(*order)[k]] = k;
        for (int i = 0; i < 15; ++i)
            for (int c = 0; c < 15; ++c)
                if (pos[c] > pos[i]) CHECK(j(i, c) == 0.0);
    }
}

TEST_CASE("workspace fast path agrees with the dense log-likelihood") {
    auto [w1, w2] = directed_study_weights(5, 5);
    FixedShapes shapes;
    ParamVector truth{0.5, 0.4, 1.0};
    for (ModelKind kind : kAllModels) {
        CAPTURE(to_string(kind));
        ModelSpec spec = shapes.spec_for(kind);
        SpatialField f = simulate_field({spec, truth, w1, w2, 77});
        LikelihoodWorkspace ws(f.y, w1, w2, spec);
        CHECK(ws.triangular());
        for (ParamVector p : {truth, ParamVector{0.2, 0.1, 0.8}, ParamVector{0.0, 0.6, 1.5}}) {
            LogLikResult fast = ws.evaluate(p);
            REQUIRE(fast.ok());
            CHECK(fast.value ==
                  doctest::Approx(log_likelihood(f.y, p, w1, w2, spec)).epsilon(1e-8));
        }
    }
}

TEST_CASE("recovery roundtrip at non-true parameters still factorizes y") {
    auto [w1, w2] = directed_study_weights(5, 5);
    FixedShapes shapes;
    for (ModelKind kind : kAllModels) {
        ModelSpec spec = shapes.spec_for(kind);
        SpatialField f = simulate_field({spec, {0.5, 0.4, 1.0}, w1, w2, 123});
        ParamVector other{0.3, 0.2, 0.9};
        Recovered rec = recover_residuals(f.y, other, w1, w2, spec);
        Vector recon = rec.h.array().sqrt() * rec.eps.array();
        CHECK((recon - f.y).cwiseAbs().maxCoeff() < 1e-10);
        // And the forward solve reproduces the recovered h.
        Vector h_fwd = solve_h(rec.eps, other, w1, w2, spec);
        CHECK((h_fwd - rec.h).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("E-GARCH fixed-point recovery handles non-triangular weights") {
    WeightMatrix w = scale(row_standardize(build_grid_contiguity(4, 4, GridScheme::rook)), 1.0);
    ModelSpec spec{ModelKind::egarch, 0.5, 0.0, 2.0, ErrorDist::standard_normal()};
    ParamVector params{0.3, 0.2, 1.0};
    SimConfig cfg{spec, params, w, w, 55};
    SpatialField f = simulate_field(cfg);
    Recovered rec = recover_residuals(f.y, params, w, w, spec);
    CHECK((rec.eps - *f.eps).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("H-GARCH and log-GARCH likelihoods collapse under shared weights") {
    WeightMatrix w = lower_triangularize(
        row_standardize(build_grid_contiguity(5, 5, GridScheme::rook)));
    FixedShapes shapes;
    ModelSpec hg = shapes.spec_for(ModelKind::hgarch);
    ModelSpec lg = shapes.spec_for(ModelKind::loggarch);
    ParamVector ph{0.3, 0.25, 1.1};
    ParamVector pl{2.0 * ph.rho / lg.b, ph.rho + ph.lambda, ph.alpha};
    SpatialField f = simulate_field({hg, ph, w, w, 808});
    double ll_h = log_likelihood(f.y, ph, w, w, hg);
    double ll_l = log_likelihood(f.y, pl, w, w, lg);
    CHECK(ll_h == doctest::Approx(ll_l).epsilon(1e-8));
}

TEST_CASE("spGARCH h increases pointwise in alpha") {
    auto [w1, w2] = directed_study_weights(4, 4);
    Philox rng(41);
    Vector eps = draw_innovations(16, ErrorDist::standard_normal(), rng);
    Vector h1 = solve_h_spgarch(eps, {0.4, 0.3, 1.0}, w1, w2);
    Vector h2 = solve_h_spgarch(eps, {0.4, 0.3, 1.5}, w1, w2);
    CHECK((h2.array() > h1.array()).all());
}

TEST_CASE("checked likelihood degrades to -inf with a diagnostic") {
    WeightMatrix w = row_standardize(build_grid_contiguity(4, 4, GridScheme::queen));
    Philox rng(9);
    Vector y = draw_innovations(16, ErrorDist::standard_normal(), rng);
    y[5] = 0.0;  // log y^2 undefined for the log-link inversions
    FixedShapes shapes;
    for (ModelKind kind : {ModelKind::loggarch, ModelKind::hgarch}) {
        LogLikResult r = log_likelihood_checked(y, {0.3, 0.2, 1.0}, w, w, shapes.spec_for(kind));
        CHECK(!r.ok());
        CHECK(r.value == -std::numeric_limits<double>::infinity());
    }
}
