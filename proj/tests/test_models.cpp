#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spgarch/models.hpp"
#include "spgarch/simulate.hpp"

using namespace spgarch;

namespace {

// n=2 directed pair: single link from site 0 into site 1.
WeightMatrix pair_link() { return WeightMatrix(2, {{1, 0, 1.0}}); }

const ParamVector kStudyParams{0.5, 0.4, 1.0};

}  // namespace

TEST_CASE("g_egarch") {
    ModelSpec spec;
    spec.kind = ModelKind::egarch;

    SUBCASE("theta=0.5, zeta=0, eps=1") {
        spec.theta = 0.5;
        CHECK(g_egarch(1.0, spec) == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("zero map") {
        spec.theta = 0.0;
        spec.zeta = 0.0;
        CHECK(g_egarch(-3.7, spec) == 0.0);
    }
    SUBCASE("theta=1, zeta=1, eps=-0.5") {
        spec.theta = 1.0;
        spec.zeta = 1.0;
        double expected = -0.5 + (0.5 - std::sqrt(2.0 / std::numbers::pi));
        CHECK(g_egarch(-0.5, spec) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("mean_abs_eps") {
    SUBCASE("standard normal: sqrt(2/pi)") {
        CHECK(ErrorDist::standard_normal().mean_abs() ==
              doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
    }
    SUBCASE("truncated normal matches quadrature") {
        // Independent oracle: trapezoid rule on |x| phi(x) / mass over [-b, b].
        for (double b : {0.5, 1.0, 2.5}) {
            const int steps = 200000;
            double num = 0.0, mass = 0.0;
            for (int k = 0; k <= steps; ++k) {
                double x = -b + 2.0 * b * k / steps;
                double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
                double wgt = (k == 0 || k == steps) ? 0.5 : 1.0;
                num += wgt * std::abs(x) * phi;
                mass += wgt * phi;
            }
            CHECK(ErrorDist::truncated_normal(b).mean_abs() ==
                  doctest::Approx(num / mass).epsilon(1e-8));
        }
    }
}

TEST_CASE("solve_h_spgarch") {
    SUBCASE("rho=lambda=0 gives h = alpha") {
        Vector eps(3);
        eps << 1.0, -2.0, 0.5;
        WeightMatrix w(3, {{1, 0, 1.0}});
        Vector h = solve_h_spgarch(eps, {0.0, 0.0, 2.5}, w, w);
        for (int i = 0; i < 3; ++i) CHECK(h[i] == doctest::Approx(2.5).epsilon(1e-14));
    }
    SUBCASE("hand recursion: h = (1, 3.4)") {
        Vector eps(2);
        eps << 2.0, 1.0;
        Vector h = solve_h_spgarch(eps, kStudyParams, pair_link(), pair_link());
        CHECK(h[0] == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(h[1] == doctest::Approx(3.4).epsilon(1e-13));
    }
    SUBCASE("residual of the defining system is its own oracle") {
        auto w1 = lower_triangularize(row_standardize(build_grid_contiguity(4, 4, GridScheme::rook)));
        auto w2 = lower_triangularize(row_standardize(build_grid_contiguity(4, 4, GridScheme::queen)));
        Philox rng(7);
        Vector eps = draw_innovations(16, ErrorDist::standard_normal(), rng);
        Vector h = solve_h_spgarch(eps, kStudyParams, w1, w2);
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(16, 16) -
                            0.5 * w1.to_dense() * eps.array().square().matrix().asDiagonal() -
                            0.4 * w2.to_dense();
        Vector residual = a * h - Vector::Constant(16, 1.0);
        CHECK(residual.cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("solve_h_egarch") {
    ModelSpec spec;
    spec.kind = ModelKind::egarch;
    spec.theta = 0.5;

    SUBCASE("rho=lambda=0 gives h = exp(alpha)") {
        Vector eps(2);
        eps << 1.0, 2.0;
        Vector h = solve_h_egarch(eps, {0.0, 0.0, 1.0}, pair_link(), pair_link(), spec);
        CHECK(h[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    }
    SUBCASE("hand recursion: log h2 = 1.9") {
        Vector eps(2);
        eps << 2.0, 1.0;
        Vector h = solve_h_egarch(eps, kStudyParams, pair_link(), pair_link(), spec);
        CHECK(std::log(h[1]) == doctest::Approx(1.9).epsilon(1e-13));
    }
    SUBCASE("product form reproduces the linear solve") {
        auto w1 = row_standardize(build_grid_contiguity(3, 3, GridScheme::rook));
        auto w2 = row_standardize(build_grid_contiguity(3, 3, GridScheme::queen));
        Philox rng(11);
        Vector eps = draw_innovations(9, ErrorDist::standard_normal(), rng);
        Vector h = solve_h_egarch(eps, kStudyParams, w1, w2, spec);
        for (int i = 0; i < 9; ++i) {
            double prod = std::exp(1.0);
            for (int j = 0; j < 9; ++j) {
                prod *= std::pow(h[j], 0.4 * w2.at(i, j));
                prod *= std::exp(0.5 * w1.at(i, j) * g_egarch(eps[j], spec));
            }
            CHECK(h[i] == doctest::Approx(prod).epsilon(1e-10));
        }
    }
}

TEST_CASE("solve_h_loggarch") {
    ModelSpec spec;
    spec.kind = ModelKind::loggarch;
    spec.b = 2.0;

    SUBCASE("rho=lambda=0 gives h = exp(alpha)") {
        Vector eps(2);
        eps << 0.3, -1.0;
        Vector h = solve_h_loggarch(eps, {0.0, 0.0, 1.0}, pair_link(), pair_link(), spec);
        CHECK(h[1] == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    }
    SUBCASE("hand recursion") {
        Vector eps(2);
        eps << 2.0, 1.0;
        Vector h = solve_h_loggarch(eps, kStudyParams, pair_link(), pair_link(), spec);
        // log h2 = 1 + 0.5*2*log 2 + 0.4*1
        CHECK(std::log(h[1]) == doctest::Approx(1.4 + std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("b=2 equals egarch with g(eps) = log(eps^2) substituted") {
        // Same unified form: evaluate the log-link solve with the log-GARCH g
        // directly and compare.
        auto w1 = lower_triangularize(row_standardize(build_grid_contiguity(3, 3, GridScheme::rook)));
        auto w2 = lower_triangularize(row_standardize(build_grid_contiguity(3, 3, GridScheme::queen)));
        Philox rng(3);
        Vector eps = draw_innovations(9, ErrorDist::standard_normal(), rng);
        Vector h = solve_h_loggarch(eps, kStudyParams, w1, w2, spec);
        Vector g = eps.array().square().log();
        Vector rhs = Vector::Constant(9, 1.0) + 0.5 * (w1.to_eigen() * g);
        Vector log_h = solve_i_minus(0.4 * w2.to_eigen(), rhs);
        CHECK((h - log_h.array().exp().matrix()).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("zero innovation rejected") {
        Vector eps(2);
        eps << 0.0, 1.0;
        CHECK_THROWS_AS(solve_h_loggarch(eps, kStudyParams, pair_link(), pair_link(), spec),
                        ZeroInnovation);
    }
}

TEST_CASE("solve_h_hgarch") {
    SUBCASE("rho=0: independent of eps") {
        Vector eps1(2), eps2(2);
        eps1 << 2.0, 1.0;
        eps2 << -0.1, 5.0;
        ParamVector p{0.0, 0.4, 1.0};
        Vector ha = solve_h_hgarch(eps1, p, pair_link(), pair_link());
        Vector hb = solve_h_hgarch(eps2, p, pair_link(), pair_link());
        CHECK((ha - hb).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("hand recursion: X2 = alpha + rho*log(Y1^2) + lambda*X1") {
        Vector eps(2);
        eps << 2.0, 1.0;
        Vector h = solve_h_hgarch(eps, kStudyParams, pair_link(), pair_link());
        double x1 = 1.0;
        double y1_sq = std::exp(x1) * 4.0;
        double x2 = 1.0 + 0.5 * std::log(y1_sq) + 0.4 * x1;
        CHECK(std::log(h[1]) == doctest::Approx(x2).epsilon(1e-13));
    }
    SUBCASE("solution satisfies the site equation") {
        auto w1 = row_standardize(build_grid_contiguity(3, 3, GridScheme::rook));
        auto w2 = row_standardize(build_grid_contiguity(3, 3, GridScheme::queen));
        ParamVector p{0.3, 0.3, 1.0};
        Philox rng(5);
        Vector eps = draw_innovations(9, ErrorDist::standard_normal(), rng);
        Vector h = solve_h_hgarch(eps, p, w1, w2);
        Vector y2 = h.array() * eps.array().square();
        for (int i = 0; i < 9; ++i) {
            double rhs = 1.0;
            for (int j = 0; j < 9; ++j) {
                rhs += 0.3 * w1.at(i, j) * std::log(y2[j]);
                rhs += 0.3 * w2.at(i, j) * std::log(h[j]);
            }
            CHECK(std::log(h[i]) == doctest::Approx(rhs).epsilon(1e-10));
        }
    }
}

TEST_CASE("hybrid collapses to log-GARCH when W1* = W2*") {
    auto w = lower_triangularize(row_standardize(build_grid_contiguity(4, 4, GridScheme::queen)));
    Philox rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        Vector eps = draw_innovations(16, ErrorDist::standard_normal(), rng);
        double rho = 0.1 + 0.4 * uniform01(rng);
        double lambda = 0.1 + 0.3 * uniform01(rng);
        double b = 0.5 + 3.0 * uniform01(rng);
        ModelSpec lg;
        lg.kind = ModelKind::loggarch;
        lg.b = b;
        Vector h_hybrid = solve_h_hgarch(eps, {rho, lambda, 1.0}, w, w);
        Vector h_log = solve_h_loggarch(eps, {2.0 * rho / b, rho + lambda, 1.0}, w, w, lg);
        CHECK((h_hybrid - h_log).cwiseAbs().maxCoeff() <
              1e-10 * h_hybrid.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("sign symmetry of h") {
    auto w1 = lower_triangularize(row_standardize(build_grid_contiguity(3, 3, GridScheme::rook)));
    auto w2 = lower_triangularize(row_standardize(build_grid_contiguity(3, 3, GridScheme::queen)));
    Philox rng(23);
    Vector eps = draw_innovations(9, ErrorDist::standard_normal(), rng);
    ModelSpec eg;
    eg.kind = ModelKind::egarch;
    eg.theta = 0.0;
    eg.zeta = 0.7;
    ModelSpec lg;
    lg.kind = ModelKind::loggarch;

    CHECK((solve_h_egarch(eps, kStudyParams, w1, w2, eg) -
           solve_h_egarch(-eps, kStudyParams, w1, w2, eg))
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((solve_h_loggarch(eps, kStudyParams, w1, w2, lg) -
           solve_h_loggarch(-eps, kStudyParams, w1, w2, lg))
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((solve_h_spgarch(eps, kStudyParams, w1, w2) -
           solve_h_spgarch(-eps, kStudyParams, w1, w2))
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("alpha homogeneity and shift equivariance") {
    auto w1 = lower_triangularize(row_standardize(build_grid_contiguity(3, 3, GridScheme::rook)));
    auto w2 = lower_triangularize(row_standardize(build_grid_contiguity(3, 3, GridScheme::queen)));
    Philox rng(29);
    Vector eps = draw_innovations(9, ErrorDist::standard_normal(), rng);

    // spGARCH: h scales linearly with alpha.
    Vector h1 = solve_h_spgarch(eps, {0.5, 0.4, 1.0}, w1, w2);
    Vector h3 = solve_h_spgarch(eps, {0.5, 0.4, 3.0}, w1, w2);
    CHECK((h3 - 3.0 * h1).cwiseAbs().maxCoeff() < 1e-12);

    // log-link: log h shifts by (I - lambda W2)^-1 * dalpha.
    ModelSpec eg;
    eg.kind = ModelKind::egarch;
    eg.theta = 0.5;
    Vector ha = solve_h_egarch(eps, {0.5, 0.4, 1.0}, w1, w2, eg);
    Vector hb = solve_h_egarch(eps, {0.5, 0.4, 1.7}, w1, w2, eg);
    Vector shift = solve_i_minus(0.4 * w2.to_eigen(), Vector::Constant(9, 0.7));
    Vector observed = (hb.array() / ha.array()).log();
    CHECK((observed - shift).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ModelSpec JSON") {
    SUBCASE("round trip") {
        ModelSpec spec;
        spec.kind = ModelKind::egarch;
        spec.theta = 0.5;
        spec.zeta = 0.0;
        spec.b = 2.0;
        ModelSpec parsed = ModelSpec::from_json(spec.to_json());
        CHECK(parsed.kind == ModelKind::egarch);
        CHECK(parsed.theta == 0.5);
    }
    SUBCASE("unknown keys rejected") {
        CHECK_THROWS_AS(ModelSpec::from_json(R"({"kind":"egarch","bogus":1})"), Error);
    }
    SUBCASE("documented example parses") {
        ModelSpec parsed = ModelSpec::from_json(
            R"({"kind":"egarch","theta":0.5,"zeta":0.0,"b":2.0,"error_dist":"standard_normal"})");
        CHECK(parsed.kind == ModelKind::egarch);
        CHECK(parsed.error_dist.kind == ErrorDist::Kind::standard_normal);
    }
}
