#include "spgarch/simulate.hpp"

#include <cmath>
#include <numbers>

namespace spgarch {

void SimConfig::validate() const {
    spec.validate();
    params.validate();
    if (w1_star.size() != w2_star.size())
        throw Error("SimConfig: weight matrices must have the same size");
    if (max_rejections < 1) throw Error("SimConfig: max_rejections must be >= 1");
}

double uniform01(Philox& rng) {
    std::uint64_t bits = (static_cast<std::uint64_t>(rng()) << 32) | rng();
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

double draw_standard_normal(Philox& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vector draw_innovations(int n, const ErrorDist& dist, Philox& rng) {
    if (n < 1) throw Error("draw_innovations: n must be >= 1");
    Vector eps(n);
    for (int i = 0; i < n; ++i) {
        double x = draw_standard_normal(rng);
        if (dist.kind == ErrorDist::Kind::truncated_normal) {
            while (std::abs(x) > dist.bound) x = draw_standard_normal(rng);
        }
        eps[i] = x;
    }
    return eps;
}

SpatialField simulate_field(const SimConfig& cfg, std::uint64_t stream) {
    cfg.validate();
    Philox rng(cfg.seed, stream);
    const int n = cfg.w1_star.size();
    for (int attempt = 0; attempt < cfg.max_rejections; ++attempt) {
        Vector eps = draw_innovations(n, cfg.spec.error_dist, rng);
        Vector h;
        try {
            h = solve_h(eps, cfg.params, cfg.w1_star, cfg.w2_star, cfg.spec);
        } catch (const NonPositiveH&) {
            continue;  // redraw
        }
        SpatialField field;
        field.y = h.array().sqrt() * eps.array();
        field.h = std::move(h);
        field.eps = std::move(eps);
        return field;
    }
    throw RejectionBudgetExhausted("simulate_field: max_rejections redraws, h never positive");
}

}  // namespace spgarch
