#pragma once

#include <cstdint>

#include "spgarch/models.hpp"
#include "spgarch/rng.hpp"
#include "spgarch/weights.hpp"

namespace spgarch {

struct SimConfig {
    ModelSpec spec;
    ParamVector params;
    WeightMatrix w1_star;
    WeightMatrix w2_star;
    std::uint64_t seed = 0;
    int max_rejections = 100;

    void validate() const;
};

/// Uniform double in (0, 1), exclusive at both ends.
double uniform01(Philox& rng);

/// Standard normal draw (Box-Muller; consumes two uniforms).
double draw_standard_normal(Philox& rng);

/// i.i.d. innovations from `dist`. The truncated variant redraws each
/// component until it lands inside [-bound, bound].
Vector draw_innovations(int n, const ErrorDist& dist, Philox& rng);

/// Simulates one field: draw eps, solve for h, set y = sqrt(h) .* eps.
/// A spGARCH draw with non-positive h is rejected and redrawn, up to
/// cfg.max_rejections times. `stream` selects the replication stream.
SpatialField simulate_field(const SimConfig& cfg, std::uint64_t stream = 0);

}  // namespace spgarch
