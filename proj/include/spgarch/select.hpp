#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spgarch/estimate.hpp"
#include "spgarch/models.hpp"
#include "spgarch/simulate.hpp"

namespace spgarch {

enum class SelectionCriterion { max_loglik, bic };

inline constexpr std::array<ModelKind, 4> kAllModels = {
    ModelKind::spgarch, ModelKind::hgarch, ModelKind::loggarch, ModelKind::egarch};

/// Shape parameters held fixed across the four candidate models so the
/// parameter counts match and the attained likelihoods compare directly.
struct FixedShapes {
    double theta = 0.5;
    double zeta = 0.0;
    double b = 2.0;
    ErrorDist error_dist;

    ModelSpec spec_for(ModelKind kind) const;
};

struct ModelFitEntry {
    ModelKind kind;
    bool ok = false;
    FitResult fit;
    std::string failure;
};

struct SelectionReport {
    std::vector<ModelFitEntry> fits;
    ModelKind chosen;
    SelectionCriterion criterion;
};

/// Fits all four variants with fixed shapes and picks the winner by the
/// stated criterion. Throws AllFitsFailed when every fit fails.
SelectionReport select_model(const Vector& y, const WeightMatrix& w1_star,
                             const WeightMatrix& w2_star, const FixedShapes& shapes,
                             SelectionCriterion criterion = SelectionCriterion::max_loglik);

struct MCConfig {
    int rows = 15;
    int cols = 15;
    ParamVector params{0.5, 0.4, 1.0};
    FixedShapes shapes;
    int n_rep = 100;
    std::uint64_t seed = 42;
    SelectionCriterion criterion = SelectionCriterion::max_loglik;
    int threads = 0;  // 0 = hardware concurrency
};

/// Directed weight templates of the selection study: row-standardized rook
/// (W1*) and queen (W2*) contiguity with the upper-diagonal entries removed,
/// so information flows from low to high row-major indices.
std::pair<WeightMatrix, WeightMatrix> directed_study_weights(int rows, int cols);

struct MCCell {
    double mean_loglik = 0.0;
    double selection_pct = 0.0;  // of successfully compared replications
    int n_fitted = 0;
};

struct MCStudyResult {
    std::array<std::array<MCCell, 4>, 4> grid;  // [simulated][estimated]
    std::array<int, 4> failures{};              // replications with no usable comparison
    int n_rep = 0;
    std::uint64_t seed = 0;
    double runtime_seconds = 0.0;

    void write_csv(const std::string& path) const;
};

/// Simulates each of the four models n_rep times and estimates all four on
/// every replication (Monte Carlo selection study).
MCStudyResult run_mc_study(const MCConfig& config);

struct RecoveryEstimates {
    ModelKind kind;
    std::vector<double> rho, lambda, alpha;

    std::array<double, 3> quartiles_rho() const;
    std::array<double, 3> quartiles_lambda() const;
    std::array<double, 3> quartiles_alpha() const;
};

struct RecoveryStudyResult {
    std::array<RecoveryEstimates, 4> per_model;
    int n_rep = 0;
    std::uint64_t seed = 0;

    void write_csv(const std::string& path) const;
};

/// True-model parameter recovery: for each variant, refits the true model
/// to its own simulations and collects the estimates.
RecoveryStudyResult recovery_study(const MCConfig& config);

}  // namespace spgarch
