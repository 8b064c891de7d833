#include "spgarch/select.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "spgarch/csv.hpp"
#include "spgarch/stats.hpp"

namespace spgarch {

ModelSpec FixedShapes::spec_for(ModelKind kind) const {
    ModelSpec spec;
    spec.kind = kind;
    spec.theta = theta;
    spec.zeta = zeta;
    spec.b = b;
    spec.error_dist = error_dist;
    return spec;
}

SelectionReport select_model(const Vector& y, const WeightMatrix& w1_star,
                             const WeightMatrix& w2_star, const FixedShapes& shapes,
                             SelectionCriterion criterion) {
    SelectionReport report;
    report.criterion = criterion;
    bool any_ok = false;
    double best = -std::numeric_limits<double>::infinity();
    for (ModelKind kind : kAllModels) {
        ModelFitEntry entry;
        entry.kind = kind;
        try {
            entry.fit = fit(y, shapes.spec_for(kind), w1_star, w2_star);
            entry.ok = std::isfinite(entry.fit.loglik);
            if (!entry.ok) entry.failure = "non-finite log-likelihood";
        } catch (const Error& e) {
            entry.failure = e.what();
        }
        if (entry.ok) {
            double score = criterion == SelectionCriterion::max_loglik ? entry.fit.loglik
                                                                       : -entry.fit.bic;
            if (!any_ok || score > best) {
                best = score;
                report.chosen = kind;
            }
            any_ok = true;
        }
        report.fits.push_back(std::move(entry));
    }
    if (!any_ok) throw AllFitsFailed("select_model: every candidate fit failed");
    return report;
}

std::pair<WeightMatrix, WeightMatrix> directed_study_weights(int rows, int cols) {
    WeightMatrix rook = build_grid_contiguity(rows, cols, GridScheme::rook);
    WeightMatrix queen = build_grid_contiguity(rows, cols, GridScheme::queen);
    // Standardize after cutting the upper triangle so the surviving rows
    // sum to 1: the templates stay row-standardized while the process runs
    // strictly from low to high row-major indices.
    return {row_standardize(lower_triangularize(rook)),
            row_standardize(lower_triangularize(queen))};
}

namespace {

int model_index(ModelKind kind) {
    auto it = std::find(kAllModels.begin(), kAllModels.end(), kind);
    return static_cast<int>(it - kAllModels.begin());
}

std::uint64_t replication_stream(int true_model, int rep) {
    return (static_cast<std::uint64_t>(true_model) << 32) | static_cast<std::uint64_t>(rep);
}

int effective_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs job(index) for index in [0, count) across a small thread pool.
void parallel_for(int count, int threads, const std::function<void(int)>& job) {
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

MCStudyResult run_mc_study(const MCConfig& config) {
    if (config.n_rep < 1) throw Error("run_mc_study: n_rep must be >= 1");
    auto t0 = std::chrono::steady_clock::now();
    auto [w1, w2] = directed_study_weights(config.rows, config.cols);

    MCStudyResult result;
    result.n_rep = config.n_rep;
    result.seed = config.seed;

    const int threads = effective_threads(config.threads);
    for (int sim = 0; sim < 4; ++sim) {
        SimConfig sim_cfg{config.shapes.spec_for(kAllModels[sim]), config.params, w1, w2,
                          config.seed};
        // Per-replication results, aggregated afterwards in a fixed order.
        std::vector<std::array<double, 4>> logliks(config.n_rep);
        std::vector<std::array<bool, 4>> ok(config.n_rep);
        std::mutex error_mutex;
        std::string first_error;
        parallel_for(config.n_rep, threads, [&](int rep) {
            try {
                SpatialField field = simulate_field(sim_cfg, replication_stream(sim, rep));
                for (int est = 0; est < 4; ++est) {
                    try {
                        FitResult f = fit(field.y, config.shapes.spec_for(kAllModels[est]),
                                          w1, w2);
                        double score = config.criterion == SelectionCriterion::max_loglik
                                           ? f.loglik
                                           : -f.bic;
                        ok[rep][est] = std::isfinite(score);
                        logliks[rep][est] = f.loglik;
                    } catch (const Error&) {
                        ok[rep][est] = false;
                        logliks[rep][est] = -std::numeric_limits<double>::infinity();
                    }
                }
            } catch (const Error& e) {
                ok[rep] = {false, false, false, false};
                std::scoped_lock lock(error_mutex);
                if (first_error.empty()) first_error = e.what();
            }
        });

        std::array<std::vector<double>, 4> ll_samples;
        std::array<int, 4> selected{};
        int compared = 0;
        for (int rep = 0; rep < config.n_rep; ++rep) {
            bool any = false;
            int arg_best = -1;
            double best = -std::numeric_limits<double>::infinity();
            for (int est = 0; est < 4; ++est) {
                if (!ok[rep][est]) continue;
                any = true;
                ll_samples[est].push_back(logliks[rep][est]);
                if (logliks[rep][est] > best) {
                    best = logliks[rep][est];
                    arg_best = est;
                }
            }
            if (any) {
                ++selected[arg_best];
                ++compared;
            } else {
                ++result.failures[sim];
            }
        }
        for (int est = 0; est < 4; ++est) {
            auto& cell = result.grid[sim][est];
            cell.n_fitted = static_cast<int>(ll_samples[est].size());
            cell.mean_loglik =
                cell.n_fitted ? pairwise_sum(ll_samples[est]) / cell.n_fitted : 0.0;
            cell.selection_pct = compared ? 100.0 * selected[est] / compared : 0.0;
        }
    }
    result.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

void MCStudyResult::write_csv(const std::string& path) const {
    CsvWriter out(path, {"simulated", "estimated", "mean_loglik", "selection_pct", "n_fitted"});
    for (int sim = 0; sim < 4; ++sim) {
        for (int est = 0; est < 4; ++est) {
            const auto& cell = grid[sim][est];
            out.raw_row({to_string(kAllModels[sim]), to_string(kAllModels[est]),
                         format_double(cell.mean_loglik), format_double(cell.selection_pct),
                         std::to_string(cell.n_fitted)});
        }
    }
}

namespace {

std::array<double, 3> quartiles(std::vector<double> v) {
    if (v.empty()) return {0.0, 0.0, 0.0};
    std::sort(v.begin(), v.end());
    auto q = [&](double p) {
        double pos = p * (v.size() - 1);
        size_t lo = static_cast<size_t>(pos);
        size_t hi = std::min(lo + 1, v.size() - 1);
        double frac = pos - lo;
        return v[lo] * (1.0 - frac) + v[hi] * frac;
    };
    return {q(0.25), q(0.5), q(0.75)};
}

}  // namespace

std::array<double, 3> RecoveryEstimates::quartiles_rho() const { return quartiles(rho); }
std::array<double, 3> RecoveryEstimates::quartiles_lambda() const { return quartiles(lambda); }
std::array<double, 3> RecoveryEstimates::quartiles_alpha() const { return quartiles(alpha); }

RecoveryStudyResult recovery_study(const MCConfig& config) {
    if (config.n_rep < 1) throw Error("recovery_study: n_rep must be >= 1");
    auto [w1, w2] = directed_study_weights(config.rows, config.cols);
    RecoveryStudyResult result;
    result.n_rep = config.n_rep;
    result.seed = config.seed;

    const int threads = effective_threads(config.threads);
    for (int m = 0; m < 4; ++m) {
        result.per_model[m].kind = kAllModels[m];
        SimConfig sim_cfg{config.shapes.spec_for(kAllModels[m]), config.params, w1, w2,
                          config.seed};
        std::vector<std::optional<ParamVector>> estimates(config.n_rep);
        parallel_for(config.n_rep, threads, [&](int rep) {
            try {
                SpatialField field = simulate_field(sim_cfg, replication_stream(m, rep));
                FitResult f = fit(field.y, sim_cfg.spec, w1, w2);
                if (std::isfinite(f.loglik)) estimates[rep] = f.params_hat;
            } catch (const Error&) {
            }
        });
        for (const auto& e : estimates) {
            if (!e) continue;
            result.per_model[m].rho.push_back(e->rho);
            result.per_model[m].lambda.push_back(e->lambda);
            result.per_model[m].alpha.push_back(e->alpha);
        }
    }
    return result;
}

void RecoveryStudyResult::write_csv(const std::string& path) const {
    CsvWriter out(path, {"model", "replication", "rho_hat", "lambda_hat", "alpha_hat"});
    for (const auto& pm : per_model) {
        for (size_t r = 0; r < pm.rho.size(); ++r) {
            out.raw_row({to_string(pm.kind), std::to_string(r), format_double(pm.rho[r]),
                         format_double(pm.lambda[r]), format_double(pm.alpha[r])});
        }
    }
}

}  // namespace spgarch
