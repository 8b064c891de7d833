#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spgarch/csv.hpp"
#include "spgarch/diagnostics.hpp"
#include "spgarch/estimate.hpp"
#include "spgarch/io.hpp"
#include "spgarch/likelihood.hpp"
#include "spgarch/sar.hpp"
#include "spgarch/select.hpp"
#include "spgarch/simulate.hpp"

#ifndef SPGARCH_VERSION
#define SPGARCH_VERSION "dev"
#endif

namespace {

using namespace spgarch;

struct GridSize {
    int rows = 0;
    int cols = 0;
};

GridSize parse_grid(const std::string& text) {
    auto x = text.find_first_of("xX");
    if (x == std::string::npos) throw CLI::ValidationError("--grid expects RxC, e.g. 15x15");
    GridSize g;
    try {
        g.rows = std::stoi(text.substr(0, x));
        g.cols = std::stoi(text.substr(x + 1));
    } catch (const std::exception&) {
        throw CLI::ValidationError("--grid expects RxC, e.g. 15x15");
    }
    if (g.rows < 1 || g.cols < 1) throw CLI::ValidationError("--grid dimensions must be >= 1");
    return g;
}

/// Weight-source flags shared by the data-driven subcommands: either
/// explicit CSV files or the directed lattice templates of the study setup.
struct WeightArgs {
    std::string w1_path, w2_path, grid;

    void attach(CLI::App* cmd, bool required) {
        auto* w1 = cmd->add_option("--w1", w1_path, "W1* template CSV (i,j,w triplets)");
        auto* w2 = cmd->add_option("--w2", w2_path, "W2* template CSV (i,j,w triplets)");
        auto* g = cmd->add_option(
            "--grid", grid,
            "lattice RxC: use directed row-standardized rook/queen templates");
        w1->needs(w2);
        g->excludes(w1);
        if (required) {
            // one of the two sources must be given; validated at run time
        }
    }

    std::pair<WeightMatrix, WeightMatrix> resolve() const {
        if (!grid.empty()) {
            GridSize g = parse_grid(grid);
            return directed_study_weights(g.rows, g.cols);
        }
        if (w1_path.empty() || w2_path.empty())
            throw Error("weights required: give --grid RxC or both --w1 and --w2");
        return {load_weights_csv(w1_path), load_weights_csv(w2_path)};
    }
};

struct ShapeArgs {
    double theta = 0.5;
    double zeta = 0.0;
    double b = 2.0;
    std::string error_dist = "standard_normal";
    double bound = 0.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--theta", theta, "E-GARCH sign weight");
        cmd->add_option("--zeta", zeta, "E-GARCH magnitude weight");
        cmd->add_option("--b", b, "log-GARCH power");
        cmd->add_option("--error-dist", error_dist, "standard_normal | truncated_normal")
            ->check(CLI::IsMember({"standard_normal", "truncated_normal"}));
        cmd->add_option("--bound", bound, "truncation bound (required for truncated_normal)");
    }

    ErrorDist dist() const {
        if (error_dist == "truncated_normal") return ErrorDist::truncated_normal(bound);
        return ErrorDist::standard_normal();
    }

    ModelSpec spec(ModelKind kind) const {
        ModelSpec s;
        s.kind = kind;
        s.theta = theta;
        s.zeta = zeta;
        s.b = b;
        s.error_dist = dist();
        s.validate();
        return s;
    }
};

std::string join_args(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

struct ManifestScope {
    RunManifest manifest;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void finish() {
        if (manifest.output_paths.empty()) return;
        manifest.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest.write(manifest.output_paths.front() + ".manifest.json");
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial GARCH-type random fields: simulation, ML estimation, "
                 "model selection, SAR pipeline, and diagnostics"};
    app.set_version_flag("--version", std::string("spgarch ") + SPGARCH_VERSION);
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads,
                   "worker threads for replication-level parallelism (0 = all cores)")
        ->envname("SPGARCH_THREADS");

    ManifestScope scope;
    scope.manifest.command_line = join_args(argc, argv);
    scope.manifest.version = std::string("spgarch ") + SPGARCH_VERSION;

    // ---- simulate ----
    auto* cmd_sim = app.add_subcommand("simulate", "simulate one spatial GARCH-type field");
    std::string sim_model, sim_out, sim_heatmap;
    double sim_rho = 0.5, sim_lambda = 0.4, sim_alpha = 1.0;
    std::uint64_t sim_seed = 1;
    int sim_max_rej = 100;
    WeightArgs sim_weights;
    ShapeArgs sim_shapes;
    cmd_sim->add_option("--model", sim_model, "spgarch | egarch | loggarch | hgarch")
        ->required();
    sim_weights.attach(cmd_sim, true);
    cmd_sim->add_option("--rho", sim_rho, "W1* scale");
    cmd_sim->add_option("--lambda", sim_lambda, "W2* scale");
    cmd_sim->add_option("--alpha", sim_alpha, "variance level");
    cmd_sim->add_option("--seed", sim_seed, "RNG seed");
    cmd_sim->add_option("--max-rejections", sim_max_rej, "redraw budget for non-positive h");
    sim_shapes.attach(cmd_sim);
    cmd_sim->add_option("--out", sim_out, "output field CSV")->required();
    cmd_sim->add_option("--heatmap", sim_heatmap, "optional PGM heatmap of y (grid mode only)");

    // ---- fit ----
    auto* cmd_fit = app.add_subcommand("fit", "maximum-likelihood fit of one model");
    std::string fit_model, fit_data, fit_out;
    bool fit_est_theta = false, fit_est_b = false;
    WeightArgs fit_weights;
    ShapeArgs fit_shapes;
    cmd_fit->add_option("--model", fit_model)->required();
    cmd_fit->add_option("--data", fit_data, "field CSV with a y column")->required();
    fit_weights.attach(cmd_fit, true);
    fit_shapes.attach(cmd_fit);
    cmd_fit->add_flag("--estimate-theta", fit_est_theta, "estimate theta (egarch)");
    cmd_fit->add_flag("--estimate-b", fit_est_b, "estimate b (loggarch)");
    cmd_fit->add_option("--out", fit_out, "output fit JSON")->required();

    // ---- loglik ----
    auto* cmd_ll = app.add_subcommand("loglik", "evaluate the log-likelihood at given parameters");
    std::string ll_model, ll_data;
    std::vector<double> ll_params;
    WeightArgs ll_weights;
    ShapeArgs ll_shapes;
    cmd_ll->add_option("--model", ll_model)->required();
    cmd_ll->add_option("--params", ll_params, "rho lambda alpha")->expected(3)->required();
    cmd_ll->add_option("--data", ll_data)->required();
    ll_weights.attach(cmd_ll, true);
    ll_shapes.attach(cmd_ll);

    // ---- select ----
    auto* cmd_sel = app.add_subcommand("select", "fit all four variants and pick the best");
    std::string sel_data, sel_criterion = "max_loglik", sel_out;
    WeightArgs sel_weights;
    ShapeArgs sel_shapes;
    cmd_sel->add_option("--data", sel_data)->required();
    sel_weights.attach(cmd_sel, true);
    sel_shapes.attach(cmd_sel);
    cmd_sel->add_option("--criterion", sel_criterion)
        ->check(CLI::IsMember({"max_loglik", "bic"}));
    cmd_sel->add_option("--out", sel_out, "optional report JSON");

    // ---- mc-study ----
    auto* cmd_mc = app.add_subcommand("mc-study", "selection study over the four variants");
    std::string mc_grid = "15x15", mc_out, mc_criterion = "max_loglik";
    double mc_rho = 0.5, mc_lambda = 0.4, mc_alpha = 1.0;
    int mc_reps = 100;
    std::uint64_t mc_seed = 42;
    ShapeArgs mc_shapes;
    cmd_mc->add_option("--grid", mc_grid, "lattice RxC");
    cmd_mc->add_option("--rho", mc_rho);
    cmd_mc->add_option("--lambda", mc_lambda);
    cmd_mc->add_option("--alpha", mc_alpha);
    cmd_mc->add_option("--reps", mc_reps, "replications per simulated model");
    cmd_mc->add_option("--seed", mc_seed);
    cmd_mc->add_option("--criterion", mc_criterion)
        ->check(CLI::IsMember({"max_loglik", "bic"}));
    mc_shapes.attach(cmd_mc);
    cmd_mc->add_option("--out", mc_out, "output CSV (tidy: one row per cell)")->required();

    // ---- recovery ----
    auto* cmd_rec = app.add_subcommand("recovery", "true-model parameter recovery study");
    std::string rec_grid = "15x15", rec_out;
    double rec_rho = 0.5, rec_lambda = 0.4, rec_alpha = 1.0;
    int rec_reps = 100;
    std::uint64_t rec_seed = 42;
    ShapeArgs rec_shapes;
    cmd_rec->add_option("--grid", rec_grid);
    cmd_rec->add_option("--rho", rec_rho);
    cmd_rec->add_option("--lambda", rec_lambda);
    cmd_rec->add_option("--alpha", rec_alpha);
    cmd_rec->add_option("--reps", rec_reps);
    cmd_rec->add_option("--seed", rec_seed);
    rec_shapes.attach(cmd_rec);
    cmd_rec->add_option("--out", rec_out, "output CSV (one row per replication)")->required();

    // ---- pipeline ----
    auto* cmd_pipe = app.add_subcommand(
        "pipeline", "SAR mean fit, then GARCH variants on the residuals (W1* = W2* = W)");
    std::string pipe_data, pipe_w, pipe_models = "spgarch,egarch,loggarch", pipe_out;
    int pipe_perms = 999;
    std::uint64_t pipe_seed = 7;
    ShapeArgs pipe_shapes;
    cmd_pipe->add_option("--data", pipe_data, "CSV with columns id,y")->required();
    cmd_pipe->add_option("--w", pipe_w, "contiguity CSV (i,j,w)")->required();
    cmd_pipe->add_option("--models", pipe_models, "comma-separated model kinds");
    cmd_pipe->add_option("--perms", pipe_perms, "Geary permutation count");
    cmd_pipe->add_option("--seed", pipe_seed);
    pipe_shapes.attach(cmd_pipe);
    cmd_pipe->add_option("--out", pipe_out, "report JSON")->required();

    // ---- diagnose ----
    auto* cmd_diag = app.add_subcommand("diagnose", "spatial dependence diagnostics");
    std::string diag_data, diag_w, diag_stat = "geary";
    int diag_perms = 999;
    std::uint64_t diag_seed = 7;
    cmd_diag->add_option("--data", diag_data)->required();
    cmd_diag->add_option("--w", diag_w)->required();
    cmd_diag->add_option("--stat", diag_stat)->check(CLI::IsMember({"geary"}));
    cmd_diag->add_option("--perms", diag_perms);
    cmd_diag->add_option("--seed", diag_seed);

    // ---- weights ----
    auto* cmd_w = app.add_subcommand("weights", "build a lattice contiguity matrix");
    std::string w_grid, w_scheme = "rook", w_out;
    bool w_std = false, w_tri = false;
    cmd_w->add_option("--grid", w_grid, "lattice RxC")->required();
    cmd_w->add_option("--scheme", w_scheme)->check(CLI::IsMember({"rook", "queen"}));
    cmd_w->add_flag("--row-standardize", w_std);
    cmd_w->add_flag("--triangularize", w_tri);
    cmd_w->add_option("--out", w_out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*cmd_sim) {
            auto [w1, w2] = sim_weights.resolve();
            SimConfig cfg{sim_shapes.spec(model_kind_from_string(sim_model)),
                          ParamVector{sim_rho, sim_lambda, sim_alpha}, w1, w2, sim_seed,
                          sim_max_rej};
            SpatialField field = simulate_field(cfg);
            GridSize g{0, 0};
            if (!sim_weights.grid.empty()) g = parse_grid(sim_weights.grid);
            save_field_csv(field, sim_out, g.rows, g.cols);
            scope.manifest.seed = sim_seed;
            scope.manifest.output_paths.push_back(sim_out);
            if (!sim_heatmap.empty()) {
                if (g.rows == 0) throw Error("--heatmap needs --grid mode");
                save_pgm_heatmap(field.y, g.rows, g.cols, sim_heatmap);
                scope.manifest.output_paths.push_back(sim_heatmap);
            }
        } else if (*cmd_fit) {
            auto [w1, w2] = fit_weights.resolve();
            SpatialField field = load_field_csv(fit_data);
            FitOptions opts;
            opts.estimate_theta = fit_est_theta;
            opts.estimate_b = fit_est_b;
            FitResult result =
                fit(field.y, fit_shapes.spec(model_kind_from_string(fit_model)), w1, w2, opts);
            std::ofstream out(fit_out);
            if (!out) throw IoError("cannot write " + fit_out);
            out << result.to_json() << "\n";
            scope.manifest.input_digests.emplace_back(fit_data, file_digest(fit_data));
            scope.manifest.output_paths.push_back(fit_out);
            std::cout << "loglik " << format_double(result.loglik) << " converged "
                      << (result.converged ? "true" : "false") << "\n";
        } else if (*cmd_ll) {
            auto [w1, w2] = ll_weights.resolve();
            SpatialField field = load_field_csv(ll_data);
            ParamVector params{ll_params[0], ll_params[1], ll_params[2]};
            auto r = log_likelihood_checked(
                field.y, params, w1, w2, ll_shapes.spec(model_kind_from_string(ll_model)));
            std::cout << format_double(r.value) << "\n";
            if (!r.ok()) std::cerr << "diagnostic: " << r.diagnostic << "\n";
        } else if (*cmd_sel) {
            auto [w1, w2] = sel_weights.resolve();
            SpatialField field = load_field_csv(sel_data);
            FixedShapes shapes{sel_shapes.theta, sel_shapes.zeta, sel_shapes.b,
                               sel_shapes.dist()};
            auto criterion = sel_criterion == "bic" ? SelectionCriterion::bic
                                                    : SelectionCriterion::max_loglik;
            SelectionReport report = select_model(field.y, w1, w2, shapes, criterion);
            nlohmann::json j;
            j["chosen"] = to_string(report.chosen);
            j["criterion"] = sel_criterion;
            for (const auto& entry : report.fits) {
                nlohmann::json fj;
                if (entry.ok) {
                    fj = nlohmann::json::parse(entry.fit.to_json());
                    fj.erase("residuals");
                } else {
                    fj["failure"] = entry.failure;
                }
                j["fits"][to_string(entry.kind)] = fj;
            }
            std::cout << j.dump(2) << "\n";
            if (!sel_out.empty()) {
                std::ofstream out(sel_out);
                out << j.dump(2) << "\n";
                scope.manifest.input_digests.emplace_back(sel_data, file_digest(sel_data));
                scope.manifest.output_paths.push_back(sel_out);
            }
        } else if (*cmd_mc) {
            GridSize g = parse_grid(mc_grid);
            MCConfig cfg;
            cfg.rows = g.rows;
            cfg.cols = g.cols;
            cfg.params = ParamVector{mc_rho, mc_lambda, mc_alpha};
            cfg.shapes = FixedShapes{mc_shapes.theta, mc_shapes.zeta, mc_shapes.b,
                                     mc_shapes.dist()};
            cfg.n_rep = mc_reps;
            cfg.seed = mc_seed;
            cfg.criterion = mc_criterion == "bic" ? SelectionCriterion::bic
                                                  : SelectionCriterion::max_loglik;
            cfg.threads = threads;
            MCStudyResult result = run_mc_study(cfg);
            result.write_csv(mc_out);
            scope.manifest.seed = mc_seed;
            scope.manifest.output_paths.push_back(mc_out);
            std::cout << "mc-study finished in " << result.runtime_seconds << " s\n";
        } else if (*cmd_rec) {
            GridSize g = parse_grid(rec_grid);
            MCConfig cfg;
            cfg.rows = g.rows;
            cfg.cols = g.cols;
            cfg.params = ParamVector{rec_rho, rec_lambda, rec_alpha};
            cfg.shapes = FixedShapes{rec_shapes.theta, rec_shapes.zeta, rec_shapes.b,
                                     rec_shapes.dist()};
            cfg.n_rep = rec_reps;
            cfg.seed = rec_seed;
            cfg.threads = threads;
            RecoveryStudyResult result = recovery_study(cfg);
            result.write_csv(rec_out);
            scope.manifest.seed = rec_seed;
            scope.manifest.output_paths.push_back(rec_out);
        } else if (*cmd_pipe) {
            WeightMatrix w = load_weights_csv(pipe_w);
            SpatialField field = load_field_csv(pipe_data);
            std::vector<ModelSpec> specs;
            std::stringstream ss(pipe_models);
            std::string name;
            while (std::getline(ss, name, ','))
                specs.push_back(pipe_shapes.spec(model_kind_from_string(name)));
            PipelineReport report = pipeline(field.y, w, specs, pipe_perms, pipe_seed);
            std::ofstream out(pipe_out);
            if (!out) throw IoError("cannot write " + pipe_out);
            out << report.to_json() << "\n";
            scope.manifest.seed = pipe_seed;
            scope.manifest.input_digests.emplace_back(pipe_data, file_digest(pipe_data));
            scope.manifest.input_digests.emplace_back(pipe_w, file_digest(pipe_w));
            scope.manifest.output_paths.push_back(pipe_out);
            std::cout << "best by BIC: " << to_string(report.best_by_bic) << "\n";
        } else if (*cmd_diag) {
            WeightMatrix w = load_weights_csv(diag_w);
            SpatialField field = load_field_csv(diag_data);
            double c = gearys_c(field.y, w);
            double p = permutation_pvalue(field.y, w, diag_perms, diag_seed);
            std::cout << "geary_c " << format_double(c) << " p_value " << format_double(p)
                      << "\n";
        } else if (*cmd_w) {
            GridSize g = parse_grid(w_grid);
            WeightMatrix w = build_grid_contiguity(
                g.rows, g.cols, w_scheme == "queen" ? GridScheme::queen : GridScheme::rook);
            if (w_std) w = row_standardize(w);
            if (w_tri) w = lower_triangularize(w);
            save_weights_csv(w, w_out);
            scope.manifest.output_paths.push_back(w_out);
        }
        scope.finish();
    } catch (const Error& e) {
        nlohmann::json err;
        err["error"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
