#include "duet/cli.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>

#include "duet/evaluation.hpp"
#include "duet/io.hpp"
#include "duet/model_selection.hpp"
#include "duet/parallel.hpp"
#include "duet/simulation.hpp"
#include "duet/text.hpp"

namespace duet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
void take(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* known : keys) ok = ok || k == known;
        if (!ok) throw InputError("config: unknown key '" + where + k + "'");
    }
}

void apply_paths(RunPaths& p, const json& j) {
    reject_unknown(j, {"counts", "coords", "reference", "sc_counts", "sc_labels", "markers", "edges", "out", "fit",
                       "truth", "trace"},
                   "paths.");
    take(j, "counts", p.counts);
    take(j, "coords", p.coords);
    take(j, "reference", p.reference);
    take(j, "sc_counts", p.sc_counts);
    take(j, "sc_labels", p.sc_labels);
    take(j, "markers", p.markers);
    take(j, "edges", p.edges);
    take(j, "out", p.out);
    take(j, "fit", p.fit);
    take(j, "truth", p.truth);
    take(j, "trace", p.trace);
}

void apply_pgd(PgdSettings& p, const json& j, const std::string& where) {
    reject_unknown(j, {"max_iters", "tol", "armijo_c", "backtrack_factor", "init_step", "stationarity_tol"}, where);
    take(j, "max_iters", p.max_iters);
    take(j, "tol", p.tol);
    take(j, "armijo_c", p.armijo_c);
    take(j, "backtrack_factor", p.backtrack_factor);
    take(j, "init_step", p.init_step);
    take(j, "stationarity_tol", p.stationarity_tol);
}

void apply_solver(SolverConfig& s, const json& j) {
    reject_unknown(j, {"outer_tol", "outer_max_iters", "fuse_tol", "admm", "spotwise"}, "solver.");
    take(j, "outer_tol", s.outer_tol);
    take(j, "outer_max_iters", s.outer_max_iters);
    take(j, "fuse_tol", s.fuse_tol);
    if (j.contains("admm")) {
        const auto& a = j.at("admm");
        reject_unknown(a, {"rho_init", "tau", "mu", "eps_abs", "eps_rel", "max_iters", "rho_min", "rho_max", "adapt_iters",
                           "pgd"},
                       "solver.admm.");
        take(a, "rho_init", s.admm.rho_init);
        take(a, "tau", s.admm.tau);
        take(a, "mu", s.admm.mu);
        take(a, "eps_abs", s.admm.eps_abs);
        take(a, "eps_rel", s.admm.eps_rel);
        take(a, "max_iters", s.admm.max_iters);
        take(a, "rho_min", s.admm.rho_min);
        take(a, "rho_max", s.admm.rho_max);
        take(a, "adapt_iters", s.admm.adapt_iters);
        if (a.contains("pgd")) apply_pgd(s.admm.pgd, a.at("pgd"), "solver.admm.pgd.");
    }
    if (j.contains("spotwise")) {
        const auto& w = j.at("spotwise");
        reject_unknown(w, {"max_rounds", "tol", "pgd"}, "solver.spotwise.");
        take(w, "max_rounds", s.spotwise.max_rounds);
        take(w, "tol", s.spotwise.tol);
        if (w.contains("pgd")) apply_pgd(s.spotwise.pgd, w.at("pgd"), "solver.spotwise.pgd.");
    }
}

void apply_weights(WeightConfig& w, const json& j) {
    reject_unknown(j, {"k_star", "k_dstar", "prune_pct", "floor_frac", "adjacency_factor"}, "weights.");
    take(j, "k_star", w.k_star);
    take(j, "k_dstar", w.k_dstar);
    take(j, "prune_pct", w.prune_pct);
    take(j, "floor_frac", w.floor_frac);
    take(j, "adjacency_factor", w.adjacency_factor);
}

}  // namespace

void apply_config(RunConfig& cfg, const json& j) {
    if (!j.is_object()) throw InputError("config: top level must be a JSON object");
    try {
        reject_unknown(j,
                       {"paths", "weights", "solver", "lambda", "lambda_max", "n_lambda", "decades", "append_zero",
                        "method", "epsilon", "seed", "approx", "min_spot_count", "grid_side", "n_clusters",
                        "smoothness", "size_factor_max", "counts", "coords", "reference", "sc_counts", "sc_labels",
                        "markers", "edges", "out", "fit", "truth", "trace"},
                       "");
        json flat_paths = json::object();
        for (const char* k : {"counts", "coords", "reference", "sc_counts", "sc_labels", "markers", "edges", "out",
                              "fit", "truth", "trace"})
            if (j.contains(k)) flat_paths[k] = j.at(k);
        apply_paths(cfg.paths, flat_paths);
        if (j.contains("paths")) apply_paths(cfg.paths, j.at("paths"));
        if (j.contains("weights")) apply_weights(cfg.weights, j.at("weights"));
        if (j.contains("solver")) apply_solver(cfg.solver, j.at("solver"));
        if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
        if (j.contains("lambda_max")) cfg.lambda_max = j.at("lambda_max").get<double>();
        take(j, "n_lambda", cfg.n_lambda);
        take(j, "decades", cfg.decades);
        take(j, "append_zero", cfg.append_zero);
        take(j, "method", cfg.method);
        take(j, "epsilon", cfg.epsilon);
        take(j, "seed", cfg.seed);
        take(j, "approx", cfg.approx);
        take(j, "min_spot_count", cfg.qc.min_spot_count);
        take(j, "grid_side", cfg.grid_side);
        take(j, "n_clusters", cfg.n_clusters);
        take(j, "smoothness", cfg.smoothness);
        take(j, "size_factor_max", cfg.size_factor_max);
    } catch (const json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
}

namespace {

std::optional<std::string> prescan_config(int argc, char** argv) {
    for (int a = 1; a < argc; ++a) {
        const std::string_view arg = argv[a];
        if (arg == "--config" && a + 1 < argc) return std::string(argv[a + 1]);
        if (arg.rfind("--config=", 0) == 0) return std::string(arg.substr(9));
    }
    return std::nullopt;
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw InputError(std::string("missing required input ") + flag);
}

ReferenceMatrix load_reference(const RunConfig& cfg) {
    if (!cfg.paths.reference.empty()) {
        auto is = io::open_in(cfg.paths.reference);
        return apply_pseudocount(io::read_reference(is));
    }
    if (cfg.paths.sc_counts.empty() || cfg.paths.sc_labels.empty())
        throw InputError("need --reference, or --sc-counts with --sc-labels");
    auto cs = io::open_in(cfg.paths.sc_counts);
    const auto sc = io::read_counts(cs);
    auto ls = io::open_in(cfg.paths.sc_labels);
    const auto labels = io::read_cell_labels(ls, sc.spot_ids);
    std::optional<std::vector<std::string>> markers;
    if (!cfg.paths.markers.empty()) {
        auto ms = io::open_in(cfg.paths.markers);
        markers = io::read_gene_list(ms);
    }
    return io::build_reference(sc, labels, markers);
}

AlignedInputs load_dataset(const RunConfig& cfg) {
    require(cfg.paths.counts, "--counts");
    require(cfg.paths.coords, "--coords");
    const auto expr = io::read_expression(cfg.paths.counts, cfg.paths.coords);
    return validate_inputs(expr, load_reference(cfg), cfg.qc);
}

FusionGraph load_or_build_graph(const RunConfig& cfg, const AlignedInputs& data, const SpotwiseFit& pilot) {
    if (!cfg.paths.edges.empty()) {
        auto is = io::open_in(cfg.paths.edges);
        return read_edge_list(is, static_cast<int>(data.expr.n_spots()));
    }
    return build_fusion_graph_from_pilot(data.expr.coords, pilot.theta, cfg.weights);
}

void name_result(FitResult& r, const AlignedInputs& data) {
    r.spot_ids = data.expr.spot_ids;
    r.celltype_ids = data.ref.celltype_ids;
}

std::string scenario_name(int clusters, int smoothness, int side) {
    return "C" + std::to_string(clusters) + "_S" + std::to_string(smoothness) + "_G" + std::to_string(side);
}

/// From the truth directory's scenario.json when present, else from the run config.
std::string scenario_name(const RunConfig& cfg) {
    const fs::path meta = fs::path(cfg.paths.truth) / "scenario.json";
    if (!cfg.paths.truth.empty() && fs::exists(meta)) {
        auto is = io::open_in(meta);
        try {
            const json j = json::parse(is);
            return scenario_name(j.at("n_clusters").get<int>(), j.at("smoothness").get<int>(),
                                 j.at("grid_side").get<int>());
        } catch (const json::exception& e) {
            throw InputError(meta.string() + ": " + e.what());
        }
    }
    return scenario_name(cfg.n_clusters, cfg.smoothness, cfg.grid_side);
}

int run_simulate(const RunConfig& cfg, bool triplet) {
    require(cfg.paths.out, "--out");
    sim::SimulationScenario sc;
    sc.grid_side = cfg.grid_side;
    sc.n_clusters = cfg.n_clusters;
    sc.smoothness = cfg.smoothness;
    sc.size_factor_max = cfg.size_factor_max;
    sc.seed = cfg.seed;
    if (!cfg.paths.reference.empty()) {
        auto is = io::open_in(cfg.paths.reference);
        sc.reference = apply_pseudocount(io::read_reference(is));
    } else {
        sc.reference = sim::default_reference();
    }
    const auto truth = sim::gen_ground_truth(sc);
    const auto expr = sim::gen_counts(truth, sc.reference);

    const fs::path out = cfg.paths.out;
    fs::create_directories(out);
    io::write_expression(out / (triplet ? "counts.txt" : "counts.csv"), out / "coords.csv", expr, triplet);
    const auto ids = triplet ? std::vector<std::string>{} : expr.spot_ids;
    {
        // Triplet files identify genes by row index, so the reference follows suit.
        auto ref = sc.reference;
        if (triplet)
            for (std::size_t g = 0; g < ref.gene_ids.size(); ++g) ref.gene_ids[g] = std::to_string(g);
        auto os = io::open_out(out / "reference.csv");
        io::write_reference(os, ref);
    }
    {
        auto os = io::open_out(out / "truth_theta.csv");
        io::write_composition(os, ids, sc.reference.celltype_ids, truth.theta_star);
    }
    {
        auto os = io::open_out(out / "truth_v.csv");
        io::write_composition(os, ids, sc.reference.celltype_ids, truth.v_star);
    }
    {
        auto os = io::open_out(out / "truth_s.csv");
        io::write_size_factors(os, ids, truth.s_star);
    }
    {
        auto os = io::open_out(out / "truth_labels.csv");
        io::write_labels(os, ids, truth.labels.labels);
    }
    json meta;
    meta["grid_side"] = sc.grid_side;
    meta["n_clusters"] = sc.n_clusters;
    meta["smoothness"] = sc.smoothness;
    meta["size_factor_max"] = sc.size_factor_max;
    meta["seed"] = sc.seed;
    auto os = io::open_out(out / "scenario.json");
    os << meta.dump(2) << '\n';
    return 0;
}

int run_weights(const RunConfig& cfg) {
    require(cfg.paths.out, "--out");
    const auto data = load_dataset(cfg);
    const auto pilot = spotwise_deconvolve(data.expr.counts, data.ref.values, cfg.solver.spotwise);
    const auto graph = build_fusion_graph_from_pilot(data.expr.coords, pilot.theta, cfg.weights);
    auto os = io::open_out(cfg.paths.out);
    write_edge_list(os, graph);
    return 0;
}

int run_fit(RunConfig cfg) {
    require(cfg.paths.out, "--out");
    if (!cfg.lambda) throw InputError("missing required input --lambda");
    const auto data = load_dataset(cfg);
    const auto pilot = spotwise_deconvolve(data.expr.counts, data.ref.values, cfg.solver.spotwise);
    const auto graph = load_or_build_graph(cfg, data, pilot);

    std::ofstream trace;
    if (!cfg.paths.trace.empty()) {
        trace = io::open_out(cfg.paths.trace);
        trace << "iter,objective,primal,dual,rho,n_fused_edges\n";
        cfg.solver.admm.trace = &trace;
    }
    FitResult res;
    if (cfg.approx) {
        res = fit_approx_counts(data.expr.counts, data.ref.values, graph, *cfg.lambda, cfg.solver, &pilot);
    } else {
        FitInit init{pilot.theta, pilot.s, std::nullopt};
        res = fit_counts(data.expr.counts, data.ref.values, graph, *cfg.lambda, cfg.solver, &init).result;
    }
    name_result(res, data);
    io::write_fit(res, cfg.paths.out);
    if (!res.converged) std::cerr << "duet: warning: fit did not meet its convergence criteria\n";
    return 0;
}

int run_tune(const RunConfig& cfg) {
    require(cfg.paths.out, "--out");
    const fs::path out = cfg.paths.out;
    const auto data = load_dataset(cfg);
    const auto& B = data.ref.values;
    json meta;
    meta["method"] = cfg.method;

    if (cfg.method == "fixed") {
        if (!cfg.lambda) throw InputError("--method fixed needs --lambda");
        const auto pilot = spotwise_deconvolve(data.expr.counts, B, cfg.solver.spotwise);
        const auto graph = load_or_build_graph(cfg, data, pilot);
        FitInit init{pilot.theta, pilot.s, std::nullopt};
        auto res = fit_counts(data.expr.counts, B, graph, *cfg.lambda, cfg.solver, &init).result;
        name_result(res, data);
        io::write_fit(res, out / "fit");
        meta["best_lambda"] = *cfg.lambda;
    } else if (cfg.method == "bic" || cfg.method == "thinning") {
        const bool thin = cfg.method == "thinning";
        // The graph always comes from the full data; the path is fitted on the
        // training part when thinning.
        const auto pilot_full = spotwise_deconvolve(data.expr.counts, B, cfg.solver.spotwise);
        const auto graph = load_or_build_graph(cfg, data, pilot_full);
        std::optional<ThinnedPair> parts;
        if (thin) parts = thin_poisson(data.expr, cfg.epsilon, cfg.seed);
        const Eigen::MatrixXd& counts = thin ? parts->train.counts : data.expr.counts;
        const auto pilot = thin ? spotwise_deconvolve(counts, B, cfg.solver.spotwise) : pilot_full;

        double lmax = 0.0;
        if (cfg.lambda_max) {
            lmax = *cfg.lambda_max;
        } else {
            const auto search = find_lambda_max(counts, B, graph, cfg.solver, &pilot);
            lmax = search.lambda_max;
            meta["doublings"] = search.doublings;
        }
        meta["lambda_max"] = lmax;
        const auto grid = make_lambda_grid(lmax, cfg.n_lambda, cfg.decades, cfg.append_zero);
        auto path = fit_path_counts(counts, B, graph, grid, cfg.solver, &pilot);

        std::vector<SelectionRow> rows;
        std::size_t best = 0;
        for (std::size_t t = 0; t < path.size(); ++t) {
            const auto& f = path[t];
            SelectionRow row;
            row.lambda = f.lambda;
            row.n_clusters = f.clusters.n_clusters();
            row.train_nll = total_nll(counts, B, f.theta_hat, f.s_hat);
            row.bic = bic(f, counts, B);
            row.test_loglik = thin ? poisson_loglik(parts->test.counts, B, f.theta_hat, f.s_hat,
                                                    (1.0 - cfg.epsilon) / cfg.epsilon)
                                   : std::numeric_limits<double>::quiet_NaN();
            rows.push_back(row);
            if (t == 0) continue;
            const auto& b = rows[best];
            const bool better = thin ? row.test_loglik > b.test_loglik
                                     : (row.bic < b.bic || (row.bic == b.bic && row.lambda > b.lambda));
            if (better) best = t;
        }
        {
            auto os = io::open_out(out / "selection.csv");
            write_selection_report(os, rows);
        }
        FitResult chosen;
        if (thin) {
            // The Theta-dependent part of the NLL is linear in the counts, so
            // lambda on the epsilon-thinned data corresponds to lambda/epsilon here.
            const double lam = rows[best].lambda / cfg.epsilon;
            FitInit init{pilot_full.theta, pilot_full.s, std::nullopt};
            chosen = fit_counts(data.expr.counts, B, graph, lam, cfg.solver, &init).result;
            meta["selected_train_lambda"] = rows[best].lambda;
        } else {
            chosen = std::move(path[best]);
        }
        meta["best_lambda"] = chosen.lambda;
        meta["n_clusters"] = chosen.clusters.n_clusters();
        name_result(chosen, data);
        io::write_fit(chosen, out / "fit");
    } else {
        throw InputError("unknown selection method '" + cfg.method + "' (bic, thinning, fixed)");
    }
    auto os = io::open_out(out / "tune.json");
    os << meta.dump(2) << '\n';
    return 0;
}

struct Indexed {
    std::vector<std::string> ids;
    std::unordered_map<std::string, std::size_t> pos;
};

Indexed index_of(std::vector<std::string> ids) {
    Indexed out;
    out.ids = std::move(ids);
    for (std::size_t i = 0; i < out.ids.size(); ++i)
        if (!out.pos.emplace(out.ids[i], i).second) throw InputError("duplicate spot id '" + out.ids[i] + "'");
    return out;
}

int run_metrics(const RunConfig& cfg, const std::string& method, const std::string& scenario, bool dominant) {
    require(cfg.paths.fit, "--fit");
    require(cfg.paths.truth, "--truth");
    const auto fit = io::read_fit(cfg.paths.fit);
    const fs::path truth_dir = cfg.paths.truth;
    std::vector<std::string> theta_ids, label_ids;
    auto ts = io::open_in(truth_dir / "truth_theta.csv");
    const RowMatrix theta_star = io::read_composition(ts, &theta_ids);
    auto ls = io::open_in(truth_dir / "truth_labels.csv");
    const auto labels_star = io::read_labels(ls, &label_ids);
    if (theta_ids != label_ids) throw InputError("truth files list different spots");
    const auto truth = index_of(theta_ids);

    // Evaluate on the fitted spots (QC may have dropped some).
    const auto n = static_cast<Eigen::Index>(fit.spot_ids.size());
    RowMatrix star(n, theta_star.cols());
    std::vector<int> lab_star;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto it = truth.pos.find(fit.spot_ids[static_cast<std::size_t>(i)]);
        if (it == truth.pos.end())
            throw InputError("spot '" + fit.spot_ids[static_cast<std::size_t>(i)] + "' missing from the truth");
        star.row(i) = theta_star.row(static_cast<Eigen::Index>(it->second));
        lab_star.push_back(labels_star[it->second]);
    }
    const auto labels_hat = dominant ? dominant_type_labels(fit.theta_hat) : fit.clusters.labels;
    io::MetricRow row{method, scenario, cfg.seed, evaluate(labels_hat, fit.theta_hat, lab_star, star)};
    if (cfg.paths.out.empty()) {
        io::write_metric_rows(std::cout, {row});
    } else {
        const bool fresh = !fs::exists(cfg.paths.out);
        if (fresh) {
            auto os = io::open_out(cfg.paths.out);
            io::write_metric_rows(os, {row}, true);
        } else {
            std::ofstream os(cfg.paths.out, std::ios::app | std::ios::binary);
            if (!os) throw InputError("cannot append to " + cfg.paths.out);
            io::write_metric_rows(os, {row}, false);
        }
    }
    return 0;
}

int run_render(const RunConfig& cfg) {
    require(cfg.paths.fit, "--fit");
    require(cfg.paths.coords, "--coords");
    require(cfg.paths.out, "--out");
    const auto fit = io::read_fit(cfg.paths.fit);
    auto cs = io::open_in(cfg.paths.coords);
    const auto coords = io::read_coords(cs);
    std::unordered_map<std::string, Point2> by_id(coords.begin(), coords.end());
    std::vector<Point2> xy;
    for (const auto& id : fit.spot_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw InputError("spot '" + id + "' has no coordinates");
        xy.push_back(it->second);
    }
    auto os = io::open_out(cfg.paths.out);
    io::render_map(os, fit, xy);
    return 0;
}

void dataset_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--counts", cfg.paths.counts, "Expression counts (dense CSV or %%triplet text)");
    sub->add_option("--coords", cfg.paths.coords, "Spot coordinates CSV spot_id,x,y");
    sub->add_option("--reference", cfg.paths.reference, "Reference CSV gene,<types>");
    sub->add_option("--sc-counts", cfg.paths.sc_counts, "Single-cell counts to build the reference from");
    sub->add_option("--sc-labels", cfg.paths.sc_labels, "Cell type labels CSV cell_id,label");
    sub->add_option("--markers", cfg.paths.markers, "Marker genes, one per line");
    sub->add_option("--min-spot-count", cfg.qc.min_spot_count, "Drop spots with fewer total counts");
}

void weight_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--k-star", cfg.weights.k_star, "Neighbours averaged in pilot smoothing");
    sub->add_option("--k-dstar", cfg.weights.k_dstar, "Neighbours in the bandwidth median");
    sub->add_option("--prune-pct", cfg.weights.prune_pct, "Weakest share of edges dropped per spot");
    sub->add_option("--floor-frac", cfg.weights.floor_frac, "Weight floor as a fraction of the largest weight");
    sub->add_option("--adjacency-factor", cfg.weights.adjacency_factor,
                    "Adjacency radius in units of the median nearest-neighbour distance");
}

void solver_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--edges", cfg.paths.edges, "Edge list from `weights` (built on the fly otherwise)");
    sub->add_option("--outer-tol", cfg.solver.outer_tol, "Outer coordinate-descent tolerance");
    sub->add_option("--outer-max-iters", cfg.solver.outer_max_iters, "Outer iteration cap");
    sub->add_option("--admm-max-iters", cfg.solver.admm.max_iters, "ADMM iteration cap");
    sub->add_option("--fuse-tol", cfg.solver.fuse_tol, "Distance under which adjacent spots share a cluster");
}

int threads_from_env() {
    const char* env = std::getenv("DUET_THREADS");
    if (env == nullptr || *env == '\0') return 0;
    try {
        return static_cast<int>(text::parse_int(env, "DUET_THREADS"));
    } catch (const InputError&) {
        return 0;
    }
}

}  // namespace

int cli_main(int argc, char** argv) {
    RunConfig cfg;
    try {
        if (const auto path = prescan_config(argc, argv)) {
            auto is = io::open_in(*path);
            json j;
            try {
                j = json::parse(is);
            } catch (const json::exception& e) {
                throw InputError(*path + ": " + e.what());
            }
            apply_config(cfg, j);
        }
    } catch (const std::exception& e) {
        std::cerr << "duet: error: " << e.what() << '\n';
        return 1;
    }

    CLI::App app{"Simultaneous deconvolution and spatial domain detection"};
    app.name("duet");
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    int threads = 0;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--seed", cfg.seed, "Random seed");
    app.add_option("--threads", threads, "Worker threads (default: DUET_THREADS or all cores)");

    bool triplet = false;
    auto* simulate = app.add_subcommand("simulate", "Generate a simulated dataset");
    simulate->add_option("--out", cfg.paths.out, "Output directory");
    simulate->add_option("--grid-side", cfg.grid_side, "Grid side length");
    simulate->add_option("--clusters", cfg.n_clusters, "Number of clusters (5, 7 or 10)");
    simulate->add_option("--smoothness", cfg.smoothness, "Composition table (1, 2 or 3)");
    simulate->add_option("--size-factor-max", cfg.size_factor_max, "Cells per spot are uniform on 1..max");
    simulate->add_option("--reference", cfg.paths.reference, "Reference CSV (bundled table otherwise)");
    simulate->add_flag("--triplet", triplet, "Write counts in triplet form");

    auto* weights = app.add_subcommand("weights", "Build the fusion weight graph");
    dataset_options(weights, cfg);
    weight_options(weights, cfg);
    weights->add_option("--out", cfg.paths.out, "Edge list output");

    auto* fitc = app.add_subcommand("fit", "Fit at a single lambda");
    dataset_options(fitc, cfg);
    weight_options(fitc, cfg);
    solver_options(fitc, cfg);
    fitc->add_option("--lambda", cfg.lambda, "Penalty weight");
    fitc->add_flag("--approx", cfg.approx, "Keep size factors at the spotwise estimate, one Theta solve");
    fitc->add_option("--trace", cfg.paths.trace, "Per-iteration ADMM trace CSV");
    fitc->add_option("--out", cfg.paths.out, "Fit output directory");

    auto* tune = app.add_subcommand("tune", "Fit a lambda path and select lambda");
    dataset_options(tune, cfg);
    weight_options(tune, cfg);
    solver_options(tune, cfg);
    tune->add_option("--method", cfg.method, "bic, thinning or fixed");
    tune->add_option("--lambda", cfg.lambda, "Penalty weight for --method fixed");
    tune->add_option("--lambda-max", cfg.lambda_max, "Top of the grid (doubling search otherwise)");
    tune->add_option("--n-lambda", cfg.n_lambda, "Grid points");
    tune->add_option("--decades", cfg.decades, "Decades spanned by the grid");
    tune->add_flag("--append-zero", cfg.append_zero, "Add lambda = 0 at the end of the grid");
    tune->add_option("--epsilon", cfg.epsilon, "Thinning fraction for the training part");
    tune->add_option("--out", cfg.paths.out, "Output directory");

    std::string method_name = "DUET", scenario;
    bool dominant = false;
    auto* metrics = app.add_subcommand("metrics", "Score a fit against simulation truth");
    metrics->add_option("--fit", cfg.paths.fit, "Fit directory");
    metrics->add_option("--truth", cfg.paths.truth, "Simulation output directory");
    metrics->add_option("--method", method_name, "Method label for the report");
    metrics->add_option("--scenario", scenario, "Scenario label for the report");
    metrics->add_flag("--dominant-labels", dominant, "Cluster by dominant cell type instead of fit labels");
    metrics->add_option("--out", cfg.paths.out, "Metric CSV (appended; stdout otherwise)");

    auto* render = app.add_subcommand("render", "Draw a cluster map as SVG");
    render->add_option("--fit", cfg.paths.fit, "Fit directory");
    render->add_option("--coords", cfg.paths.coords, "Spot coordinates CSV");
    render->add_option("--out", cfg.paths.out, "SVG output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "duet: error: " << e.what() << '\n' << app.help();
        return 2;
    }

    try {
        set_num_threads(threads > 0 ? threads : threads_from_env());
        if (*simulate) return run_simulate(cfg, triplet);
        if (*weights) return run_weights(cfg);
        if (*fitc) return run_fit(cfg);
        if (*tune) return run_tune(cfg);
        if (*metrics) return run_metrics(cfg, method_name, scenario.empty() ? scenario_name(cfg) : scenario, dominant);
        if (*render) return run_render(cfg);
    } catch (const std::exception& e) {
        std::cerr << "duet: error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace duet::cli
