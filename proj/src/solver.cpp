#include "duet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "duet/model_core.hpp"
#include "duet/parallel.hpp"

namespace duet {

double SolverConfig::fuse_tol_for(Eigen::Index n_types) const {
    return fuse_tol >= 0.0 ? fuse_tol : default_fuse_tol(n_types);
}

void check_solver_config(const SolverConfig& cfg) {
    if (!(cfg.outer_tol > 0.0) || cfg.outer_max_iters < 1)
        throw std::invalid_argument("SolverConfig: outer_tol and outer_max_iters must be positive");
    check_admm_config(cfg.admm);
}

LambdaGrid make_lambda_grid(double lambda_max, int n_points, double decades, bool append_zero) {
    if (!(lambda_max > 0.0) || n_points < 1 || !(decades > 0.0))
        throw std::invalid_argument("make_lambda_grid: invalid arguments");
    LambdaGrid grid;
    for (int k = 0; k < n_points; ++k) {
        const double frac = n_points == 1 ? 0.0 : static_cast<double>(k) / (n_points - 1);
        grid.values.push_back(lambda_max * std::pow(10.0, -decades * frac));
    }
    if (append_zero) grid.values.push_back(0.0);
    return grid;
}

void check_lambda_grid(const LambdaGrid& grid) {
    if (grid.values.empty()) throw std::invalid_argument("LambdaGrid: empty");
    for (std::size_t k = 0; k < grid.values.size(); ++k) {
        const double v = grid.values[k];
        const bool last = k + 1 == grid.values.size();
        if (!std::isfinite(v) || v < 0.0 || (v == 0.0 && !last))
            throw std::invalid_argument("LambdaGrid: values must be positive (0 only at the end)");
        if (k > 0 && !(v < grid.values[k - 1])) throw std::invalid_argument("LambdaGrid: not strictly decreasing");
    }
}

double duet_objective(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B, const FusionGraph& graph,
                      const CompositionMatrix& theta, const SizeFactors& s, double lambda) {
    const ThetaProblem p{&counts, &B, &s, &graph, lambda};
    return penalized_objective(p, theta);
}

namespace {

SizeFactors size_factor_step(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B,
                             const CompositionMatrix& theta) {
    SizeFactors s(counts.cols());
    parallel_for(counts.cols(), [&](Eigen::Index i) {
        s(i) = update_size_factor(counts.col(i), B, theta.row(i).transpose());
    });
    return s;
}

double relative_change(double diff_norm, double base_norm) {
    if (base_norm > 0.0) return diff_norm / base_norm;
    return diff_norm > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

void check_problem(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B, const FusionGraph& graph,
                   double lambda) {
    if (counts.rows() != B.rows()) throw std::invalid_argument("fit: gene dimension mismatch");
    if (graph.n != counts.cols()) throw std::invalid_argument("fit: graph size does not match spot count");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("fit: lambda must be >= 0");
}

}  // namespace

FitState fit_counts(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B, const FusionGraph& graph,
                    double lambda, const SolverConfig& cfg, const FitInit* init) {
    check_solver_config(cfg);
    check_problem(counts, B, graph, lambda);

    CompositionMatrix theta;
    SizeFactors s;
    std::optional<AdmmState> warm;
    if (init != nullptr) {
        if (init->theta.rows() != counts.cols() || init->theta.cols() != B.cols() ||
            init->s.size() != counts.cols())
            throw std::invalid_argument("fit: initial values have the wrong shape");
        theta = init->theta;
        s = init->s;
        warm = init->admm;
    } else {
        const auto pilot = spotwise_deconvolve(counts, B, cfg.spotwise);
        theta = pilot.theta;
        s = size_factor_step(counts, B, theta);
    }

    FitState out;
    FitResult& res = out.result;
    res.lambda = lambda;
    res.objective_trace.push_back(duet_objective(counts, B, graph, theta, s, lambda));

    bool outer_converged = false;
    bool inner_converged = true;
    for (int k = 1; k <= cfg.outer_max_iters; ++k) {
        const SizeFactors s_new = size_factor_step(counts, B, theta);
        const double obj_s = duet_objective(counts, B, graph, theta, s_new, lambda);

        const ThetaProblem prob{&counts, &B, &s_new, &graph, lambda};
        AdmmResult admm = solve_theta(theta, prob, cfg.admm, warm ? &*warm : nullptr);
        inner_converged = inner_converged && admm.converged;
        CompositionMatrix theta_new = admm.state.theta;
        double obj_new = penalized_objective(prob, theta_new);
        if (!(obj_new <= obj_s)) {
            theta_new = theta;
            obj_new = obj_s;
            admm.state.theta = theta;
        }
        res.objective_trace.push_back(obj_new);
        warm = std::move(admm.state);

        const double d_theta = relative_change((theta_new - theta).norm(), theta.norm());
        const double d_s = relative_change((s_new - s).norm(), s.norm());
        theta = std::move(theta_new);
        s = s_new;
        res.iterations = k;
        if (std::max(d_theta, d_s) < cfg.outer_tol) {
            outer_converged = true;
            break;
        }
    }

    res.theta_hat = std::move(theta);
    res.s_hat = std::move(s);
    res.converged = outer_converged && inner_converged;
    res.clusters = extract_clusters(res.theta_hat, graph, cfg.fuse_tol_for(B.cols()));
    if (warm) out.admm = std::move(*warm);
    return out;
}

FitResult fit(const ExpressionMatrix& expr, const ReferenceMatrix& ref, const FusionGraph& graph,
              double lambda, const SolverConfig& cfg, const FitInit* init) {
    auto res = fit_counts(expr.counts, ref.values, graph, lambda, cfg, init).result;
    res.spot_ids = expr.spot_ids;
    res.celltype_ids = ref.celltype_ids;
    return res;
}

FitResult fit_approx_counts(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B,
                            const FusionGraph& graph, double lambda, const SolverConfig& cfg,
                            const SpotwiseFit* pilot) {
    check_solver_config(cfg);
    check_problem(counts, B, graph, lambda);
    const SpotwiseFit own = pilot ? SpotwiseFit{} : spotwise_deconvolve(counts, B, cfg.spotwise);
    const SpotwiseFit& base = pilot ? *pilot : own;

    const ThetaProblem prob{&counts, &B, &base.s, &graph, lambda};
    FitResult res;
    res.lambda = lambda;
    res.objective_trace.push_back(penalized_objective(prob, base.theta));
    const AdmmResult admm = solve_theta(base.theta, prob, cfg.admm);
    res.theta_hat = admm.state.theta;
    res.s_hat = base.s;
    res.objective_trace.push_back(penalized_objective(prob, res.theta_hat));
    res.iterations = 1;
    res.converged = admm.converged;
    res.clusters = extract_clusters(res.theta_hat, graph, cfg.fuse_tol_for(B.cols()));
    return res;
}

FitResult fit_approx(const ExpressionMatrix& expr, const ReferenceMatrix& ref, const FusionGraph& graph,
                     double lambda, const SolverConfig& cfg) {
    auto res = fit_approx_counts(expr.counts, ref.values, graph, lambda, cfg);
    res.spot_ids = expr.spot_ids;
    res.celltype_ids = ref.celltype_ids;
    return res;
}

std::vector<FitResult> fit_path_counts(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B,
                                       const FusionGraph& graph, const LambdaGrid& grid,
                                       const SolverConfig& cfg, const SpotwiseFit* pilot) {
    check_lambda_grid(grid);
    check_solver_config(cfg);
    const SpotwiseFit own = pilot ? SpotwiseFit{} : spotwise_deconvolve(counts, B, cfg.spotwise);
    const SpotwiseFit& base = pilot ? *pilot : own;

    FitInit init;
    init.theta = base.theta;
    init.s = size_factor_step(counts, B, base.theta);

    std::vector<FitResult> path;
    path.reserve(grid.values.size());
    for (double lambda : grid.values) {
        try {
            FitState st = fit_counts(counts, B, graph, lambda, cfg, &init);
            init.theta = st.result.theta_hat;
            init.s = st.result.s_hat;
            init.admm = std::move(st.admm);
            path.push_back(std::move(st.result));
        } catch (const std::exception&) {
            FitResult failed;
            failed.lambda = lambda;
            failed.theta_hat = init.theta;
            failed.s_hat = init.s;
            failed.converged = false;
            failed.clusters = extract_clusters(init.theta, graph, cfg.fuse_tol_for(B.cols()));
            path.push_back(std::move(failed));
        }
    }
    return path;
}

std::vector<FitResult> fit_path(const ExpressionMatrix& expr, const ReferenceMatrix& ref,
                                const FusionGraph& graph, const LambdaGrid& grid, const SolverConfig& cfg) {
    auto path = fit_path_counts(expr.counts, ref.values, graph, grid, cfg);
    for (auto& r : path) {
        r.spot_ids = expr.spot_ids;
        r.celltype_ids = ref.celltype_ids;
    }
    return path;
}

double lambda_start(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B) {
    const auto n = counts.cols();
    const auto k = B.cols();
    const Vector uniform = Vector::Constant(k, 1.0 / static_cast<double>(k));
    std::vector<double> scale(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = update_size_factor(counts.col(i), B, uniform);
        Vector g = grad_theta_nll(counts.col(i), B, uniform, s);
        g.array() -= g.mean();
        scale[static_cast<std::size_t>(i)] = g.norm();
    }
    std::nth_element(scale.begin(), scale.begin() + n / 2, scale.end());
    const double med = scale[static_cast<std::size_t>(n / 2)];
    return std::max(med, 1e-12) / static_cast<double>(n);
}

LambdaMaxSearch find_lambda_max(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B,
                                const FusionGraph& graph, const SolverConfig& cfg,
                                const SpotwiseFit* pilot, int max_doublings) {
    check_solver_config(cfg);
    const SpotwiseFit own = pilot ? SpotwiseFit{} : spotwise_deconvolve(counts, B, cfg.spotwise);
    const SpotwiseFit& base = pilot ? *pilot : own;

    FitInit init;
    init.theta = base.theta;
    init.s = size_factor_step(counts, B, base.theta);

    LambdaMaxSearch out;
    double lambda = lambda_start(counts, B);
    for (int d = 0; d <= max_doublings; ++d) {
        FitState st = fit_counts(counts, B, graph, lambda, cfg, &init);
        if (st.result.clusters.n_clusters() == 1) {
            out.lambda_max = lambda;
            out.doublings = d;
            out.fit = std::move(st.result);
            return out;
        }
        init.theta = st.result.theta_hat;
        init.s = st.result.s_hat;
        init.admm = std::move(st.admm);
        lambda *= 2.0;
    }
    throw std::runtime_error("find_lambda_max: no single-cluster solution within the doubling budget");
}

}  // namespace duet
