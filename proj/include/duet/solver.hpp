#pragma once

#include <optional>
#include <vector>

#include "duet/fusion_admm.hpp"
#include "duet/graph.hpp"
#include "duet/poisson.hpp"
#include "duet/types.hpp"

namespace duet {

struct SolverConfig {
    double outer_tol = 1e-4;  // on max(relative change of Theta, of S)
    int outer_max_iters = 50;
    AdmmConfig admm;
    /// Negative selects the default 1e-3 * sqrt(K).
    double fuse_tol = -1.0;
    SpotwiseSettings spotwise;

    [[nodiscard]] double fuse_tol_for(Eigen::Index n_types) const;
};

void check_solver_config(const SolverConfig& cfg);

struct LambdaGrid {
    std::vector<double> values;  // strictly decreasing; a trailing 0 is allowed
};

/// n_points values from lambda_max down over `decades` decades, log-spaced.
LambdaGrid make_lambda_grid(double lambda_max, int n_points = 20, double decades = 4.0,
                            bool append_zero = false);
void check_lambda_grid(const LambdaGrid& grid);

/// Starting point for a fit; `admm` carries Omega/Gamma/rho across fits.
struct FitInit {
    CompositionMatrix theta;
    SizeFactors s;
    std::optional<AdmmState> admm;
};

/// Penalised objective (1/n) sum_i nll_i + lambda * sum gamma_ij ||theta_i - theta_j||.
double duet_objective(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B, const FusionGraph& graph,
                      const CompositionMatrix& theta, const SizeFactors& s, double lambda);

struct FitState {
    FitResult result;
    AdmmState admm;
};

/// Two-block coordinate descent on the raw matrices. Without `init` the
/// spotwise pilot is used. A Theta block that would raise the objective is
/// rejected, so the objective trace never increases.
FitState fit_counts(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B, const FusionGraph& graph,
                    double lambda, const SolverConfig& cfg, const FitInit* init = nullptr);

FitResult fit(const ExpressionMatrix& expr, const ReferenceMatrix& ref, const FusionGraph& graph,
              double lambda, const SolverConfig& cfg, const FitInit* init = nullptr);

/// App-DUET: size factors fixed at the spotwise estimate, one ADMM solve for Theta.
FitResult fit_approx(const ExpressionMatrix& expr, const ReferenceMatrix& ref, const FusionGraph& graph,
                     double lambda, const SolverConfig& cfg);

FitResult fit_approx_counts(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B,
                            const FusionGraph& graph, double lambda, const SolverConfig& cfg,
                            const SpotwiseFit* pilot = nullptr);

/// Fits every grid value in order, warm-starting each from the previous
/// solution including the ADMM multipliers. A failed value is reported with
/// converged = false and the path continues.
std::vector<FitResult> fit_path(const ExpressionMatrix& expr, const ReferenceMatrix& ref,
                                const FusionGraph& graph, const LambdaGrid& grid, const SolverConfig& cfg);

std::vector<FitResult> fit_path_counts(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B,
                                       const FusionGraph& graph, const LambdaGrid& grid,
                                       const SolverConfig& cfg, const SpotwiseFit* pilot = nullptr);

struct LambdaMaxSearch {
    double lambda_max = 0.0;
    int doublings = 0;
    FitResult fit;  // the single-cluster fit at lambda_max
};

/// Starting scale for the doubling search: median over spots of the
/// sum-zero part of the NLL gradient at the uniform composition, divided by n.
double lambda_start(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B);

/// Doubles lambda from lambda_start until every spot fuses into one cluster.
LambdaMaxSearch find_lambda_max(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B,
                                const FusionGraph& graph, const SolverConfig& cfg,
                                const SpotwiseFit* pilot = nullptr, int max_doublings = 60);

}  // namespace duet
