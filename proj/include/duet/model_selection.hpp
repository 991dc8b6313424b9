#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "duet/graph.hpp"
#include "duet/solver.hpp"
#include "duet/types.hpp"

namespace duet {

struct ThinnedPair {
    ExpressionMatrix train;
    ExpressionMatrix test;
    double epsilon = 0.5;
    std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kStreamThinning = 0x71;

/// Binomial thinning: train ~ Bin(x, epsilon) per entry, test = x - train.
ThinnedPair thin_poisson(const ExpressionMatrix& expr, double epsilon, std::uint64_t seed);

/// Poisson log-likelihood (with the log x! term) of `counts` under means
/// scale * s_i * b_g' theta_i.
double poisson_loglik(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B, const CompositionMatrix& theta,
                      const SizeFactors& s, double scale);

/// 2 * total NLL + (K - 1) * (c + n) * log(n).
double bic(const FitResult& fit, const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B);
double bic(const FitResult& fit, const ExpressionMatrix& expr, const ReferenceMatrix& ref);

struct SelectionRow {
    double lambda = 0.0;
    int n_clusters = 0;
    double train_nll = 0.0;
    double test_loglik = 0.0;  // NaN when not evaluated
    double bic = 0.0;
};

struct Selection {
    double best_lambda = 0.0;
    std::size_t best_index = 0;
    std::vector<SelectionRow> rows;
    std::vector<FitResult> path;
};

/// Smallest BIC; ties go to the larger lambda. Throws on an empty path.
double select_lambda_bic(const std::vector<FitResult>& path, const ExpressionMatrix& expr,
                         const ReferenceMatrix& ref);

/// Fits the path on the full data and picks the BIC minimiser.
Selection select_by_bic(const ExpressionMatrix& expr, const ReferenceMatrix& ref, const FusionGraph& graph,
                        const LambdaGrid& grid, const SolverConfig& cfg);

/// Fits the path on the training part and picks the lambda maximising the
/// held-out Poisson log-likelihood, with test means rescaled by (1 - eps) / eps.
Selection select_lambda_thinning(const ExpressionMatrix& expr, const ReferenceMatrix& ref,
                                 const FusionGraph& graph, const LambdaGrid& grid, const SolverConfig& cfg,
                                 double epsilon, std::uint64_t seed);

/// CSV with header `lambda,n_clusters,train_nll,test_loglik,bic`.
void write_selection_report(std::ostream& os, const std::vector<SelectionRow>& rows);

}  // namespace duet
