#include "duet/model_selection.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include "duet/parallel.hpp"
#include "duet/poisson.hpp"
#include "duet/random.hpp"
#include "duet/text.hpp"

namespace duet {

ThinnedPair thin_poisson(const ExpressionMatrix& expr, double epsilon, std::uint64_t seed) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("thin_poisson: epsilon must lie in (0, 1)");
    const auto& x = expr.counts;
    if (!x.allFinite() || (x.array() < 0.0).any() || (x.array() != x.array().floor()).any())
        throw InputError("thin_poisson: counts must be nonnegative integers");

    ThinnedPair out{expr, expr, epsilon, seed};
    parallel_for(x.cols(), [&](Eigen::Index i) {
        for (Eigen::Index g = 0; g < x.rows(); ++g) {
            const auto total = static_cast<long long>(x(g, i));
            long long part = 0;
            if (total > 0) {
                auto eng = entry_engine(seed, kStreamThinning, static_cast<std::uint64_t>(g),
                                        static_cast<std::uint64_t>(i));
                part = std::binomial_distribution<long long>(total, epsilon)(eng);
            }
            out.train.counts(g, i) = static_cast<double>(part);
            out.test.counts(g, i) = static_cast<double>(total - part);
        }
    });
    return out;
}

double poisson_loglik(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B, const CompositionMatrix& theta,
                      const SizeFactors& s, double scale) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < counts.cols(); ++i) {
        const Vector rate = B * theta.row(i).transpose();
        for (Eigen::Index g = 0; g < counts.rows(); ++g) {
            const double mu = scale * s(i) * rate(g);
            const double xv = counts(g, i);
            if (xv > 0.0) {
                if (!(mu > 0.0)) return -std::numeric_limits<double>::infinity();
                total += xv * std::log(mu) - mu - std::lgamma(xv + 1.0);
            } else {
                total -= mu;
            }
        }
    }
    return total;
}

double bic(const FitResult& fit, const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B) {
    const auto n = static_cast<double>(counts.cols());
    const auto k = static_cast<double>(B.cols());
    const auto c = static_cast<double>(fit.clusters.n_clusters());
    return 2.0 * total_nll(counts, B, fit.theta_hat, fit.s_hat) + (k - 1.0) * (c + n) * std::log(n);
}

double bic(const FitResult& fit, const ExpressionMatrix& expr, const ReferenceMatrix& ref) {
    return bic(fit, expr.counts, ref.values);
}

namespace {

std::size_t argbest_bic(const std::vector<FitResult>& path, const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t t = 1; t < path.size(); ++t) {
        if (scores[t] < scores[best] || (scores[t] == scores[best] && path[t].lambda > path[best].lambda))
            best = t;
    }
    return best;
}

}  // namespace

double select_lambda_bic(const std::vector<FitResult>& path, const ExpressionMatrix& expr,
                         const ReferenceMatrix& ref) {
    if (path.empty()) throw std::invalid_argument("select_lambda_bic: empty path");
    std::vector<double> scores;
    for (const auto& f : path) scores.push_back(bic(f, expr, ref));
    return path[argbest_bic(path, scores)].lambda;
}

Selection select_by_bic(const ExpressionMatrix& expr, const ReferenceMatrix& ref, const FusionGraph& graph,
                        const LambdaGrid& grid, const SolverConfig& cfg) {
    Selection sel;
    sel.path = fit_path(expr, ref, graph, grid, cfg);
    std::vector<double> scores;
    for (const auto& f : sel.path) {
        SelectionRow row;
        row.lambda = f.lambda;
        row.n_clusters = f.clusters.n_clusters();
        row.train_nll = total_nll(expr.counts, ref.values, f.theta_hat, f.s_hat);
        row.test_loglik = std::numeric_limits<double>::quiet_NaN();
        row.bic = bic(f, expr, ref);
        scores.push_back(row.bic);
        sel.rows.push_back(row);
    }
    sel.best_index = argbest_bic(sel.path, scores);
    sel.best_lambda = sel.path[sel.best_index].lambda;
    return sel;
}

Selection select_lambda_thinning(const ExpressionMatrix& expr, const ReferenceMatrix& ref,
                                 const FusionGraph& graph, const LambdaGrid& grid, const SolverConfig& cfg,
                                 double epsilon, std::uint64_t seed) {
    const ThinnedPair parts = thin_poisson(expr, epsilon, seed);
    const double scale = (1.0 - epsilon) / epsilon;

    Selection sel;
    sel.path = fit_path(parts.train, ref, graph, grid, cfg);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < sel.path.size(); ++t) {
        const auto& f = sel.path[t];
        SelectionRow row;
        row.lambda = f.lambda;
        row.n_clusters = f.clusters.n_clusters();
        row.train_nll = total_nll(parts.train.counts, ref.values, f.theta_hat, f.s_hat);
        row.test_loglik = poisson_loglik(parts.test.counts, ref.values, f.theta_hat, f.s_hat, scale);
        row.bic = bic(f, parts.train.counts, ref.values);
        if (t == 0 || row.test_loglik > best) {
            best = row.test_loglik;
            sel.best_index = t;
        }
        sel.rows.push_back(row);
    }
    sel.best_lambda = sel.path[sel.best_index].lambda;
    return sel;
}

void write_selection_report(std::ostream& os, const std::vector<SelectionRow>& rows) {
    os << "lambda,n_clusters,train_nll,test_loglik,bic\n";
    for (const auto& r : rows)
        os << text::format_double(r.lambda) << ',' << r.n_clusters << ',' << text::format_double(r.train_nll) << ','
           << text::format_double(r.test_loglik) << ',' << text::format_double(r.bic) << '\n';
}

}  // namespace duet
