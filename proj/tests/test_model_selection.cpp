#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "duet/model_selection.hpp"
#include "duet/poisson.hpp"
#include "duet/spatial_weights.hpp"
#include "helpers.hpp"

using namespace duet;

namespace {

ExpressionMatrix constant_entries(int n, double value) {
    ExpressionMatrix e;
    e.counts = Eigen::MatrixXd::Constant(1, n, value);
    e.gene_ids = {"g"};
    for (int i = 0; i < n; ++i) e.spot_ids.push_back("s" + std::to_string(i));
    e.coords.resize(static_cast<std::size_t>(n));
    return e;
}

FitResult fit_with(const CompositionMatrix& theta, const SizeFactors& s, int clusters, double lambda) {
    FitResult f;
    f.theta_hat = theta;
    f.s_hat = s;
    f.clusters.centroids = RowMatrix::Zero(clusters, theta.cols());
    f.clusters.labels.assign(static_cast<std::size_t>(theta.rows()), 1);
    f.lambda = lambda;
    return f;
}

}  // namespace

TEST_CASE("thinning is exactly additive and reproducible") {
    const auto d = testing::small_sim(6, 31);
    for (double eps : {0.3, 0.5, 0.8}) {
        const auto t = thin_poisson(d.expr, eps, 99);
        CHECK(((t.train.counts + t.test.counts).array() == d.expr.counts.array()).all());
        CHECK((t.train.counts.array() >= 0.0).all());
        CHECK((t.test.counts.array() >= 0.0).all());
        const auto again = thin_poisson(d.expr, eps, 99);
        CHECK((again.train.counts.array() == t.train.counts.array()).all());
        CHECK(t.train.spot_ids == d.expr.spot_ids);
    }
    const auto other = thin_poisson(d.expr, 0.5, 100);
    CHECK((other.train.counts.array() != thin_poisson(d.expr, 0.5, 99).train.counts.array()).any());
}

TEST_CASE("thinning of zero counts and errors") {
    const auto zero = thin_poisson(constant_entries(5, 0.0), 0.5, 1);
    CHECK(zero.train.counts.sum() == 0.0);
    CHECK(zero.test.counts.sum() == 0.0);
    CHECK_THROWS_AS(thin_poisson(constant_entries(3, 1.5), 0.5, 1), InputError);
    CHECK_THROWS_AS(thin_poisson(constant_entries(3, 2.0), 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(thin_poisson(constant_entries(3, 2.0), 1.0, 1), std::invalid_argument);
}

TEST_CASE("thinning binomial mean at x = 10") {
    const int reps = 10000;
    const auto t = thin_poisson(constant_entries(reps, 10.0), 0.3, 7);
    const double mean = t.train.counts.mean();
    const double se = std::sqrt(10.0 * 0.3 * 0.7 / reps);
    CHECK(std::abs(mean - 3.0) < 3.0 * se);
}

TEST_CASE("poisson_loglik includes the factorial term") {
    Eigen::MatrixXd X(2, 1), B(2, 1);
    X << 3, 0;
    B << 2, 1;
    CompositionMatrix theta = CompositionMatrix::Ones(1, 1);
    SizeFactors s = SizeFactors::Constant(1, 1.5);
    // means 0.5 * 1.5 * (2, 1) = (1.5, 0.75)
    const double expect = 3 * std::log(1.5) - 1.5 - std::lgamma(4.0) - 0.75;
    CHECK(poisson_loglik(X, B, theta, s, 0.5) == doctest::Approx(expect).epsilon(1e-14));
    B(0, 0) = 0.0;
    CHECK(poisson_loglik(X, B, theta, s, 1.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("bic formula") {
    Eigen::MatrixXd X(2, 2), B(2, 2);
    X << 4, 1,
         2, 6;
    B << 1, 2,
         3, 1;
    CompositionMatrix theta(2, 2);
    theta << 0.3, 0.7,
             0.6, 0.4;
    const SizeFactors s = SizeFactors::Constant(2, 2.0);
    const auto f1 = fit_with(theta, s, 1, 1.0);
    const double nll = total_nll(X, B, theta, s);
    CHECK(bic(f1, X, B) == doctest::Approx(2.0 * nll + 3.0 * std::log(2.0)).epsilon(1e-14));
    // n = 2, K = 2, c = 1, NLL = 10
    CHECK(2.0 * 10.0 + 1.0 * 3.0 * std::log(2.0) == doctest::Approx(22.0794).epsilon(1e-5));

    const auto f2 = fit_with(theta, s, 2, 1.0);
    CHECK(bic(f2, X, B) - bic(f1, X, B) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bic(f1, X, B) == bic(fit_with(theta, s, 1, 1.0), X, B));
}

TEST_CASE("select_lambda_bic ties go to the larger lambda") {
    ExpressionMatrix e;
    e.counts.resize(2, 2);
    e.counts << 4, 1,
                2, 6;
    ReferenceMatrix r;
    r.values.resize(2, 2);
    r.values << 1, 2,
                3, 1;
    CompositionMatrix theta(2, 2);
    theta << 0.3, 0.7,
             0.6, 0.4;
    const SizeFactors s = SizeFactors::Constant(2, 2.0);
    const std::vector<FitResult> tie{fit_with(theta, s, 1, 0.5), fit_with(theta, s, 1, 2.0),
                                     fit_with(theta, s, 1, 1.0)};
    CHECK(select_lambda_bic(tie, e, r) == 2.0);
    const std::vector<FitResult> fewer{fit_with(theta, s, 2, 3.0), fit_with(theta, s, 1, 0.1)};
    CHECK(select_lambda_bic(fewer, e, r) == 0.1);
    CHECK(select_lambda_bic({fit_with(theta, s, 2, 0.7)}, e, r) == 0.7);
    CHECK_THROWS_AS(select_lambda_bic({}, e, r), std::invalid_argument);
}

TEST_CASE("selection over a short path") {
    const auto d = testing::small_sim(5, 32);
    const auto pilot = spotwise_deconvolve(d.expr.counts, d.ref.values);
    const auto graph = build_fusion_graph_from_pilot(d.expr.coords, pilot.theta, WeightConfig{});
    const auto grid = make_lambda_grid(1.0, 3, 2.0);

    const auto by_bic = select_by_bic(d.expr, d.ref, graph, grid, SolverConfig{});
    REQUIRE(by_bic.rows.size() == 3);
    CHECK(by_bic.best_lambda == grid.values[by_bic.best_index]);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(std::isnan(by_bic.rows[t].test_loglik));
        CHECK(by_bic.rows[t].bic >= by_bic.rows[by_bic.best_index].bic);
    }

    const auto by_thin = select_lambda_thinning(d.expr, d.ref, graph, grid, SolverConfig{}, 0.5, 3);
    REQUIRE(by_thin.rows.size() == 3);
    for (const auto& row : by_thin.rows) {
        CHECK(std::isfinite(row.test_loglik));
        CHECK(row.test_loglik <= by_thin.rows[by_thin.best_index].test_loglik);
    }

    std::ostringstream os;
    write_selection_report(os, by_thin.rows);
    const std::string report = os.str();
    CHECK(report.rfind("lambda,n_clusters,train_nll,test_loglik,bic\n", 0) == 0);
    CHECK(std::count(report.begin(), report.end(), '\n') == 4);
}
