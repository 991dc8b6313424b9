#include <doctest.h>

#include "duet/evaluation.hpp"
#include "duet/model_core.hpp"
#include "duet/model_selection.hpp"
#include "duet/parallel.hpp"
#include "duet/solver.hpp"
#include "duet/spatial_weights.hpp"
#include "helpers.hpp"

using namespace duet;

namespace {

struct Outputs {
    ExpressionMatrix expr;
    ThinnedPair thinned;
    SpotwiseFit pilot;
    FusionGraph graph;
    FitResult fit;
};

Outputs pipeline(int threads) {
    set_num_threads(threads);
    Outputs o;
    const auto d = testing::small_sim(6, 71);
    o.expr = d.expr;
    o.thinned = thin_poisson(d.expr, 0.5, 3);
    o.pilot = spotwise_deconvolve(d.expr.counts, d.ref.values);
    o.graph = build_fusion_graph_from_pilot(d.expr.coords, o.pilot.theta, WeightConfig{});
    o.fit = fit(d.expr, d.ref, o.graph, 0.1, SolverConfig{});
    return o;
}

bool same(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace

TEST_CASE("results do not depend on the thread count") {
    const auto one = pipeline(1);
    const auto two = pipeline(2);
    set_num_threads(1);
    CHECK(same(one.expr.counts, two.expr.counts));
    CHECK(same(one.thinned.train.counts, two.thinned.train.counts));
    CHECK(same(one.pilot.theta, two.pilot.theta));
    CHECK(same(one.pilot.s, two.pilot.s));
    REQUIRE(one.graph.edges.size() == two.graph.edges.size());
    for (std::size_t e = 0; e < one.graph.edges.size(); ++e) {
        CHECK(one.graph.edges[e].i == two.graph.edges[e].i);
        CHECK(one.graph.edges[e].j == two.graph.edges[e].j);
        CHECK(one.graph.edges[e].gamma == two.graph.edges[e].gamma);
    }
    CHECK(same(one.fit.theta_hat, two.fit.theta_hat));
    CHECK(same(one.fit.s_hat, two.fit.s_hat));
    CHECK(one.fit.objective_trace == two.fit.objective_trace);
    CHECK(one.fit.clusters.labels == two.fit.clusters.labels);
}

TEST_CASE("fits stay on the simplex with positive size factors across lambda") {
    const auto d = testing::small_sim(5, 72);
    const auto pilot = spotwise_deconvolve(d.expr.counts, d.ref.values);
    const auto graph = build_fusion_graph_from_pilot(d.expr.coords, pilot.theta, WeightConfig{});
    for (double lambda : {0.0, 0.01, 0.1, 1.0}) {
        const auto f = fit(d.expr, d.ref, graph, lambda, SolverConfig{});
        CHECK(rows_on_simplex(f.theta_hat, 1e-9));
        CHECK((f.s_hat.array() > 0.0).all());
        CHECK(rows_on_simplex(f.clusters.centroids, 1e-9));
        CHECK(f.clusters.labels.size() == 25);
        // the penalised fit never does worse than the pilot on its own objective
        CHECK(f.objective_trace.back() <=
              duet_objective(d.expr.counts, d.ref.values, graph, pilot.theta, pilot.s, lambda) + 1e-12);
    }
}

TEST_CASE("size factor update is optimal for every fitted composition") {
    const auto d = testing::small_sim(5, 73);
    const auto pilot = spotwise_deconvolve(d.expr.counts, d.ref.values);
    for (Eigen::Index i = 0; i < d.expr.n_spots(); ++i) {
        const Vector x = d.expr.counts.col(i);
        const Vector t = pilot.theta.row(i).transpose();
        const double s = update_size_factor(x, d.ref.values, t);
        const double base = nll_spot(x, d.ref.values, t, s);
        CHECK(base <= nll_spot(x, d.ref.values, t, 1.01 * s));
        CHECK(base <= nll_spot(x, d.ref.values, t, 0.99 * s));
    }
}

TEST_CASE("ARI is invariant to relabelling and bounded") {
    std::mt19937_64 rng(74);
    const auto truth = sim::make_partition(10, 5);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<int> noisy = truth;
        for (auto& l : noisy)
            if (rng() % 5 == 0) l = 1 + static_cast<int>(rng() % 7);
        std::vector<int> perm{0, 3, 1, 7, 2, 6, 4, 5};
        std::vector<int> relabelled;
        for (int l : noisy) relabelled.push_back(perm[static_cast<std::size_t>(l)] + 10);
        const double a = adjusted_rand_index(truth, noisy);
        CHECK(a <= 1.0);
        CHECK(a == adjusted_rand_index(truth, relabelled));
        CHECK(a == doctest::Approx(adjusted_rand_index(noisy, truth)).epsilon(1e-15));
    }
}
