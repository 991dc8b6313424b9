#include <doctest.h>

#include <queue>
#include <set>

#include "duet/model_core.hpp"
#include "duet/simulation.hpp"
#include "helpers.hpp"

using namespace duet;

namespace {

bool rook_connected(const std::vector<int>& labels, int side, int label) {
    std::vector<char> seen(labels.size(), 0);
    int start = -1, total = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) {
            ++total;
            if (start < 0) start = static_cast<int>(i);
        }
    if (start < 0) return false;
    std::queue<int> q;
    q.push(start);
    seen[static_cast<std::size_t>(start)] = 1;
    int reached = 0;
    while (!q.empty()) {
        const int i = q.front();
        q.pop();
        ++reached;
        const int r = i / side, c = i % side;
        const int nb[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (const auto& p : nb) {
            if (p[0] < 0 || p[1] < 0 || p[0] >= side || p[1] >= side) continue;
            const int j = p[0] * side + p[1];
            if (!seen[static_cast<std::size_t>(j)] && labels[static_cast<std::size_t>(j)] == label) {
                seen[static_cast<std::size_t>(j)] = 1;
                q.push(j);
            }
        }
    }
    return reached == total;
}

}  // namespace

TEST_CASE("theta_dagger published rows") {
    const auto t1 = sim::theta_dagger(5, 1);
    Vector r1(5);
    r1 << 0.05, 0.05, 0.05, 0.0, 0.85;
    CHECK((t1.row(0).transpose() - r1).cwiseAbs().maxCoeff() < 1e-15);
    const auto t2 = sim::theta_dagger(5, 2);
    Vector r4(5);
    r4 << 0.0, 0.0, 0.1, 0.1, 0.8;
    CHECK((t2.row(3).transpose() - r4).cwiseAbs().maxCoeff() < 1e-15);

    for (int c : {5, 7, 10})
        for (int sm : {1, 2, 3}) {
            const auto t = sim::theta_dagger(c, sm);
            CHECK(t.rows() == c);
            CHECK(t.cols() == 5);
            CHECK(rows_on_simplex(t, 1e-12));
            CHECK((t.array() >= 0.0).all());
        }
    CHECK_THROWS(sim::theta_dagger(6, 1));
    CHECK_THROWS(sim::theta_dagger(5, 4));
}

TEST_CASE("partitions cover the grid with connected regions") {
    for (int c : {5, 7, 10})
        for (int side : {10, 20}) {
            const auto labels = sim::make_partition(side, c);
            REQUIRE(labels.size() == static_cast<std::size_t>(side * side));
            const std::set<int> present(labels.begin(), labels.end());
            CHECK(present.size() == static_cast<std::size_t>(c));
            CHECK(*present.begin() == 1);
            CHECK(*present.rbegin() == c);
            for (int l = 1; l <= c; ++l) CHECK(rook_connected(labels, side, l));
        }
    const auto coords = sim::grid_coords(3);
    CHECK(coords[5].x == 2.0);
    CHECK(coords[5].y == 1.0);
}

TEST_CASE("ground truth structure") {
    sim::SimulationScenario sc;
    sc.reference = sim::default_reference();
    sc.seed = 5;
    const auto t = sim::gen_ground_truth(sc);
    CHECK(t.theta_star.rows() == 400);
    CHECK(t.labels.labels == sim::make_partition(20, 5));
    const auto dagger = sim::theta_dagger(5, 1);
    for (Eigen::Index i = 0; i < 400; ++i) {
        const int c = t.labels.labels[static_cast<std::size_t>(i)] - 1;
        CHECK((t.theta_star.row(i) - dagger.row(c)).norm() == 0.0);
        CHECK(t.s_star(i) >= 1.0);
        CHECK(t.s_star(i) <= 50.0);
        CHECK(t.s_star(i) == std::floor(t.s_star(i)));
        for (Eigen::Index k = 0; k < 5; ++k) {
            if (dagger(c, k) == 0.0) CHECK(t.v_star(i, k) == 0.0);
            const double u = t.v_star(i, k) * t.s_star(i);
            CHECK(u == doctest::Approx(std::round(u)).epsilon(1e-9));
        }
    }
    CHECK(rows_on_simplex(t.v_star, 1e-12));
    CHECK(t.s_star.minCoeff() < 10.0);
    CHECK(t.s_star.maxCoeff() > 40.0);
}

TEST_CASE("single-cell spots sit on a vertex") {
    sim::SimulationScenario sc;
    sc.reference = sim::default_reference();
    sc.grid_side = 10;
    sc.size_factor_max = 1;
    const auto t = sim::gen_ground_truth(sc);
    for (Eigen::Index i = 0; i < t.v_star.rows(); ++i) {
        CHECK(t.v_star.row(i).maxCoeff() == 1.0);
        CHECK(t.v_star.row(i).sum() == 1.0);
    }
}

TEST_CASE("multinomial compositions are unbiased") {
    sim::SimulationScenario sc;
    sc.reference = sim::default_reference();
    sc.grid_side = 100;
    sc.seed = 17;
    const auto t = sim::gen_ground_truth(sc);
    const auto dagger = sim::theta_dagger(5, 1);
    for (int c = 0; c < 5; ++c) {
        Vector sum = Vector::Zero(5), var = Vector::Zero(5);
        int count = 0;
        for (Eigen::Index i = 0; i < t.v_star.rows(); ++i) {
            if (t.labels.labels[static_cast<std::size_t>(i)] != c + 1) continue;
            sum += t.v_star.row(i).transpose();
            for (int k = 0; k < 5; ++k) var(k) += dagger(c, k) * (1.0 - dagger(c, k)) / t.s_star(i);
            ++count;
        }
        REQUIRE(count > 100);
        for (int k = 0; k < 5; ++k) {
            const double se = std::sqrt(var(k)) / count;
            CHECK(std::abs(sum(k) / count - dagger(c, k)) <= 3.0 * se + 1e-15);
        }
    }
}

TEST_CASE("poisson counts have the stated mean and dispersion") {
    sim::GroundTruth t;
    t.grid_side = 100;
    t.seed = 23;
    t.v_star = RowMatrix::Constant(10000, 5, 0.2);
    t.s_star = SizeFactors::Constant(10000, 4.0);
    const auto ref = sim::default_reference();
    const auto x = sim::gen_counts(t, ref);
    const Vector mu = 4.0 * ref.values * Vector::Constant(5, 0.2);
    int outside_mean = 0, outside_disp = 0;
    for (Eigen::Index g = 0; g < x.n_genes(); ++g) {
        const double mean = x.counts.row(g).mean();
        const double var = (x.counts.row(g).array() - mean).square().sum() / 9999.0;
        if (std::abs(mean - mu(g)) > 3.0 * std::sqrt(mu(g) / 10000.0)) ++outside_mean;
        // index of dispersion has SE about sqrt(2 / N)
        if (std::abs(var / mean - 1.0) > 3.0 * std::sqrt(2.0 / 10000.0 + 1.0 / (mu(g) * 10000.0))) ++outside_disp;
    }
    // 66 genes at the 3 SE level: a few exceedances would be unusual
    CHECK(outside_mean <= 2);
    CHECK(outside_disp <= 2);

    sim::GroundTruth empty = t;
    empty.s_star(3) = 0.0;
    CHECK(sim::gen_counts(empty, ref).counts.col(3).sum() == 0.0);
}

TEST_CASE("simulation is deterministic given the seed") {
    const auto a = testing::small_sim(8, 41);
    const auto b = testing::small_sim(8, 41);
    const auto c = testing::small_sim(8, 42);
    CHECK((a.expr.counts.array() == b.expr.counts.array()).all());
    CHECK((a.truth.v_star.array() == b.truth.v_star.array()).all());
    CHECK((a.expr.counts.array() != c.expr.counts.array()).any());
    CHECK(a.expr.spot_ids[3] == "s3");
    const auto ref = sim::default_reference();
    CHECK(ref.n_genes() == 66);
    CHECK(ref.n_types() == 5);
    CHECK((ref.values.array() > 0.0).all());
}
