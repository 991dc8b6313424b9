#include <doctest.h>

#include "duet/poisson.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace duet;

namespace {

Eigen::MatrixXd small_b() {
    Eigen::MatrixXd B(4, 2);
    B << 5, 1,
         1, 5,
         2, 2,
         0.5, 3;
    return B;
}

}  // namespace

TEST_CASE("nll_spot: hand-computed value and zero-count convention") {
    Eigen::MatrixXd B(2, 2);
    B << 1, 3,
         2, 2;
    Vector x(2), theta(2);
    x << 2, 0;
    theta << 0.5, 0.5;
    // means: 2*2 = 4 and 2*2 = 4
    const double expect = (4.0 - 2.0 * std::log(4.0)) + 4.0;
    CHECK(nll_spot(x, B, theta, 2.0) == doctest::Approx(expect).epsilon(1e-14));

    Eigen::MatrixXd Bz(2, 2);
    Bz << 1, 0,
          0, 0;
    Vector xz(2), vertex(2);
    xz << 3, 0;
    vertex << 1, 0;
    CHECK(std::isfinite(nll_spot(xz, Bz, vertex, 1.0)));
    Vector other(2);
    other << 0, 1;
    CHECK_THROWS_AS(nll_spot(xz, Bz, other, 1.0), std::domain_error);
}

TEST_CASE("grad_theta_nll matches central differences") {
    std::mt19937_64 rng(21);
    const auto B = sim::default_reference().values;
    for (int rep = 0; rep < 30; ++rep) {
        const Vector theta = testing::random_interior(rng, 5);
        const double s = 1.0 + 49.0 * std::uniform_real_distribution<double>()(rng);
        Vector x(B.rows());
        const Vector mu = s * (B * theta);
        for (Eigen::Index g = 0; g < x.size(); ++g) x(g) = std::poisson_distribution<int>(mu(g))(rng);
        const Vector g = grad_theta_nll(x, B, theta, s);
        const Vector fd = oracle::grad_fd(x, B, theta, s, 1e-6);
        CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
    }
}

TEST_CASE("update_size_factor is the closed-form minimiser") {
    const auto B = small_b();
    Vector x(4), theta(2);
    x << 10, 3, 7, 4;
    theta << 0.3, 0.7;
    const double s = update_size_factor(x, B, theta);
    CHECK(s == doctest::Approx(24.0 / (B * theta).sum()));
    CHECK(nll_spot(x, B, theta, s) <= nll_spot(x, B, theta, s * 1.01));
    CHECK(nll_spot(x, B, theta, s) <= nll_spot(x, B, theta, s * 0.99));
    CHECK(update_size_factor(Vector::Zero(4), B, theta) == 0.0);
}

TEST_CASE("spotwise_deconvolve recovers compositions from deep counts") {
    std::mt19937_64 rng(4);
    const auto B = sim::default_reference().values;
    const int n = 6;
    Eigen::MatrixXd counts(B.rows(), n);
    RowMatrix truth(n, 5);
    for (int i = 0; i < n; ++i) {
        truth.row(i) = testing::random_simplex(rng, 5).transpose();
        const Vector mu = 2000.0 * (B * truth.row(i).transpose());
        for (Eigen::Index g = 0; g < B.rows(); ++g) counts(g, i) = std::poisson_distribution<long long>(mu(g))(rng);
    }
    const auto fit = spotwise_deconvolve(counts, B);
    CHECK(fit.theta.rows() == n);
    for (int i = 0; i < n; ++i) {
        CHECK(std::abs(fit.theta.row(i).sum() - 1.0) < 1e-12);
        CHECK((fit.theta.row(i) - truth.row(i)).norm() < 0.03);
        CHECK(fit.s(i) == doctest::Approx(2000.0).epsilon(0.05));
    }
}

TEST_CASE("spotwise_deconvolve: scale equivariance") {
    const auto d = testing::small_sim(5, 9);
    const auto& B = d.ref.values;
    const auto base = spotwise_deconvolve(d.expr.counts, B);
    const auto scaled = spotwise_deconvolve(3.0 * d.expr.counts, B);
    for (Eigen::Index i = 0; i < d.expr.counts.cols(); ++i) {
        CHECK(scaled.s(i) == doctest::Approx(3.0 * base.s(i)).epsilon(1e-3));
        CHECK((scaled.theta.row(i) - base.theta.row(i)).norm() < 1e-3);
    }
}

TEST_CASE("spotwise_deconvolve: optimality at the returned point") {
    const auto d = testing::small_sim(5, 2);
    const auto& B = d.ref.values;
    const auto fit = spotwise_deconvolve(d.expr.counts, B);
    std::mt19937_64 rng(1);
    for (Eigen::Index i = 0; i < d.expr.counts.cols(); ++i) {
        const Vector x = d.expr.counts.col(i);
        const Vector th = fit.theta.row(i).transpose();
        const double best = nll_spot(x, B, th, fit.s(i));
        for (int t = 0; t < 10; ++t) {
            const Vector y = testing::random_simplex(rng, 5);
            const Vector z = 0.99 * th + 0.01 * y;
            CHECK(best <= nll_spot(x, B, z, update_size_factor(x, B, z)) + 1e-6 * std::abs(best));
        }
    }
}

TEST_CASE("total_nll sums the per-spot terms") {
    const auto d = testing::small_sim(5, 1);
    const auto fit = spotwise_deconvolve(d.expr.counts, d.ref.values);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < d.expr.counts.cols(); ++i)
        sum += nll_spot(d.expr.counts.col(i), d.ref.values, fit.theta.row(i).transpose(), fit.s(i));
    CHECK(total_nll(d.expr.counts, d.ref.values, fit.theta, fit.s) == doctest::Approx(sum).epsilon(1e-13));
}
