#include <doctest.h>

#include "duet/simplex.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace duet;

TEST_CASE("project_simplex: documented examples") {
    Vector v(3);
    v << 0.2, 0.3, 0.5;
    CHECK((project_simplex(v) - v).norm() < 1e-15);

    v << 1.0, 1.0, 1.0;
    CHECK((project_simplex(v) - Vector::Constant(3, 1.0 / 3.0)).norm() < 1e-15);

    v << 2.0, 0.0, 0.0;
    Vector e(3);
    e << 1.0, 0.0, 0.0;
    CHECK((project_simplex(v) - e).norm() < 1e-15);

    Vector one(1);
    one << -7.0;
    CHECK(project_simplex(one)(0) == 1.0);
}

TEST_CASE("project_simplex matches the support-enumeration oracle") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 300; ++rep) {
        const int k = 2 + rep % 9;
        const Vector v = testing::random_normal(rng, k, 1.0 + rep % 3);
        const Vector p = project_simplex(v);
        CHECK((p - oracle::simplex_projection_bruteforce(v)).lpNorm<Eigen::Infinity>() < 1e-10);
        CHECK(p.minCoeff() >= 0.0);
        CHECK(std::abs(p.sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("project_simplex properties") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        const int k = 2 + rep % 12;
        const Vector a = testing::random_normal(rng, k, 2.0);
        const Vector b = testing::random_normal(rng, k, 2.0);
        const Vector pa = project_simplex(a);
        // idempotent
        CHECK((project_simplex(pa) - pa).norm() < 1e-12);
        // nonexpansive
        CHECK((pa - project_simplex(b)).norm() <= (a - b).norm() + 1e-12);
        // shifting all coordinates equally does not move the projection
        CHECK((project_simplex(a.array() + 3.25).matrix() - pa).norm() < 1e-12);
        // variational inequality <a - p, y - p> <= 0 for y on the simplex
        const Vector y = testing::random_simplex(rng, k);
        CHECK((a - pa).dot(y - pa) <= 1e-10);
    }
}

TEST_CASE("project_simplex rejects non-finite input") {
    Vector v(2);
    v << 0.5, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(project_simplex(v), std::domain_error);
}

TEST_CASE("group_shrink") {
    Vector a(2);
    a << 3.0, 4.0;
    const Vector half = group_shrink(a, 2.5);
    CHECK(half(0) == doctest::Approx(1.5));
    CHECK(half(1) == doctest::Approx(2.0));
    CHECK(group_shrink(a, 5.0).isZero(0.0));
    CHECK(group_shrink(a, 7.0).isZero(0.0));
    CHECK((group_shrink(a, 0.0) - a).norm() == 0.0);
    CHECK_THROWS(group_shrink(a, -1.0));

    // prox optimality: z minimises phi*||z|| + 0.5*||z - a||^2
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const Vector v = testing::random_normal(rng, 4);
        const double phi = 0.5 * (rep % 5);
        const Vector z = group_shrink(v, phi);
        const auto obj = [&](const Vector& w) { return phi * w.norm() + 0.5 * (w - v).squaredNorm(); };
        for (int t = 0; t < 20; ++t) CHECK(obj(z) <= obj(z + 0.1 * testing::random_normal(rng, 4)) + 1e-12);
    }
}

TEST_CASE("pgd_minimize_simplex solves a projection problem") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        const int k = 2 + rep % 6;
        const Vector c = testing::random_normal(rng, k);
        const auto f = [&](const Vector& x) { return 0.5 * (x - c).squaredNorm(); };
        const auto g = [&](const Vector& x) -> Vector { return x - c; };
        PgdSettings cfg;
        cfg.tol = 1e-15;
        cfg.stationarity_tol = 1e-12;
        const auto res = pgd_minimize_simplex(f, g, Vector::Constant(k, 1.0 / k), cfg);
        CHECK(res.converged);
        CHECK((res.x - project_simplex(c)).norm() < 1e-9);
    }
}

TEST_CASE("pgd_minimize_simplex: K = 1 and setting validation") {
    const auto f = [](const Vector& x) { return x(0); };
    const auto g = [](const Vector& x) -> Vector { return Vector::Ones(x.size()); };
    const auto r = pgd_minimize_simplex(f, g, Vector::Constant(1, 0.3), PgdSettings{});
    CHECK(r.x(0) == 1.0);
    PgdSettings bad;
    bad.backtrack_factor = 1.5;
    CHECK_THROWS(pgd_minimize_simplex(f, g, Vector::Constant(2, 0.5), bad));
}
