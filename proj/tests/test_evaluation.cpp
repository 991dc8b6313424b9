#include <doctest.h>

#include "duet/evaluation.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace duet;

TEST_CASE("ARI small examples") {
    CHECK(adjusted_rand_index({1, 1, 2, 2}, {1, 1, 2, 2}) == 1.0);
    CHECK(adjusted_rand_index({1, 1, 2, 2}, {2, 2, 1, 1}) == 1.0);
    CHECK(adjusted_rand_index({1, 1, 1, 1}, {1, 1, 2, 2}) == 0.0);
    CHECK(oracle::ari_bruteforce({1, 1, 1, 1}, {1, 1, 2, 2}) == 0.0);
    CHECK(adjusted_rand_index({3, 3, 3}, {7, 7, 7}) == 1.0);
    CHECK_THROWS(adjusted_rand_index({1, 2}, {1}));
}

TEST_CASE("ARI agrees with pair counting on random labelings") {
    std::mt19937_64 rng(51);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 60);
        const int ca = 1 + static_cast<int>(rng() % 6), cb = 1 + static_cast<int>(rng() % 6);
        std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            a[static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng() % static_cast<unsigned>(ca));
            b[static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng() % static_cast<unsigned>(cb));
        }
        const double ari = adjusted_rand_index(a, b);
        CHECK(ari == doctest::Approx(oracle::ari_bruteforce(a, b)).epsilon(1e-12));
        CHECK(ari == doctest::Approx(adjusted_rand_index(b, a)).epsilon(1e-14));
        CHECK(ari <= 1.0 + 1e-15);
        std::vector<int> relabelled = a;
        for (auto& v : relabelled) v = 100 - 3 * v;
        CHECK(adjusted_rand_index(relabelled, b) == doctest::Approx(ari).epsilon(1e-14));
    }
}

TEST_CASE("Frobenius and max-row errors") {
    RowMatrix a(1, 2), b(1, 2);
    a << 0.6, 0.4;
    b << 0.5, 0.5;
    CHECK(frobenius_error(a, b) == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(frobenius_error(a, a) == 0.0);

    RowMatrix x(3, 2), y(3, 2);
    x << 0.5, 0.5, 0.2, 0.8, 1.0, 0.0;
    y = x;
    y(1, 0) += 0.3;
    y(1, 1) -= 0.3;
    CHECK(max_row_error(x, y) == doctest::Approx(std::sqrt(0.18)).epsilon(1e-12));
    CHECK(max_row_error(x, x) == 0.0);
    RowMatrix swapped = x;
    swapped.row(0).swap(swapped.row(2));
    CHECK(max_row_error(x, swapped) > 0.5);
    CHECK_THROWS(frobenius_error(x, a));

    std::mt19937_64 rng(52);
    RowMatrix p(7, 4), q(7, 4);
    for (int i = 0; i < 7; ++i) {
        p.row(i) = testing::random_simplex(rng, 4).transpose();
        q.row(i) = testing::random_simplex(rng, 4).transpose();
    }
    double naive = 0.0;
    for (int i = 0; i < 7; ++i)
        for (int k = 0; k < 4; ++k) naive += (p(i, k) - q(i, k)) * (p(i, k) - q(i, k));
    CHECK(std::abs(frobenius_error(p, q) - naive) < 1e-12);
}

TEST_CASE("dominant type labels and evaluate") {
    RowMatrix t(3, 3);
    t << 0.2, 0.5, 0.3,
         0.4, 0.4, 0.2,
         0.0, 0.0, 1.0;
    CHECK(dominant_type_labels(t) == std::vector<int>{2, 1, 3});
    const auto rep = evaluate({1, 1, 2}, t, {5, 5, 9}, t);
    CHECK(rep.ari == 1.0);
    CHECK(rep.frob_sq_error == 0.0);
    CHECK(rep.max_row_error == 0.0);
}
