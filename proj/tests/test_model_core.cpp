#include <doctest.h>

#include "duet/model_core.hpp"
#include "helpers.hpp"

using namespace duet;

namespace {

ExpressionMatrix tiny_expr() {
    ExpressionMatrix e;
    e.counts.resize(3, 3);
    e.counts << 50, 0, 80,
                60, 0, 0,
                 0, 0, 0;
    e.gene_ids = {"g1", "g2", "g3"};
    e.spot_ids = {"a", "b", "c"};
    e.coords = {{0, 0}, {1, 0}, {2, 0}};
    return e;
}

ReferenceMatrix tiny_ref() {
    ReferenceMatrix r;
    r.values.resize(3, 2);
    r.values << 1, 2,
                3, 4,
                5, 6;
    r.gene_ids = {"g3", "g2", "g1"};
    r.celltype_ids = {"A", "B"};
    return r;
}

}  // namespace

TEST_CASE("validate_inputs aligns genes and applies QC") {
    const auto out = validate_inputs(tiny_expr(), tiny_ref(), QcOptions{1.0});
    // spot b is empty; gene g3 has no counts after QC
    CHECK(out.expr.spot_ids == std::vector<std::string>{"a", "c"});
    CHECK(out.expr.gene_ids == std::vector<std::string>{"g1", "g2"});
    CHECK(out.ref.gene_ids == out.expr.gene_ids);
    CHECK(out.ref.values(0, 0) == 5.0);
    CHECK(out.ref.values(1, 1) == 4.0);
    CHECK(out.expr.counts(1, 1) == 0.0);
    CHECK(out.expr.coords[1].x == 2.0);

    const auto strict = validate_inputs(tiny_expr(), tiny_ref(), QcOptions{100.0});
    CHECK(strict.expr.spot_ids == std::vector<std::string>{"a"});
}

TEST_CASE("validate_inputs errors") {
    auto e = tiny_expr();
    e.counts(0, 0) = 1.5;
    CHECK_THROWS_AS(validate_inputs(e, tiny_ref(), QcOptions{1.0}), InputError);

    e = tiny_expr();
    e.counts(0, 0) = -1;
    CHECK_THROWS_AS(validate_inputs(e, tiny_ref(), QcOptions{1.0}), InputError);

    e = tiny_expr();
    e.coords[2] = e.coords[0];
    CHECK_THROWS_AS(validate_inputs(e, tiny_ref(), QcOptions{1.0}), InputError);

    auto r = tiny_ref();
    r.gene_ids = {"x", "y", "z"};
    CHECK_THROWS_AS(validate_inputs(tiny_expr(), r, QcOptions{1.0}), InputError);

    r = tiny_ref();
    r.values(0, 0) = -0.1;
    CHECK_THROWS_AS(validate_inputs(tiny_expr(), r, QcOptions{1.0}), InputError);

    CHECK_THROWS_AS(validate_inputs(tiny_expr(), tiny_ref(), QcOptions{1e6}), InputError);
}

TEST_CASE("apply_pseudocount replaces zeros only") {
    ReferenceMatrix r;
    r.values.resize(2, 2);
    r.values << 0, 2,
                0, 0;
    const auto p = apply_pseudocount(r);
    CHECK(p.values(0, 0) == 1e-4);
    CHECK(p.values(0, 1) == 2.0);
    CHECK(p.values(1, 1) == 1e-4);
}

TEST_CASE("extract_clusters") {
    RowMatrix theta(4, 2);
    theta << 0.5, 0.5,
             0.5, 0.5,
             0.1, 0.9,
             0.5, 0.5;
    // path 0-1-2-3: spot 3 matches 0 and 1 but is only linked through 2
    FusionGraph g{4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}}};
    auto c = extract_clusters(theta, g, 1e-6);
    CHECK(c.labels == std::vector<int>{1, 1, 2, 3});
    CHECK(c.n_clusters() == 3);
    CHECK(rows_on_simplex(c.centroids));
    CHECK(c.centroids(1, 1) == doctest::Approx(0.9));

    // zero-weight edges never fuse
    FusionGraph z{4, {{0, 1, 0.0}}};
    CHECK(extract_clusters(theta, z, 1.0).n_clusters() == 4);

    // a loose tolerance fuses along the path
    CHECK(extract_clusters(theta, g, 1.0).n_clusters() == 1);

    // fuse_tol = 0 keeps distinct rows apart but merges identical ones
    CHECK(extract_clusters(theta, g, 0.0).n_clusters() == 3);
}

TEST_CASE("extract_clusters: centroid is the projected member mean") {
    RowMatrix theta(2, 3);
    theta << 0.2, 0.3, 0.5,
             0.2, 0.3, 0.5 + 1e-9;
    FusionGraph g{2, {{0, 1, 0.5}}};
    const auto c = extract_clusters(theta, g, default_fuse_tol(3));
    CHECK(c.n_clusters() == 1);
    CHECK(std::abs(c.centroids.row(0).sum() - 1.0) < 1e-15);
}
