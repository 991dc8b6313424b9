#pragma once

#include <random>

#include "duet/simplex.hpp"
#include "duet/simulation.hpp"
#include "duet/types.hpp"

namespace duet::testing {

inline Vector random_simplex(std::mt19937_64& rng, int k) {
    std::gamma_distribution<double> gam(1.0, 1.0);
    Vector v(k);
    for (int j = 0; j < k; ++j) v(j) = gam(rng);
    return v / v.sum();
}

inline Vector random_interior(std::mt19937_64& rng, int k) {
    Vector v = random_simplex(rng, k);
    v = 0.9 * v + Vector::Constant(k, 0.1 / k);
    return v / v.sum();
}

inline Vector random_normal(std::mt19937_64& rng, int k, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Vector v(k);
    for (int j = 0; j < k; ++j) v(j) = nd(rng);
    return v;
}

/// Small simulated dataset on a side x side grid (5 clusters, smoothness 1).
struct SmallData {
    sim::GroundTruth truth;
    ExpressionMatrix expr;
    ReferenceMatrix ref;
};

inline SmallData small_sim(int side, std::uint64_t seed, int size_factor_max = 50) {
    sim::SimulationScenario sc;
    sc.grid_side = side;
    sc.reference = sim::default_reference();
    sc.seed = seed;
    sc.size_factor_max = size_factor_max;
    SmallData d{sim::gen_ground_truth(sc), {}, sc.reference};
    d.expr = sim::gen_counts(d.truth, d.ref);
    return d;
}

}  // namespace duet::testing
