#pragma once

#include <cstdint>
#include <vector>

#include "duet/types.hpp"

namespace duet::sim {

struct SimulationScenario {
    int grid_side = 20;
    int n_clusters = 5;  // 5, 7 or 10
    int smoothness = 1;  // 1, 2 or 3
    ReferenceMatrix reference;
    std::uint64_t seed = 1;
    int size_factor_max = 50;
};

struct GroundTruth {
    CompositionMatrix theta_star;  // cluster-constant rows
    CompositionMatrix v_star;      // realised (multinomial) compositions
    SizeFactors s_star;
    ClusterAssignment labels;
    int grid_side = 0;
    std::uint64_t seed = 0;
};

/// Characteristic compositions, one row per cluster (K = 5). The C = 5 tables
/// are the published ones; C = 7 and C = 10 extend them with mixed rows in the
/// same style (table version 1).
RowMatrix theta_dagger(int n_clusters, int smoothness);

/// Fixed geometric partition of a side x side grid, spot index r * side + c,
/// labels 1..C. Every region is rook-connected (layout version 1).
std::vector<int> make_partition(int grid_side, int n_clusters);

/// Grid coordinates (x = column, y = row) in spot order.
std::vector<Point2> grid_coords(int grid_side);

/// Bundled 66 x 5 synthetic marker-gene reference (version 1).
ReferenceMatrix default_reference();

GroundTruth gen_ground_truth(const SimulationScenario& scenario);

/// Poisson counts X_gi ~ Poi(s_i * b_g' v_i) with grid coordinates attached.
ExpressionMatrix gen_counts(const GroundTruth& truth, const ReferenceMatrix& ref);

/// Counter-based stream identifiers.
inline constexpr std::uint64_t kStreamSizeFactor = 0x51;
inline constexpr std::uint64_t kStreamMultinomial = 0x52;
inline constexpr std::uint64_t kStreamCounts = 0x53;

}  // namespace duet::sim
