#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "duet/graph.hpp"
#include "duet/poisson.hpp"
#include "duet/types.hpp"

namespace duet {

struct WeightConfig {
    int k_star = 7;            // neighbours averaged in pilot smoothing
    int k_dstar = 6;           // neighbours in the bandwidth median
    double prune_pct = 30.0;   // weakest share of each node's edges to drop
    double floor_frac = 1e-3;  // lower bound as a fraction of the largest weight
    double adjacency_factor = 1.2;
};

void check_weight_config(const WeightConfig& cfg);

/// Adjacency lists; neighbours sorted by index.
using Adjacency = std::vector<std::vector<int>>;

/// Spots i, j are adjacent iff their distance is at most
/// factor * (median nearest-neighbour distance).
Adjacency build_adjacency(const std::vector<Point2>& coords, double adjacency_factor);

/// Mean of the pilot rows of the k_star adjacent spots closest in composition.
CompositionMatrix pilot_smooth(const CompositionMatrix& pilot, const Adjacency& adj, int k_star);

/// Median of the k_dstar smallest composition distances to adjacent spots,
/// floored at 1e-8.
Vector adaptive_bandwidths(const CompositionMatrix& theta_tilde, const Adjacency& adj, int k_dstar);

inline constexpr double kBandwidthFloor = 1e-8;

/// Gaussian kernel on every adjacent pair (i < j); may contain zero weights.
std::vector<WeightedEdge> kernel_weights(const CompositionMatrix& theta_tilde, const Vector& sigmas,
                                         const Adjacency& adj);

/// Per-node pruning, union with a maximum-similarity spanning tree of the raw
/// graph, then flooring. Throws InputError if the raw graph is disconnected.
FusionGraph sparsify_with_mst(int n, const std::vector<WeightedEdge>& raw, double prune_pct,
                              double floor_frac);

/// Kruskal spanning tree using cost 1 - gamma; ties broken by (i, j).
std::vector<WeightedEdge> max_similarity_spanning_tree(int n, std::vector<WeightedEdge> edges);

FusionGraph build_fusion_graph_from_pilot(const std::vector<Point2>& coords,
                                          const CompositionMatrix& pilot, const WeightConfig& cfg);

/// Spotwise pilot followed by the full weight construction.
FusionGraph build_fusion_graph(const ExpressionMatrix& expr, const ReferenceMatrix& ref,
                               const WeightConfig& cfg, const SpotwiseSettings& spotwise = {});

/// Edge list text: header `i,j,gamma`, then one 0-based edge per line.
void write_edge_list(std::ostream& os, const FusionGraph& g);
FusionGraph read_edge_list(std::istream& is, int n);

}  // namespace duet
