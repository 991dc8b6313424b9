#include "duet/spatial_weights.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <string>

#include "duet/model_core.hpp"
#include "duet/parallel.hpp"
#include "duet/text.hpp"

namespace duet {

void check_weight_config(const WeightConfig& cfg) {
    if (cfg.k_star < 1 || cfg.k_dstar < 1) throw InputError("WeightConfig: k_star and k_dstar must be >= 1");
    if (!(cfg.prune_pct >= 0.0 && cfg.prune_pct <= 100.0))
        throw InputError("WeightConfig: prune_pct must lie in [0, 100]");
    if (!(cfg.floor_frac > 0.0)) throw InputError("WeightConfig: floor_frac must be positive");
    if (!(cfg.adjacency_factor > 0.0)) throw InputError("WeightConfig: adjacency_factor must be positive");
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto m = v.size();
    return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

// Adjacent spots ordered by composition distance, ties by lower index.
std::vector<std::pair<double, int>> sorted_neighbours(const CompositionMatrix& theta,
                                                      const Adjacency& adj, int i) {
    std::vector<std::pair<double, int>> d;
    d.reserve(adj[static_cast<std::size_t>(i)].size());
    for (int j : adj[static_cast<std::size_t>(i)]) d.emplace_back((theta.row(i) - theta.row(j)).norm(), j);
    std::sort(d.begin(), d.end());
    return d;
}

}  // namespace

Adjacency build_adjacency(const std::vector<Point2>& coords, double adjacency_factor) {
    const auto n = coords.size();
    if (n < 2) throw InputError("build_adjacency: need at least two spots");
    if (!(adjacency_factor > 0.0)) throw InputError("build_adjacency: factor must be positive");

    auto dist = [&](std::size_t a, std::size_t b) {
        return std::hypot(coords[a].x - coords[b].x, coords[a].y - coords[b].y);
    };
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const double d = dist(a, b);
            nearest[a] = std::min(nearest[a], d);
            nearest[b] = std::min(nearest[b], d);
        }
    const double scale = median_of(nearest);
    if (!(scale > 0.0)) throw InputError("build_adjacency: spot coordinates are coincident");

    const double cutoff = adjacency_factor * scale * (1.0 + 1e-9);
    Adjacency adj(n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (dist(a, b) <= cutoff) {
                adj[a].push_back(static_cast<int>(b));
                adj[b].push_back(static_cast<int>(a));
            }
    for (auto& list : adj) std::sort(list.begin(), list.end());
    return adj;
}

CompositionMatrix pilot_smooth(const CompositionMatrix& pilot, const Adjacency& adj, int k_star) {
    if (k_star < 1) throw InputError("pilot_smooth: k_star must be >= 1");
    if (static_cast<Eigen::Index>(adj.size()) != pilot.rows())
        throw std::invalid_argument("pilot_smooth: adjacency size mismatch");
    CompositionMatrix out(pilot.rows(), pilot.cols());
    parallel_for(pilot.rows(), [&](Eigen::Index i) {
        const auto nb = sorted_neighbours(pilot, adj, static_cast<int>(i));
        if (nb.empty()) {
            out.row(i) = pilot.row(i);
            return;
        }
        const auto take = std::min<std::size_t>(static_cast<std::size_t>(k_star), nb.size());
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(pilot.cols());
        for (std::size_t t = 0; t < take; ++t) acc += pilot.row(nb[t].second);
        out.row(i) = acc / static_cast<double>(take);
    });
    return out;
}

Vector adaptive_bandwidths(const CompositionMatrix& theta_tilde, const Adjacency& adj, int k_dstar) {
    if (k_dstar < 1) throw InputError("adaptive_bandwidths: k_dstar must be >= 1");
    Vector sigma(theta_tilde.rows());
    parallel_for(theta_tilde.rows(), [&](Eigen::Index i) {
        const auto nb = sorted_neighbours(theta_tilde, adj, static_cast<int>(i));
        if (nb.empty()) {
            sigma(i) = kBandwidthFloor;
            return;
        }
        const auto take = std::min<std::size_t>(static_cast<std::size_t>(k_dstar), nb.size());
        std::vector<double> d;
        for (std::size_t t = 0; t < take; ++t) d.push_back(nb[t].first);
        sigma(i) = std::max(median_of(std::move(d)), kBandwidthFloor);
    });
    return sigma;
}

std::vector<WeightedEdge> kernel_weights(const CompositionMatrix& theta_tilde, const Vector& sigmas,
                                         const Adjacency& adj) {
    std::vector<WeightedEdge> edges;
    for (std::size_t i = 0; i < adj.size(); ++i)
        for (int j : adj[i]) {
            if (static_cast<std::size_t>(j) <= i) continue;
            const auto a = static_cast<Eigen::Index>(i);
            const double d2 = (theta_tilde.row(a) - theta_tilde.row(j)).squaredNorm();
            const double g = std::exp(-d2 / (2.0 * sigmas(a) * sigmas(j)));
            edges.push_back({static_cast<int>(i), j, g});
        }
    return edges;
}

std::vector<WeightedEdge> max_similarity_spanning_tree(int n, std::vector<WeightedEdge> edges) {
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        const double ca = 1.0 - a.gamma, cb = 1.0 - b.gamma;
        if (ca != cb) return ca < cb;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    UnionFind uf(static_cast<std::size_t>(n));
    std::vector<WeightedEdge> tree;
    for (const auto& e : edges)
        if (uf.unite(static_cast<std::size_t>(e.i), static_cast<std::size_t>(e.j))) tree.push_back(e);
    return tree;
}

FusionGraph sparsify_with_mst(int n, const std::vector<WeightedEdge>& raw, double prune_pct,
                              double floor_frac) {
    if (!(prune_pct >= 0.0 && prune_pct <= 100.0)) throw InputError("sparsify: prune_pct out of range");
    if (!(floor_frac > 0.0)) throw InputError("sparsify: floor_frac must be positive");
    if (count_components(FusionGraph{n, raw}) != 1)
        throw InputError("sparsify: spatial adjacency graph is disconnected");

    // Incident edge indices per node.
    std::vector<std::vector<std::size_t>> incident(static_cast<std::size_t>(n));
    for (std::size_t e = 0; e < raw.size(); ++e) {
        incident[static_cast<std::size_t>(raw[e].i)].push_back(e);
        incident[static_cast<std::size_t>(raw[e].j)].push_back(e);
    }
    std::vector<char> keep(raw.size(), 0);
    for (int v = 0; v < n; ++v) {
        auto& list = incident[static_cast<std::size_t>(v)];
        auto other = [&](std::size_t e) { return raw[e].i == v ? raw[e].j : raw[e].i; };
        std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
            if (raw[a].gamma != raw[b].gamma) return raw[a].gamma < raw[b].gamma;
            return other(a) < other(b);
        });
        const auto drop = static_cast<std::size_t>(std::floor(prune_pct / 100.0 * static_cast<double>(list.size())));
        for (std::size_t t = drop; t < list.size(); ++t) keep[list[t]] = 1;
    }

    std::set<std::pair<int, int>> tree_pairs;
    for (const auto& t : max_similarity_spanning_tree(n, raw)) tree_pairs.emplace(t.i, t.j);
    std::vector<WeightedEdge> kept;
    for (std::size_t e = 0; e < raw.size(); ++e)
        if (keep[e] || tree_pairs.count({raw[e].i, raw[e].j})) kept.push_back(raw[e]);
    std::sort(kept.begin(), kept.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });

    double max_gamma = 0.0;
    for (const auto& e : kept) max_gamma = std::max(max_gamma, e.gamma);
    const double floor = floor_frac * (max_gamma > 0.0 ? max_gamma : 1.0);
    for (auto& e : kept) e.gamma = std::min(1.0, std::max(e.gamma, floor));
    return FusionGraph{n, std::move(kept)};
}

FusionGraph build_fusion_graph_from_pilot(const std::vector<Point2>& coords,
                                          const CompositionMatrix& pilot, const WeightConfig& cfg) {
    check_weight_config(cfg);
    const auto adj = build_adjacency(coords, cfg.adjacency_factor);
    const auto smooth = pilot_smooth(pilot, adj, cfg.k_star);
    const auto sigma = adaptive_bandwidths(smooth, adj, cfg.k_dstar);
    const auto raw = kernel_weights(smooth, sigma, adj);
    return sparsify_with_mst(static_cast<int>(coords.size()), raw, cfg.prune_pct, cfg.floor_frac);
}

FusionGraph build_fusion_graph(const ExpressionMatrix& expr, const ReferenceMatrix& ref,
                               const WeightConfig& cfg, const SpotwiseSettings& spotwise) {
    const auto pilot = spotwise_deconvolve(expr.counts, ref.values, spotwise);
    return build_fusion_graph_from_pilot(expr.coords, pilot.theta, cfg);
}

void write_edge_list(std::ostream& os, const FusionGraph& g) {
    os << "i,j,gamma\n";
    for (const auto& e : g.edges) os << e.i << ',' << e.j << ',' << text::format_double(e.gamma) << '\n';
}

FusionGraph read_edge_list(std::istream& is, int n) {
    FusionGraph g;
    g.n = n;
    std::string line;
    long line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto t = text::trim(line);
        if (t.empty()) continue;
        if (line_no == 1 && t.rfind("i,", 0) == 0) continue;
        const auto f = text::split_csv(t);
        const std::string ctx = "edge list line " + std::to_string(line_no);
        if (f.size() != 3) throw InputError(ctx + ": expected i,j,gamma");
        WeightedEdge e{static_cast<int>(text::parse_int(f[0], ctx)), static_cast<int>(text::parse_int(f[1], ctx)),
                       text::parse_double(f[2], ctx)};
        if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n || e.i == e.j)
            throw InputError(ctx + ": index out of range");
        if (e.i > e.j) std::swap(e.i, e.j);
        if (!(e.gamma > 0.0) || !std::isfinite(e.gamma)) throw InputError(ctx + ": gamma must be positive");
        g.edges.push_back(e);
    }
    return g;
}

}  // namespace duet
