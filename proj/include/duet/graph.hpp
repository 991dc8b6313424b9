#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

namespace duet {

struct WeightedEdge {
    int i = 0;  // i < j
    int j = 0;
    double gamma = 0.0;
};

/// Sparse symmetric fusion weights; each unordered pair is stored once with i < j.
struct FusionGraph {
    int n = 0;
    std::vector<WeightedEdge> edges;
};

/// Disjoint-set forest with path halving and union by size.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

/// Number of connected components of the graph over all n nodes.
inline int count_components(const FusionGraph& g) {
    UnionFind uf(static_cast<std::size_t>(g.n));
    int comps = g.n;
    for (const auto& e : g.edges)
        if (uf.unite(static_cast<std::size_t>(e.i), static_cast<std::size_t>(e.j))) --comps;
    return comps;
}

}  // namespace duet
