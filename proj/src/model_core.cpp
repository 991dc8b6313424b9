#include "duet/model_core.hpp"

#include <algorithm>
#include <unordered_map>
#include <utility>

#include "duet/simplex.hpp"

namespace duet {

void check_expression(const ExpressionMatrix& expr) {
    const auto g = expr.n_genes();
    const auto n = expr.n_spots();
    if (g < 1 || n < 1) throw InputError("expression matrix is empty");
    if (static_cast<Eigen::Index>(expr.gene_ids.size()) != g)
        throw InputError("expression: gene_ids length does not match rows");
    if (static_cast<Eigen::Index>(expr.spot_ids.size()) != n)
        throw InputError("expression: spot_ids length does not match columns");
    if (static_cast<Eigen::Index>(expr.coords.size()) != n)
        throw InputError("expression: coords length does not match columns");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index r = 0; r < g; ++r) {
            const double c = expr.counts(r, i);
            if (!std::isfinite(c) || c < 0.0 || c != std::floor(c))
                throw InputError("expression: count at gene " + expr.gene_ids[r] + ", spot " +
                                 expr.spot_ids[i] + " is not a nonnegative integer");
        }
    std::vector<std::pair<double, double>> pts;
    pts.reserve(expr.coords.size());
    for (const auto& p : expr.coords) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw InputError("expression: non-finite spot coordinate");
        pts.emplace_back(p.x, p.y);
    }
    std::sort(pts.begin(), pts.end());
    if (std::adjacent_find(pts.begin(), pts.end()) != pts.end())
        throw InputError("expression: two spots share identical coordinates");
}

void check_reference(const ReferenceMatrix& ref) {
    if (ref.n_genes() < 1 || ref.n_types() < 1) throw InputError("reference matrix is empty");
    if (static_cast<Eigen::Index>(ref.gene_ids.size()) != ref.n_genes())
        throw InputError("reference: gene_ids length does not match rows");
    if (static_cast<Eigen::Index>(ref.celltype_ids.size()) != ref.n_types())
        throw InputError("reference: celltype_ids length does not match columns");
    if (!ref.values.allFinite() || (ref.values.array() < 0.0).any())
        throw InputError("reference: entries must be finite and nonnegative");
}

AlignedInputs validate_inputs(const ExpressionMatrix& expr, const ReferenceMatrix& ref,
                              const QcOptions& qc) {
    check_expression(expr);
    check_reference(ref);

    std::unordered_map<std::string, Eigen::Index> ref_row;
    for (Eigen::Index r = 0; r < ref.n_genes(); ++r) ref_row.emplace(ref.gene_ids[r], r);

    std::vector<std::pair<Eigen::Index, Eigen::Index>> shared;  // (expr row, ref row)
    for (Eigen::Index r = 0; r < expr.n_genes(); ++r)
        if (auto it = ref_row.find(expr.gene_ids[r]); it != ref_row.end())
            shared.emplace_back(r, it->second);
    if (shared.empty()) throw InputError("expression and reference share no genes");

    // Spot QC on the shared genes.
    std::vector<Eigen::Index> keep_spots;
    for (Eigen::Index i = 0; i < expr.n_spots(); ++i) {
        double total = 0.0;
        for (const auto& [er, rr] : shared) total += expr.counts(er, i);
        if (total > 0.0 && total >= qc.min_spot_count) keep_spots.push_back(i);
    }
    if (keep_spots.empty()) throw InputError("no spots survive quality control");

    std::vector<std::pair<Eigen::Index, Eigen::Index>> genes;
    for (const auto& [er, rr] : shared) {
        bool any = false;
        for (auto i : keep_spots)
            if (expr.counts(er, i) > 0.0) {
                any = true;
                break;
            }
        if (any) genes.emplace_back(er, rr);
    }
    if (genes.empty()) throw InputError("all shared genes have zero counts");

    AlignedInputs out;
    const auto g = static_cast<Eigen::Index>(genes.size());
    const auto n = static_cast<Eigen::Index>(keep_spots.size());
    out.expr.counts.resize(g, n);
    out.ref.values.resize(g, ref.n_types());
    for (Eigen::Index a = 0; a < g; ++a) {
        const auto [er, rr] = genes[static_cast<std::size_t>(a)];
        out.expr.gene_ids.push_back(expr.gene_ids[er]);
        out.ref.gene_ids.push_back(ref.gene_ids[rr]);
        out.ref.values.row(a) = ref.values.row(rr);
        for (Eigen::Index b = 0; b < n; ++b)
            out.expr.counts(a, b) = expr.counts(er, keep_spots[static_cast<std::size_t>(b)]);
    }
    for (auto i : keep_spots) {
        out.expr.spot_ids.push_back(expr.spot_ids[i]);
        out.expr.coords.push_back(expr.coords[i]);
    }
    out.ref.celltype_ids = ref.celltype_ids;
    return out;
}

ReferenceMatrix apply_pseudocount(ReferenceMatrix ref, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("apply_pseudocount: eps must be positive");
    ref.values = (ref.values.array() == 0.0).select(eps, ref.values);
    return ref;
}

bool rows_on_simplex(const RowMatrix& m, double tol) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if ((m.row(i).array() < 0.0).any()) return false;
        if (std::abs(m.row(i).sum() - 1.0) > tol) return false;
    }
    return true;
}

ClusterAssignment extract_clusters(const CompositionMatrix& theta, const FusionGraph& graph,
                                   double fuse_tol) {
    const auto n = theta.rows();
    if (graph.n != n) throw std::invalid_argument("extract_clusters: graph size mismatch");
    if (fuse_tol < 0.0) throw std::invalid_argument("extract_clusters: fuse_tol must be >= 0");

    UnionFind uf(static_cast<std::size_t>(n));
    for (const auto& e : graph.edges) {
        if (!(e.gamma > 0.0)) continue;
        if ((theta.row(e.i) - theta.row(e.j)).norm() <= fuse_tol)
            uf.unite(static_cast<std::size_t>(e.i), static_cast<std::size_t>(e.j));
    }

    ClusterAssignment out;
    out.labels.assign(static_cast<std::size_t>(n), 0);
    std::unordered_map<std::size_t, int> root_label;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto root = uf.find(static_cast<std::size_t>(i));
        auto [it, inserted] = root_label.emplace(root, static_cast<int>(root_label.size()) + 1);
        out.labels[static_cast<std::size_t>(i)] = it->second;
    }
    const auto c = static_cast<Eigen::Index>(root_label.size());
    RowMatrix sums = RowMatrix::Zero(c, theta.cols());
    Vector counts = Vector::Zero(c);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto l = out.labels[static_cast<std::size_t>(i)] - 1;
        sums.row(l) += theta.row(i);
        counts(l) += 1.0;
    }
    out.centroids.resize(c, theta.cols());
    for (Eigen::Index l = 0; l < c; ++l) {
        Vector mean = sums.row(l).transpose() / counts(l);
        project_simplex_inplace(mean);
        out.centroids.row(l) = mean.transpose();
    }
    return out;
}

}  // namespace duet
