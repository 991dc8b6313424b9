#pragma once

#include <cmath>

#include "duet/graph.hpp"
#include "duet/types.hpp"

namespace duet {

struct QcOptions {
    /// Spots whose total count is below this are dropped.
    double min_spot_count = 100.0;
};

struct AlignedInputs {
    ExpressionMatrix expr;
    ReferenceMatrix ref;
};

/// Intersects gene sets (expression order is kept), drops low-count spots and
/// then all-zero genes. Throws InputError on structural problems.
AlignedInputs validate_inputs(const ExpressionMatrix& expr, const ReferenceMatrix& ref,
                              const QcOptions& qc = {});

/// Checks shapes, nonnegative integral counts, finite and distinct coordinates.
void check_expression(const ExpressionMatrix& expr);
void check_reference(const ReferenceMatrix& ref);

/// Replaces zero entries by eps.
ReferenceMatrix apply_pseudocount(ReferenceMatrix ref, double eps = 1e-4);

inline double default_fuse_tol(Eigen::Index n_types) {
    return 1e-3 * std::sqrt(static_cast<double>(n_types));
}

/// Connected components of the edges whose endpoint compositions lie within
/// fuse_tol. Labels are numbered 1.. in order of first appearance.
ClusterAssignment extract_clusters(const CompositionMatrix& theta, const FusionGraph& graph,
                                   double fuse_tol);

/// True when every row is nonnegative and sums to one within tol.
bool rows_on_simplex(const RowMatrix& m, double tol = 1e-9);

}  // namespace duet
