#pragma once

#include <vector>

#include "duet/types.hpp"

namespace duet {

struct MetricReport {
    double ari = 0.0;
    double frob_sq_error = 0.0;
    double max_row_error = 0.0;
};

/// Pair-counting ARI from the contingency table. Partitions that are both a
/// single block (or both all singletons) compare as identical and score 1.
double adjusted_rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

/// ||theta_hat - theta_star||_F^2.
double frobenius_error(const RowMatrix& theta_hat, const RowMatrix& theta_star);

/// max_i ||theta_hat_i - theta_star_i||_2 (row-aligned).
double max_row_error(const RowMatrix& theta_hat, const RowMatrix& theta_star);

/// 1-based argmax of each row, ties to the lowest type index.
std::vector<int> dominant_type_labels(const RowMatrix& theta);

MetricReport evaluate(const std::vector<int>& labels_hat, const RowMatrix& theta_hat,
                      const std::vector<int>& labels_star, const RowMatrix& theta_star);

}  // namespace duet
