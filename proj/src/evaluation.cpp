#include "duet/evaluation.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>

namespace duet {

namespace {

std::int64_t choose2(std::int64_t m) { return m * (m - 1) / 2; }

void check_same_shape(const RowMatrix& a, const RowMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("metric: shape mismatch");
}

}  // namespace

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: length mismatch");
    if (a.size() < 2) throw std::invalid_argument("adjusted_rand_index: need at least two items");

    std::map<std::pair<int, int>, std::int64_t> cells;
    std::map<int, std::int64_t> rows, cols;
    for (std::size_t t = 0; t < a.size(); ++t) {
        ++cells[{a[t], b[t]}];
        ++rows[a[t]];
        ++cols[b[t]];
    }
    std::int64_t index = 0, sum_a = 0, sum_b = 0;
    for (const auto& [key, m] : cells) index += choose2(m);
    for (const auto& [key, m] : rows) sum_a += choose2(m);
    for (const auto& [key, m] : cols) sum_b += choose2(m);
    const auto total = choose2(static_cast<std::int64_t>(a.size()));

    // ARI = 2 (index * total - sa * sb) / ((sa + sb) * total - 2 sa * sb), formed
    // exactly in 128-bit integers so the result is one correctly rounded division.
    using i128 = __int128;
    const i128 num = 2 * (static_cast<i128>(index) * total - static_cast<i128>(sum_a) * sum_b);
    const i128 den = static_cast<i128>(sum_a + sum_b) * total - 2 * static_cast<i128>(sum_a) * sum_b;
    if (den == 0) return 1.0;
    constexpr i128 exact = i128{1} << 53;
    if (num < exact && -num < exact && den < exact && -den < exact)
        return static_cast<double>(num) / static_cast<double>(den);
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

double frobenius_error(const RowMatrix& theta_hat, const RowMatrix& theta_star) {
    check_same_shape(theta_hat, theta_star);
    return (theta_hat - theta_star).squaredNorm();
}

double max_row_error(const RowMatrix& theta_hat, const RowMatrix& theta_star) {
    check_same_shape(theta_hat, theta_star);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < theta_hat.rows(); ++i)
        worst = std::max(worst, (theta_hat.row(i) - theta_star.row(i)).norm());
    return worst;
}

std::vector<int> dominant_type_labels(const RowMatrix& theta) {
    std::vector<int> out(static_cast<std::size_t>(theta.rows()));
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < theta.cols(); ++k)
            if (theta(i, k) > theta(i, best)) best = k;
        out[static_cast<std::size_t>(i)] = static_cast<int>(best) + 1;
    }
    return out;
}

MetricReport evaluate(const std::vector<int>& labels_hat, const RowMatrix& theta_hat,
                      const std::vector<int>& labels_star, const RowMatrix& theta_star) {
    return MetricReport{adjusted_rand_index(labels_hat, labels_star), frobenius_error(theta_hat, theta_star),
                        max_row_error(theta_hat, theta_star)};
}

}  // namespace duet
