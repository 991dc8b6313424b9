#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "duet/poisson.hpp"
#include "duet/types.hpp"

namespace duet::oracle {

/// Exhaustive QP over supports: for every nonempty support S the closest
/// point of the face {x_S = v_S - t, sum x = 1} is checked for feasibility;
/// the feasible candidate nearest to v is the projection.
inline Vector simplex_projection_bruteforce(const Vector& v) {
    const auto k = static_cast<int>(v.size());
    Vector best = Vector::Zero(k);
    double best_dist = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        double sum = 0.0;
        int m = 0;
        for (int j = 0; j < k; ++j)
            if (mask & (1u << j)) {
                sum += v(j);
                ++m;
            }
        const double t = (sum - 1.0) / m;
        Vector x = Vector::Zero(k);
        bool feasible = true;
        for (int j = 0; j < k; ++j)
            if (mask & (1u << j)) {
                x(j) = v(j) - t;
                if (x(j) < -1e-15) feasible = false;
            }
        if (!feasible) continue;
        x = x.cwiseMax(0.0);
        const double d = (x - v).squaredNorm();
        if (d < best_dist) {
            best_dist = d;
            best = x;
        }
    }
    return best;
}

/// Pair-counting ARI over all n(n-1)/2 pairs.
inline double ari_bruteforce(const std::vector<int>& a, const std::vector<int>& b) {
    const auto n = a.size();
    long long both = 0, only_a = 0, only_b = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            both += sa && sb;
            only_a += sa;
            only_b += sb;
            ++total;
        }
    // index = both, sum_a = only_a, sum_b = only_b
    const __int128 num = 2 * (static_cast<__int128>(both) * total - static_cast<__int128>(only_a) * only_b);
    const __int128 den = static_cast<__int128>(only_a + only_b) * total - 2 * static_cast<__int128>(only_a) * only_b;
    if (den == 0) return 1.0;
    return static_cast<double>(num) / static_cast<double>(den);
}

inline Vector grad_fd(const Vector& x, const Eigen::MatrixXd& B, const Vector& theta, double s, double h) {
    Vector g(theta.size());
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        Vector up = theta, dn = theta;
        up(k) += h;
        dn(k) -= h;
        g(k) = (nll_spot(x, B, up, s) - nll_spot(x, B, dn, s)) / (2.0 * h);
    }
    return g;
}

}  // namespace duet::oracle
