#include "duet/simplex.hpp"

#include <vector>

namespace duet {

// Condat's variant of the Michelot pivot algorithm: a single forward pass
// builds a candidate active set and a running threshold, then repeated
// sweeps evict entries below the threshold until it stabilises.
void project_simplex_inplace(Eigen::Ref<Vector> v) {
    const Eigen::Index k = v.size();
    if (k == 0) return;
    if (k == 1) {
        v(0) = 1.0;
        return;
    }
    thread_local std::vector<char> active;
    active.assign(static_cast<std::size_t>(k), 0);

    double tau = v(0) - 1.0;
    double count = 1.0;
    active[0] = 1;
    for (Eigen::Index d = 1; d < k; ++d) {
        if (v(d) > tau) {
            active[static_cast<std::size_t>(d)] = 1;
            count += 1.0;
            tau += (v(d) - tau) / count;
        }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (Eigen::Index d = 0; d < k; ++d) {
            if (active[static_cast<std::size_t>(d)] && v(d) <= tau) {
                active[static_cast<std::size_t>(d)] = 0;
                count -= 1.0;
                tau += (tau - v(d)) / count;
                changed = true;
            }
        }
    }
    double sum = 0.0;
    for (Eigen::Index d = 0; d < k; ++d) {
        v(d) = active[static_cast<std::size_t>(d)] ? v(d) - tau : 0.0;
        sum += v(d);
    }
    // Renormalise the rounding residue so the row sums to one to ~1 ulp.
    if (sum > 0.0 && sum != 1.0) v /= sum;
}

Vector project_simplex(const Vector& v) {
    if (!v.allFinite()) throw std::domain_error("project_simplex: non-finite input");
    if (v.size() == 0) throw std::invalid_argument("project_simplex: empty vector");
    Vector out = v;
    project_simplex_inplace(out);
    return out;
}

Vector group_shrink(const Vector& a, double phi) {
    if (phi < 0.0) throw std::invalid_argument("group_shrink: phi must be nonnegative");
    const double norm = a.norm();
    if (norm == 0.0 || phi >= norm) return Vector::Zero(a.size());
    return (1.0 - phi / norm) * a;
}

double projected_gradient_residual(const Vector& x, const Vector& g) {
    Vector p = x - g;
    project_simplex_inplace(p);
    return (x - p).norm();
}

namespace detail {
void check_pgd_settings(const PgdSettings& cfg) {
    if (cfg.max_iters < 0 || !(cfg.tol > 0.0) || !(cfg.armijo_c > 0.0 && cfg.armijo_c < 1.0) ||
        !(cfg.backtrack_factor > 0.0 && cfg.backtrack_factor < 1.0) || !(cfg.init_step > 0.0) ||
        !(cfg.stationarity_tol > 0.0))
        throw std::invalid_argument("PgdSettings: field out of range");
}
}  // namespace detail

}  // namespace duet
