#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "duet/types.hpp"

namespace duet {

/// Euclidean projection onto {x : x >= 0, sum(x) = 1}.
Vector project_simplex(const Vector& v);

/// In-place variant used on hot paths; v must be finite.
void project_simplex_inplace(Eigen::Ref<Vector> v);

/// Proximal map of phi * ||.||_2: max(1 - phi/||a||, 0) * a.
Vector group_shrink(const Vector& a, double phi);

struct PgdSettings {
    int max_iters = 500;
    double tol = 1e-8;               // relative objective change treated as stalled
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    double init_step = 1.0;
    double stationarity_tol = 1e-6;  // ||x - P(x - grad f(x))||
};

struct PgdResult {
    Vector x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// ||x - P(x - g)||_2, the unit-step projected-gradient residual.
double projected_gradient_residual(const Vector& x, const Vector& g);

namespace detail {
void check_pgd_settings(const PgdSettings& cfg);
}

/// Projected gradient descent over the unit simplex with Armijo backtracking
/// along the projection arc. Trial steps after the first use the
/// Barzilai-Borwein estimate; accepted iterates never increase f.
///
/// f(x) may return +inf outside its domain; the line search then backtracks.
template <class Objective, class Gradient>
PgdResult pgd_minimize_simplex(Objective&& f, Gradient&& grad_f, const Vector& x0,
                               const PgdSettings& cfg) {
    detail::check_pgd_settings(cfg);
    PgdResult out;
    out.x = x0;
    if (x0.size() == 1) {
        out.x.setOnes();
        out.value = f(out.x);
        out.converged = true;
        return out;
    }

    Vector x = x0;
    double fx = f(x);
    Vector g = grad_f(x);
    if (!g.allFinite()) throw std::domain_error("pgd_minimize_simplex: non-finite gradient");

    double step = cfg.init_step;
    Vector x_new(x.size()), g_new(x.size()), trial(x.size());
    int it = 0;
    bool converged = false;
    for (; it < cfg.max_iters; ++it) {
        if (projected_gradient_residual(x, g) <= cfg.stationarity_tol) {
            converged = true;
            break;
        }
        double alpha = step;
        double f_new = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int bt = 0; bt < 80; ++bt) {
            trial = x - alpha * g;
            project_simplex_inplace(trial);
            f_new = f(trial);
            const double decrease = cfg.armijo_c * g.dot(trial - x);
            if (std::isfinite(f_new) && f_new <= fx + decrease) {
                accepted = true;
                break;
            }
            alpha *= cfg.backtrack_factor;
        }
        if (!accepted) {
            converged = projected_gradient_residual(x, g) <= cfg.stationarity_tol;
            break;
        }
        x_new = trial;
        g_new = grad_f(x_new);
        if (!g_new.allFinite()) throw std::domain_error("pgd_minimize_simplex: non-finite gradient");

        const Vector s = x_new - x;
        const Vector y = g_new - g;
        const double sy = s.dot(y);
        const double ss = s.squaredNorm();
        step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : std::min(alpha * 2.0, 1e12);

        const double change = std::abs(fx - f_new);
        x.swap(x_new);
        g.swap(g_new);
        fx = f_new;
        if (ss == 0.0 || change <= cfg.tol * std::max(std::abs(fx), 1e-300)) {
            ++it;
            converged = projected_gradient_residual(x, g) <= cfg.stationarity_tol;
            break;
        }
    }
    out.x = std::move(x);
    out.value = fx;
    out.iterations = it;
    out.converged = converged;
    return out;
}

}  // namespace duet
