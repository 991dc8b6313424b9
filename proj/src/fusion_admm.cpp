#include "duet/fusion_admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "duet/parallel.hpp"
#include "duet/poisson.hpp"
#include "duet/text.hpp"

namespace duet {

EdgeIncidence::EdgeIncidence(const FusionGraph& graph) : n_(graph.n) {
    edges_.reserve(graph.edges.size());
    for (const auto& e : graph.edges) edges_.emplace_back(e.i, e.j);
}

EdgeIncidence::EdgeIncidence(int n, std::vector<std::pair<int, int>> edges)
    : n_(n), edges_(std::move(edges)) {
    for (const auto& [i, j] : edges_)
        if (i < 0 || j < 0 || i >= n_ || j >= n_ || i == j)
            throw std::invalid_argument("EdgeIncidence: bad edge");
}

RowMatrix EdgeIncidence::apply(const RowMatrix& theta) const {
    if (theta.rows() != n_) throw std::invalid_argument("EdgeIncidence::apply: row mismatch");
    RowMatrix out(n_edges(), theta.cols());
    for (Eigen::Index e = 0; e < n_edges(); ++e) {
        const auto [i, j] = edges_[static_cast<std::size_t>(e)];
        out.row(e) = theta.row(i) - theta.row(j);
    }
    return out;
}

RowMatrix EdgeIncidence::adjoint(const RowMatrix& m) const {
    if (m.rows() != n_edges()) throw std::invalid_argument("EdgeIncidence::adjoint: row mismatch");
    RowMatrix out = RowMatrix::Zero(n_, m.cols());
    for (Eigen::Index e = 0; e < n_edges(); ++e) {
        const auto [i, j] = edges_[static_cast<std::size_t>(e)];
        out.row(i) += m.row(e);
        out.row(j) -= m.row(e);
    }
    return out;
}

int EdgeIncidence::max_degree() const {
    std::vector<int> deg(static_cast<std::size_t>(n_), 0);
    for (const auto& [i, j] : edges_) {
        ++deg[static_cast<std::size_t>(i)];
        ++deg[static_cast<std::size_t>(j)];
    }
    return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

double eta_bound(const EdgeIncidence& inc) {
    if (inc.n_edges() == 0) return 0.0;
    const int n = inc.n();
    Vector v(n);
    // Deterministic pseudo-random start with the constant null vector removed.
    std::uint64_t state = 0x9E3779B97F4A7C15ULL;
    for (int i = 0; i < n; ++i) {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        v(i) = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
    }
    v.array() -= v.mean();
    v.normalize();

    std::vector<int> deg(static_cast<std::size_t>(n), 0);
    for (const auto& [i, j] : inc.edges()) {
        ++deg[static_cast<std::size_t>(i)];
        ++deg[static_cast<std::size_t>(j)];
    }
    auto laplacian = [&](const Vector& x) {
        Vector y(n);
        for (int i = 0; i < n; ++i) y(i) = deg[static_cast<std::size_t>(i)] * x(i);
        for (const auto& [i, j] : inc.edges()) {
            y(i) -= x(j);
            y(j) -= x(i);
        }
        return y;
    };

    double estimate = 0.0;
    for (int it = 0; it < 100000; ++it) {
        Vector y = laplacian(v);
        const double next = v.dot(y);
        const double norm = y.norm();
        if (norm == 0.0) break;
        v = y / norm;
        if (it > 0 && std::abs(next - estimate) <= 1e-6 * std::abs(next)) {
            estimate = next;
            break;
        }
        estimate = next;
    }
    const double cap = 1.01 * 2.0 * inc.max_degree();
    return std::min(1.01 * estimate, cap);
}

void check_admm_config(const AdmmConfig& cfg) {
    if (!(cfg.rho_init > 0.0) || !(cfg.tau > 1.0) || !(cfg.mu > 1.0) || !(cfg.eps_abs > 0.0) ||
        !(cfg.eps_rel > 0.0) || cfg.max_iters < 1 || cfg.adapt_iters < 0 || !(cfg.rho_min > 0.0) || !(cfg.rho_max >= cfg.rho_min))
        throw std::invalid_argument("AdmmConfig: field out of range");
    detail::check_pgd_settings(cfg.pgd);
}

double penalized_objective(const ThetaProblem& p, const CompositionMatrix& theta) {
    const double n = static_cast<double>(p.n());
    double fit = 0.0;
    for (Eigen::Index i = 0; i < p.n(); ++i)
        fit += nll_spot(p.counts->col(i), *p.B, theta.row(i).transpose(), (*p.s)(i));
    double pen = 0.0;
    if (p.lambda != 0.0)
        for (const auto& e : p.graph->edges) pen += e.gamma * (theta.row(e.i) - theta.row(e.j)).norm();
    return fit / n + p.lambda * pen;
}

AdmmState initial_admm_state(const EdgeIncidence& inc, const CompositionMatrix& theta0,
                             const AdmmConfig& cfg) {
    AdmmState st;
    st.theta = theta0;
    st.omega = inc.apply(theta0);
    st.gamma = RowMatrix::Zero(inc.n_edges(), theta0.cols());
    st.rho = cfg.rho_init;
    st.eta = eta_bound(inc);
    st.iteration = 0;
    return st;
}

RowMatrix theta_shift(const EdgeIncidence& inc, const AdmmState& state) {
    const RowMatrix m = state.rho * (state.omega - inc.apply(state.theta)) + state.gamma;
    return inc.adjoint(m);
}

namespace {

// (1/n) nll + (w/2)||t - c||^2 for one spot; +inf off the likelihood domain.
struct SpotSurrogate {
    const Eigen::MatrixXd& B;
    Eigen::Ref<const Vector> x;
    double s;
    double inv_n;
    double w;
    const Vector& centre;

    double value(const Vector& t) const {
        const Vector rate = B * t;
        double total = 0.0;
        for (Eigen::Index g = 0; g < x.size(); ++g) {
            const double mu = s * rate(g);
            if (x(g) > 0.0) {
                if (!(mu > 0.0)) return std::numeric_limits<double>::infinity();
                total += mu - x(g) * std::log(mu);
            } else {
                total += mu;
            }
        }
        return inv_n * total + 0.5 * w * (t - centre).squaredNorm();
    }

    Vector gradient(const Vector& t) const {
        const Vector rate = B * t;
        Vector wts(x.size());
        for (Eigen::Index g = 0; g < x.size(); ++g) wts(g) = x(g) > 0.0 ? s - x(g) / rate(g) : s;
        return inv_n * (B.transpose() * wts) + w * (t - centre);
    }

    double curvature_trace(const Vector& t) const {
        const Vector rate = B * t;
        double tr = 0.0;
        for (Eigen::Index g = 0; g < x.size(); ++g)
            if (x(g) > 0.0) tr += x(g) * B.row(g).squaredNorm() / (rate(g) * rate(g));
        return inv_n * tr + w * static_cast<double>(t.size());
    }
};

}  // namespace

RowMatrix theta_block_update(const AdmmState& state, const ThetaProblem& p, const EdgeIncidence& inc,
                             const AdmmConfig& cfg) {
    const RowMatrix shift = theta_shift(inc, state);
    const double w = state.rho * state.eta;
    const double inv_n = 1.0 / static_cast<double>(p.n());
    RowMatrix out(state.theta.rows(), state.theta.cols());
    parallel_for(p.n(), [&](Eigen::Index i) {
        const Vector anchor = state.theta.row(i).transpose();
        const Vector centre = w > 0.0 ? Vector(anchor + shift.row(i).transpose() / w) : anchor;
        const SpotSurrogate m{*p.B, p.counts->col(i), (*p.s)(i), inv_n, w, centre};
        PgdSettings local = cfg.pgd;
        if (const double tr = m.curvature_trace(anchor); tr > 0.0) local.init_step = 1.0 / tr;
        auto res = pgd_minimize_simplex([&](const Vector& t) { return m.value(t); },
                                        [&](const Vector& t) { return m.gradient(t); }, anchor, local);
        out.row(i) = res.x.transpose();
    });
    return out;
}

RowMatrix omega_update(const EdgeIncidence& inc, const RowMatrix& theta, const RowMatrix& gamma,
                       double rho, double lambda, const FusionGraph& graph) {
    if (static_cast<Eigen::Index>(graph.edges.size()) != inc.n_edges())
        throw std::invalid_argument("omega_update: graph/incidence mismatch");
    RowMatrix out(inc.n_edges(), theta.cols());
    parallel_for(inc.n_edges(), [&](Eigen::Index e) {
        const auto [i, j] = inc.edges()[static_cast<std::size_t>(e)];
        const Vector a = (theta.row(i) - theta.row(j) - gamma.row(e) / rho).transpose();
        const double phi = lambda * graph.edges[static_cast<std::size_t>(e)].gamma / rho;
        out.row(e) = group_shrink(a, phi).transpose();
    });
    return out;
}

Residuals residuals(const EdgeIncidence& inc, const RowMatrix& omega_prev, const RowMatrix& theta_prev,
                    const AdmmState& state, double eps_abs, double eps_rel) {
    const RowMatrix a_theta = inc.apply(state.theta);
    const auto e = static_cast<double>(inc.n_edges());
    const auto n = static_cast<double>(state.theta.rows());
    const auto k = static_cast<double>(state.theta.cols());
    Residuals r;
    r.primal = (a_theta - state.omega).norm();
    const RowMatrix step = state.theta - theta_prev;
    const RowMatrix lin = state.eta * step - inc.adjoint(inc.apply(step));
    r.dual = state.rho * (inc.adjoint(state.omega - omega_prev) + lin).norm();
    r.eps_pri = std::sqrt(e * k) * eps_abs + eps_rel * std::max(a_theta.norm(), state.omega.norm());
    r.eps_dual = std::sqrt(n * k) * eps_abs + eps_rel * inc.adjoint(state.gamma).norm();
    return r;
}

double adapt_rho(double rho, double primal_ratio, double dual_ratio, double tau, double mu) {
    if (primal_ratio >= mu * dual_ratio && primal_ratio > 0.0) return rho * tau;
    if (dual_ratio >= mu * primal_ratio && dual_ratio > 0.0) return rho / tau;
    return rho;
}

double augmented_lagrangian(const ThetaProblem& p, const EdgeIncidence& inc, const RowMatrix& theta,
                            const RowMatrix& omega, const RowMatrix& gamma, double rho) {
    const double n = static_cast<double>(p.n());
    double fit = 0.0;
    for (Eigen::Index i = 0; i < p.n(); ++i)
        fit += nll_spot(p.counts->col(i), *p.B, theta.row(i).transpose(), (*p.s)(i));
    double pen = 0.0;
    for (Eigen::Index e = 0; e < omega.rows(); ++e)
        pen += p.graph->edges[static_cast<std::size_t>(e)].gamma * omega.row(e).norm();
    const RowMatrix gap = omega - inc.apply(theta);
    return fit / n + p.lambda * pen + gamma.cwiseProduct(gap).sum() + 0.5 * rho * gap.squaredNorm();
}

double majorizer_value(const ThetaProblem& p, const EdgeIncidence& inc, const AdmmState& state,
                       const RowMatrix& theta) {
    const RowMatrix d = theta - state.theta;
    const double quad = state.eta * d.squaredNorm() - inc.apply(d).squaredNorm();
    return augmented_lagrangian(p, inc, theta, state.omega, state.gamma, state.rho) + 0.5 * state.rho * quad;
}

double separable_surrogate(const ThetaProblem& p, const EdgeIncidence& inc, const AdmmState& state,
                           const RowMatrix& theta) {
    const double n = static_cast<double>(p.n());
    const double w = state.rho * state.eta;
    const RowMatrix shift = theta_shift(inc, state);
    double fit = 0.0;
    for (Eigen::Index i = 0; i < p.n(); ++i)
        fit += nll_spot(p.counts->col(i), *p.B, theta.row(i).transpose(), (*p.s)(i));
    return fit / n + 0.5 * w * (theta - state.theta - shift / w).squaredNorm();
}

AdmmResult solve_theta(const CompositionMatrix& theta0, const ThetaProblem& p, const AdmmConfig& cfg,
                       const AdmmState* warm) {
    check_admm_config(cfg);
    const EdgeIncidence inc(*p.graph);
    AdmmResult out;
    if (warm != nullptr) {
        if (warm->omega.rows() != inc.n_edges() || warm->omega.cols() != theta0.cols())
            throw std::invalid_argument("solve_theta: warm state does not match the graph");
        out.state = *warm;
        out.state.theta = theta0;
    } else {
        out.state = initial_admm_state(inc, theta0, cfg);
    }
    AdmmState& st = out.state;
    st.iteration = 0;

    CompositionMatrix best = st.theta;
    double best_value = std::numeric_limits<double>::infinity();

    for (int it = 1; it <= cfg.max_iters; ++it) {
        const RowMatrix theta_prev = st.theta;
        st.theta = theta_block_update(st, p, inc, cfg);
        const RowMatrix omega_prev = st.omega;
        st.omega = omega_update(inc, st.theta, st.gamma, st.rho, p.lambda, *p.graph);
        st.gamma += st.rho * (st.omega - inc.apply(st.theta));
        st.iteration = it;

        const Residuals r = residuals(inc, omega_prev, theta_prev, st, cfg.eps_abs, cfg.eps_rel);
        out.last = r;
        out.iterations = it;

        const double value = penalized_objective(p, st.theta);
        if (value < best_value) {
            best_value = value;
            best = st.theta;
        }
        if (cfg.trace != nullptr) {
            Eigen::Index fused = 0;
            for (Eigen::Index e = 0; e < st.omega.rows(); ++e)
                if ((st.omega.row(e).array() == 0.0).all()) ++fused;
            *cfg.trace << it << ',' << text::format_double(value) << ',' << text::format_double(r.primal) << ','
                       << text::format_double(r.dual) << ',' << text::format_double(st.rho) << ',' << fused
                       << '\n';
        }
        if (r.converged()) {
            out.converged = true;
            return out;
        }
        if (it > cfg.adapt_iters) continue;
        const double pr = r.eps_pri > 0.0 ? r.primal / r.eps_pri : 0.0;
        const double dr = r.eps_dual > 0.0 ? r.dual / r.eps_dual : 0.0;
        st.rho = std::clamp(adapt_rho(st.rho, pr, dr, cfg.tau, cfg.mu), cfg.rho_min, cfg.rho_max);
    }
    st.theta = best;
    return out;
}

}  // namespace duet
