#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "duet/graph.hpp"
#include "duet/simplex.hpp"
#include "duet/types.hpp"

namespace duet {

/// The difference operator A: row e of A*Theta is theta_i - theta_j for edge (i, j).
class EdgeIncidence {
public:
    EdgeIncidence() = default;
    explicit EdgeIncidence(const FusionGraph& graph);
    EdgeIncidence(int n, std::vector<std::pair<int, int>> edges);

    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] Eigen::Index n_edges() const { return static_cast<Eigen::Index>(edges_.size()); }
    [[nodiscard]] const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    [[nodiscard]] RowMatrix apply(const RowMatrix& theta) const;
    [[nodiscard]] RowMatrix adjoint(const RowMatrix& m) const;
    [[nodiscard]] int max_degree() const;

private:
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;
};

/// Convenience wrapper around EdgeIncidence::apply.
inline RowMatrix incidence_apply(const EdgeIncidence& inc, const RowMatrix& theta) {
    return inc.apply(theta);
}

/// Largest eigenvalue of A'A (the unweighted graph Laplacian) by power
/// iteration, inflated by 1.01 and capped at the 2 * max-degree bound.
double eta_bound(const EdgeIncidence& inc);

struct AdmmState {
    RowMatrix theta;  // n x K, simplex rows
    RowMatrix omega;  // E x K
    RowMatrix gamma;  // E x K, unscaled multipliers
    double rho = 1.0;
    double eta = 1.0;
    int iteration = 0;
};

struct AdmmConfig {
    double rho_init = 1.0;
    double tau = 2.0;
    double mu = 10.0;
    double eps_abs = 1e-6;
    double eps_rel = 1e-4;
    int max_iters = 5000;
    double rho_min = 1e-6;
    double rho_max = 1e6;
    /// rho is held fixed after this many iterations.
    int adapt_iters = 200;
    PgdSettings pgd;
    /// When set, one CSV line per iteration: iter,objective,primal,dual,rho,n_fused_edges.
    std::ostream* trace = nullptr;
};

void check_admm_config(const AdmmConfig& cfg);

/// The fixed data of a Theta-block subproblem.
struct ThetaProblem {
    const Eigen::MatrixXd* counts = nullptr;  // G x n
    const Eigen::MatrixXd* B = nullptr;       // G x K
    const SizeFactors* s = nullptr;
    const FusionGraph* graph = nullptr;
    double lambda = 0.0;

    [[nodiscard]] Eigen::Index n() const { return counts->cols(); }
};

/// (1/n) sum_i nll_i + lambda * sum_e gamma_e ||theta_i - theta_j||.
double penalized_objective(const ThetaProblem& p, const CompositionMatrix& theta);

/// State with Omega = A*Theta, Gamma = 0 and eta from eta_bound.
AdmmState initial_admm_state(const EdgeIncidence& inc, const CompositionMatrix& theta0,
                             const AdmmConfig& cfg);

/// The vector A'(rho*Omega - rho*A*Theta + Gamma) that shifts each spot's prox centre.
RowMatrix theta_shift(const EdgeIncidence& inc, const AdmmState& state);

/// Minimises the separable quadratic majoriser of the augmented Lagrangian
/// around state.theta, one simplex-constrained problem per spot.
RowMatrix theta_block_update(const AdmmState& state, const ThetaProblem& p, const EdgeIncidence& inc,
                             const AdmmConfig& cfg);

/// Group soft-thresholding of A*Theta - Gamma/rho with thresholds lambda*gamma_e/rho.
RowMatrix omega_update(const EdgeIncidence& inc, const RowMatrix& theta, const RowMatrix& gamma,
                       double rho, double lambda, const FusionGraph& graph);

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
    double eps_pri = 0.0;
    double eps_dual = 0.0;

    [[nodiscard]] bool converged() const { return primal <= eps_pri && dual <= eps_dual; }
};

/// Primal ||A T - Omega||. The dual residual carries the linearisation term of
/// the Theta step: rho ||A'(Omega - Omega_prev) + (eta I - A'A)(T - T_prev)||.
Residuals residuals(const EdgeIncidence& inc, const RowMatrix& omega_prev, const RowMatrix& theta_prev,
                    const AdmmState& state, double eps_abs, double eps_rel);

/// Residual balancing: multiply rho by tau when the scaled primal residual
/// dominates by a factor mu, divide when the dual one does.
double adapt_rho(double rho, double primal_ratio, double dual_ratio, double tau, double mu);

/// Augmented Lagrangian over feasible Theta (the simplex indicator is omitted).
double augmented_lagrangian(const ThetaProblem& p, const EdgeIncidence& inc, const RowMatrix& theta,
                            const RowMatrix& omega, const RowMatrix& gamma, double rho);

/// Augmented Lagrangian plus (rho/2) tr[(T - T_r)'(eta I - A'A)(T - T_r)], anchored at state.theta.
double majorizer_value(const ThetaProblem& p, const EdgeIncidence& inc, const AdmmState& state,
                       const RowMatrix& theta);

/// The separable form sum_i M_i(theta_i); differs from majorizer_value by a constant.
double separable_surrogate(const ThetaProblem& p, const EdgeIncidence& inc, const AdmmState& state,
                           const RowMatrix& theta);

struct AdmmResult {
    AdmmState state;
    bool converged = false;
    int iterations = 0;
    Residuals last;
};

/// Proximal ADMM for the Theta block at fixed size factors. Starts from
/// `warm` when given (its rho/eta/Omega/Gamma are reused), otherwise from
/// initial_admm_state(theta0). Hitting max_iters is reported, not thrown;
/// the returned theta is then the lowest-objective iterate seen.
AdmmResult solve_theta(const CompositionMatrix& theta0, const ThetaProblem& p, const AdmmConfig& cfg,
                       const AdmmState* warm = nullptr);

}  // namespace duet
