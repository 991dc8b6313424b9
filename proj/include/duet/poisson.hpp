#pragma once

#include "duet/simplex.hpp"
#include "duet/types.hpp"

namespace duet {

// Poisson negative log-likelihood with identity link, dropping log(x!):
//   sum_g  s * b_g'theta - x_g * log(s * b_g'theta),   with 0*log(0) := 0.

/// Throws std::domain_error when a gene with positive count has mean <= 0.
double nll_spot(const Eigen::Ref<const Vector>& x, const Eigen::MatrixXd& B,
                const Eigen::Ref<const Vector>& theta, double s);

Vector grad_theta_nll(const Eigen::Ref<const Vector>& x, const Eigen::MatrixXd& B,
                      const Eigen::Ref<const Vector>& theta, double s);

/// argmin_s nll_spot = sum(x) / sum_g b_g'theta.
double update_size_factor(const Eigen::Ref<const Vector>& x, const Eigen::MatrixXd& B,
                          const Eigen::Ref<const Vector>& theta);

/// Total of nll_spot over every spot.
double total_nll(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B,
                 const CompositionMatrix& theta, const SizeFactors& s);

struct SpotwiseSettings {
    int max_rounds = 100;
    double tol = 1e-8;  // relative objective change between alternations
    PgdSettings pgd;
};

struct SpotwiseFit {
    CompositionMatrix theta;
    SizeFactors s;
};

/// Per-spot maximum likelihood (no spatial penalty): alternates the closed-form
/// size factor with a simplex-constrained solve for theta, starting at 1/K.
SpotwiseFit spotwise_deconvolve(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B,
                                const SpotwiseSettings& cfg = {});

/// Simplex MLE of theta for one spot at fixed s.
PgdResult solve_theta_fixed_s(const Eigen::Ref<const Vector>& x, const Eigen::MatrixXd& B,
                              double s, const Vector& theta0, const PgdSettings& cfg);

}  // namespace duet
