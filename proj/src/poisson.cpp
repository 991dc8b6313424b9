#include "duet/poisson.hpp"

#include <cmath>
#include <stdexcept>

#include "duet/parallel.hpp"

namespace duet {

double nll_spot(const Eigen::Ref<const Vector>& x, const Eigen::MatrixXd& B,
                const Eigen::Ref<const Vector>& theta, double s) {
    const Vector rate = B * theta;
    double total = 0.0;
    for (Eigen::Index g = 0; g < x.size(); ++g) {
        const double mu = s * rate(g);
        if (x(g) > 0.0) {
            if (!(mu > 0.0)) throw std::domain_error("nll_spot: nonpositive mean at a positive count");
            total += mu - x(g) * std::log(mu);
        } else {
            total += mu;
        }
    }
    return total;
}

Vector grad_theta_nll(const Eigen::Ref<const Vector>& x, const Eigen::MatrixXd& B,
                      const Eigen::Ref<const Vector>& theta, double s) {
    const Vector rate = B * theta;
    Vector w(x.size());
    for (Eigen::Index g = 0; g < x.size(); ++g) {
        if (x(g) > 0.0) {
            if (!(s * rate(g) > 0.0))
                throw std::domain_error("grad_theta_nll: nonpositive mean at a positive count");
            w(g) = s - x(g) / rate(g);
        } else {
            w(g) = s;
        }
    }
    return B.transpose() * w;
}

double update_size_factor(const Eigen::Ref<const Vector>& x, const Eigen::MatrixXd& B,
                          const Eigen::Ref<const Vector>& theta) {
    const double denom = (B * theta).sum();
    if (!(denom > 0.0)) throw std::domain_error("update_size_factor: zero expected rate");
    return x.sum() / denom;
}

double total_nll(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B,
                 const CompositionMatrix& theta, const SizeFactors& s) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < counts.cols(); ++i)
        total += nll_spot(counts.col(i), B, theta.row(i).transpose(), s(i));
    return total;
}

namespace {

// Trace of the Hessian of nll_spot in theta; 1/trace is a safe first step.
double hessian_trace(const Eigen::Ref<const Vector>& x, const Eigen::MatrixXd& B,
                     const Vector& theta) {
    const Vector rate = B * theta;
    double tr = 0.0;
    for (Eigen::Index g = 0; g < x.size(); ++g)
        if (x(g) > 0.0) tr += x(g) * B.row(g).squaredNorm() / (rate(g) * rate(g));
    return tr;
}

}  // namespace

PgdResult solve_theta_fixed_s(const Eigen::Ref<const Vector>& x, const Eigen::MatrixXd& B,
                              double s, const Vector& theta0, const PgdSettings& cfg) {
    PgdSettings local = cfg;
    if (const double tr = hessian_trace(x, B, theta0); tr > 0.0) local.init_step = 1.0 / tr;
    auto f = [&](const Vector& t) {
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
        return total;
    };
    auto grad = [&](const Vector& t) { return grad_theta_nll(x, B, t, s); };
    return pgd_minimize_simplex(f, grad, theta0, local);
}

SpotwiseFit spotwise_deconvolve(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& B,
                                const SpotwiseSettings& cfg) {
    if (counts.rows() != B.rows())
        throw std::invalid_argument("spotwise_deconvolve: gene dimension mismatch");
    const auto n = counts.cols();
    const auto k = B.cols();
    SpotwiseFit out;
    out.theta.resize(n, k);
    out.s.resize(n);

    parallel_for(n, [&](Eigen::Index i) {
        const auto x = counts.col(i);
        Vector theta = Vector::Constant(k, 1.0 / static_cast<double>(k));
        double s = update_size_factor(x, B, theta);
        double prev = nll_spot(x, B, theta, s);
        for (int round = 0; round < cfg.max_rounds; ++round) {
            theta = solve_theta_fixed_s(x, B, s, theta, cfg.pgd).x;
            s = update_size_factor(x, B, theta);
            const double cur = nll_spot(x, B, theta, s);
            const double rel = std::abs(prev - cur) / std::max(std::abs(prev), 1e-300);
            prev = cur;
            if (rel < cfg.tol) break;
        }
        out.theta.row(i) = theta.transpose();
        out.s(i) = s;
    });
    return out;
}

}  // namespace duet
