#pragma once

#include <cmath>

#include "errors.hpp"
#include "mathfns.hpp"

namespace cbo {

enum class LossKind { gaussian, tobit };

struct LossGrad {
    double d_mu = 0.0;
    double d_sigma2 = 0.0;
};

inline void check_loss_args(double y, double mu, double sigma2) {
    if (!std::isfinite(y) || !std::isfinite(mu) || !std::isfinite(sigma2) || !(sigma2 > 0.0))
        throw ArgumentError("loss: requires finite y, mu and sigma2 > 0");
}

// Exact negative log density of N(mu, sigma2) at y.
inline double gaussian_nll(double y, double mu, double sigma2) {
    check_loss_args(y, mu, sigma2);
    const double e = y - mu;
    return kHalfLog2Pi + 0.5 * std::log(sigma2) + e * e / (2.0 * sigma2);
}

inline LossGrad gaussian_grad(double y, double mu, double sigma2) {
    check_loss_args(y, mu, sigma2);
    const double e = y - mu;
    return {-e / sigma2, 0.5 / sigma2 - e * e / (2.0 * sigma2 * sigma2)};
}

// Censored rows contribute -log P(Y >= y), the probability that the response
// survived past the observed bound; uncensored rows contribute the exact
// density term.  Strictly decreasing in mu for censored rows.
inline double tobit_nll(double y, double mu, double sigma2, bool censored) {
    if (!censored) return gaussian_nll(y, mu, sigma2);
    check_loss_args(y, mu, sigma2);
    const double z = (y - mu) / std::sqrt(sigma2);
    return -std_normal_log_survival(z);
}

// Analytic partials in (mu, sigma2).  Signs are locked by the central
// finite-difference property test over tobit_nll.
inline LossGrad tobit_grad(double y, double mu, double sigma2, bool censored) {
    if (!censored) return gaussian_grad(y, mu, sigma2);
    check_loss_args(y, mu, sigma2);
    const double sigma = std::sqrt(sigma2);
    const double z = (y - mu) / sigma;
    const double h = std_normal_hazard(z);
    return {-h / sigma, -h * z / (2.0 * sigma2)};
}

}  // namespace cbo
