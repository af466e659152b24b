// SPDX-License-Identifier: MIT
/**
 * @file market.hpp
 * @brief Market model, front-fixing transform and square-root boundary transform
 *        for the American put free-boundary problem.
 */

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace frontfix {

/// Contract parameters of the American put under Black-Scholes dynamics.
///
/// Validated on construction: E > 0, sigma > 0, T > 0, r >= 0. A zero rate is
/// representable (the binomial oracle accepts it) but the free-boundary solve
/// requires r > 0, which is enforced where sqrt(r*E) enters.
struct MarketParams {
    double strike;     ///< E, currency
    double rate;       ///< r, per year
    double sigma;      ///< volatility, per sqrt-year
    double maturity;   ///< T, years

    MarketParams(double strike_, double rate_, double sigma_, double maturity_)
        : strike(strike_), rate(rate_), sigma(sigma_), maturity(maturity_) {
        if (!(strike > 0.0)) throw std::invalid_argument("MarketParams: strike must be > 0");
        if (!(rate >= 0.0)) throw std::invalid_argument("MarketParams: rate must be >= 0");
        if (!(sigma > 0.0)) throw std::invalid_argument("MarketParams: sigma must be > 0");
        if (!(maturity > 0.0)) throw std::invalid_argument("MarketParams: maturity must be > 0");
    }

    /// sqrt(r*E); requires r > 0 (every boundary formula divides by it).
    double sqrt_rE() const {
        if (!(rate > 0.0))
            throw std::domain_error("free-boundary formulas require rate > 0");
        return std::sqrt(rate * strike);
    }
};

/// Named parameter sets used throughout the experiments:
/// "ex-a" (E=100, r=0.05, sigma=0.2, T=0.5), "ex-b" (E=100, r=0.1, sigma=0.3, T=1),
/// "ex-c" (E=100, r=0.08, sigma=0.2, T=3).
inline MarketParams preset(std::string_view name) {
    if (name == "ex-a") return {100.0, 0.05, 0.2, 0.5};
    if (name == "ex-b") return {100.0, 0.10, 0.3, 1.0};
    if (name == "ex-c") return {100.0, 0.08, 0.2, 3.0};
    throw std::invalid_argument("unknown preset: " + std::string(name));
}

/// Drift coefficient nu = r - sigma^2/2.
inline double drift_nu(const MarketParams& p) {
    return p.rate - 0.5 * p.sigma * p.sigma;
}

/// Convection coefficient beta = nu + g, where g = (1/s_f) ds_f/dtau is the
/// relative boundary velocity.
inline double convection_beta(const MarketParams& p, double g) {
    return drift_nu(p) + g;
}

/// Log-moneyness x = ln S - ln s_f. The continuation region is x >= 0.
inline double to_fixed_domain(double spot, double s_f) {
    if (!(spot > 0.0) || !(s_f > 0.0))
        throw std::domain_error("to_fixed_domain: spot and s_f must be > 0");
    return std::log(spot / s_f);
}

/// Square-root transform Q = sqrt(U - E + e^x s_f).
///
/// The radicand is clamped at zero: the early-exercise constraint
/// U >= E - e^x s_f can be violated by round-off near x = 0, and the
/// continuous limit of Q there is 0. `clamp_count`, when given, is
/// incremented on every clamp (diagnostic only).
inline double q_transform(double u, double x, double s_f, double strike,
                          long* clamp_count = nullptr) {
    const double radicand = u - strike + std::exp(x) * s_f;
    if (radicand < 0.0) {
        if (clamp_count) ++*clamp_count;
        return 0.0;
    }
    return std::sqrt(radicand);
}

/// Q and its first three spatial derivatives at the fixed boundary x = 0.
struct BoundaryDerivatives {
    double q0;  ///< Q(0), always 0
    double q1;  ///< Q_x(0)   = sqrt(rE)/sigma
    double q2;  ///< Q_xx(0)  = -2 beta sqrt(rE) / (3 sigma^3)
    double q3;  ///< Q_xxx(0) = 2 beta^2 sqrt(rE)/(3 sigma^5) + r sqrt(rE)/(2 sigma^3)
};

/// Closed-form boundary derivatives of the square-root transform for a given
/// convection coefficient beta. Requires r > 0.
inline BoundaryDerivatives q_boundary_derivatives(const MarketParams& p, double beta) {
    const double sr = p.sqrt_rE();
    const double s = p.sigma;
    const double s3 = s * s * s;
    const double s5 = s3 * s * s;
    return {0.0,
            sr / s,
            -2.0 * beta * sr / (3.0 * s3),
            2.0 * beta * beta * sr / (3.0 * s5) + p.rate * sr / (2.0 * s3)};
}

}  // namespace frontfix
