// SPDX-License-Identifier: MIT
/// @file binomial.hpp
/// @brief Cox-Ross-Rubinstein binomial tree, the independent pricing oracle.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "frontfix/market.hpp"

namespace frontfix {

struct BinomialConfig {
    int steps = 15000;
};

/// American put price by CRR backward induction with the early-exercise
/// maximum at every node. u = e^{sigma sqrt(dt)}, d = 1/u,
/// q = (e^{r dt} - d)/(u - d). O(N^2) time, O(N) space.
inline double crr_american_put(const MarketParams& p, double spot, const BinomialConfig& cfg) {
    if (!(spot > 0.0)) throw std::invalid_argument("crr_american_put: spot must be > 0");
    if (cfg.steps < 1) throw std::invalid_argument("crr_american_put: steps must be >= 1");
    const int n = cfg.steps;
    const double dt = p.maturity / n;
    const double up = std::exp(p.sigma * std::sqrt(dt));
    const double down = 1.0 / up;
    const double growth = std::exp(p.rate * dt);
    const double q = (growth - down) / (up - down);
    if (!(q > 0.0) || !(q < 1.0))
        throw std::domain_error("crr_american_put: risk-neutral probability outside (0,1)");
    const double disc_q = q / growth;
    const double disc_1q = (1.0 - q) / growth;

    // spot ladder: spots[m] = S0 * up^(m - n), m = 0..2n
    std::vector<double> spots(2 * n + 1);
    for (int m = 0; m <= 2 * n; ++m) spots[m] = spot * std::pow(up, m - n);

    std::vector<double> value(n + 1);
    for (int j = 0; j <= n; ++j) value[j] = std::max(p.strike - spots[2 * j], 0.0);
    for (int i = n - 1; i >= 0; --i) {
        for (int j = 0; j <= i; ++j) {
            const double cont = disc_q * value[j + 1] + disc_1q * value[j];
            const double exercise = p.strike - spots[n - i + 2 * j];
            value[j] = std::max(cont, exercise);
        }
    }
    return value[0];
}

}  // namespace frontfix
