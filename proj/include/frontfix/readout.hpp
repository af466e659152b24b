// SPDX-License-Identifier: MIT
/// @file readout.hpp
/// @brief Price and delta readout at arbitrary spots from a terminal solution
///        by degree-6 Lagrange interpolation on the fixed-domain grid.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "frontfix/integrator.hpp"
#include "frontfix/market.hpp"
#include "frontfix/stencil.hpp"

namespace frontfix {

struct PriceReadout {
    double price;
    double delta;
};

namespace detail {

/// Degree-6 Lagrange interpolation of grid samples at x; the 7-node stencil
/// is shifted inward near the domain ends so all nodes stay in range.
/// `full` holds values at grid nodes 0..n_x.
inline double lagrange7(std::span<const double> full, const GridSpec& grid, double x) {
    const double h = grid.h();
    int i0 = static_cast<int>(std::lround(x / h)) - 3;
    i0 = std::clamp(i0, 0, grid.n_x - 6);
    double acc = 0.0;
    for (int j = 0; j < 7; ++j) {
        double lj = 1.0;
        const double xj = (i0 + j) * h;
        for (int m = 0; m < 7; ++m) {
            if (m == j) continue;
            const double xm = (i0 + m) * h;
            lj *= (x - xm) / (xj - xm);
        }
        acc += lj * full[i0 + j];
    }
    return acc;
}

}  // namespace detail

/// Values on the full grid 0..n_x including the known boundary nodes.
inline std::vector<double> with_boundaries(std::span<const double> interior, double left,
                                           double right, const GridSpec& grid) {
    std::vector<double> full(grid.n_x + 1);
    full.front() = left;
    std::copy(interior.begin(), interior.end(), full.begin() + 1);
    full.back() = right;
    return full;
}

/// Price and delta at spot S. Inside the exercise region (S <= s_f) the
/// payoff is intrinsic and delta is -1; beyond the truncation boundary the
/// option is worthless at table precision.
inline PriceReadout price_at(const Solution& sol, const GridSpec& grid, const MarketParams& p,
                             double spot) {
    const double s_f = sol.state.s_f;
    const double x = to_fixed_domain(spot, s_f);
    if (x <= 0.0) return {p.strike - spot, -1.0};
    if (x >= grid.x_max) return {0.0, 0.0};
    const std::vector<double> u_full = with_boundaries(sol.state.u, p.strike - s_f, 0.0, grid);
    const std::vector<double> w_full = with_boundaries(sol.state.w, -s_f, 0.0, grid);
    return {detail::lagrange7(u_full, grid, x), detail::lagrange7(w_full, grid, x) / spot};
}

}  // namespace frontfix
