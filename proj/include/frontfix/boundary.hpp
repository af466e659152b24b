// SPDX-License-Identifier: MIT
/**
 * @file boundary.hpp
 * @brief Optimal-exercise-boundary velocity from the staggered boundary
 *        scheme, plus the first and second time derivatives of s_f.
 *
 * Applying a staggered scheme to the square-root transform Q and substituting
 * the closed-form boundary derivatives (with beta = nu + g) turns the scheme
 * identity into a quadratic in the relative boundary velocity
 * g = (1/s_f) ds_f/dtau:
 *
 *   a2 g^2 + a1 g + a0 = 0,
 *   a2 = 2 h^3 v3 sqrt(rE) / (3 sigma^5),
 *   a1 = -2 h^2 v2 sqrt(rE) / (3 sigma^3) + 4 nu h^3 v3 sqrt(rE) / (3 sigma^5),
 *   a0 =  h v1 sqrt(rE)/sigma - 2 nu h^2 v2 sqrt(rE)/(3 sigma^3)
 *       + h^3 v3 (2 nu^2 sqrt(rE)/(3 sigma^5) + r sqrt(rE)/(2 sigma^3)) - M,
 *
 * where M is the weighted Q-sum over the scheme nodes. The physical root is
 * the minus branch.
 */

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "frontfix/market.hpp"
#include "frontfix/stencil.hpp"

namespace frontfix {

/// Raised when the velocity quadratic has no real root: the state is unusable
/// and the integrator must reject the step and shrink it.
class NegativeDiscriminantError : public std::runtime_error {
public:
    NegativeDiscriminantError() : std::runtime_error("velocity quadratic: negative discriminant") {}
};

/// Coefficients of a2 g^2 + a1 g + a0 = 0.
struct QuadraticCoeffs {
    double a2, a1, a0;
};

/// Q sampled at the scheme nodes gamma_m * h from the interior solution.
/// Offsets must be integer-valued so the samples land on grid nodes.
inline std::vector<double> sample_q(std::span<const double> u, double s_f,
                                    const BoundaryScheme& scheme, const GridSpec& grid,
                                    const MarketParams& p, long* clamp_count = nullptr) {
    std::vector<double> q(scheme.nodes.size());
    for (std::size_t m = 0; m < scheme.nodes.size(); ++m) {
        const int i = static_cast<int>(std::llround(scheme.nodes[m]));
        if (i < 1 || i > grid.n_x - 1)
            throw std::out_of_range("sample_q: scheme node beyond x_max");
        q[m] = q_transform(u[i - 1], i * grid.h(), s_f, p.strike, clamp_count);
    }
    return q;
}

/// Weighted Q-sum M = sum_m w_m Q(gamma_m h) (Q(0) = 0, so w0 contributes
/// nothing).
inline double weighted_q_sum(const BoundaryScheme& scheme, const std::vector<double>& q) {
    double m = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) m += scheme.w[i] * q[i];
    return m;
}

/// Build the velocity quadratic from the weighted Q-sum M.
inline QuadraticCoeffs velocity_quadratic(double m, const BoundaryScheme& scheme,
                                          const MarketParams& p, double h) {
    const double sr = p.sqrt_rE();
    const double nu = drift_nu(p);
    const double s = p.sigma;
    const double s3 = s * s * s;
    const double s5 = s3 * s * s;
    const double h2 = h * h, h3 = h2 * h;

    QuadraticCoeffs c{};
    c.a2 = 2.0 * h3 * scheme.v3 * sr / (3.0 * s5);
    c.a1 = -2.0 * h2 * scheme.v2 * sr / (3.0 * s3) + 4.0 * nu * h3 * scheme.v3 * sr / (3.0 * s5);
    c.a0 = h * scheme.v1 * sr / s - 2.0 * nu * h2 * scheme.v2 * sr / (3.0 * s3) +
           h3 * scheme.v3 * (2.0 * nu * nu * sr / (3.0 * s5) + p.rate * sr / (2.0 * s3)) - m;
    return c;
}

/// Minus-branch root of the velocity quadratic. A discriminant in
/// (-1e-12 a1^2, 0) is treated as a double root; anything more negative
/// raises NegativeDiscriminantError. Degrades to the linear root when a2 = 0
/// (schemes with v3 = 0).
inline double boundary_velocity(const QuadraticCoeffs& c) {
    if (c.a2 == 0.0) {
        if (c.a1 == 0.0) throw std::domain_error("boundary_velocity: degenerate coefficients");
        return -c.a0 / c.a1;
    }
    double disc = c.a1 * c.a1 - 4.0 * c.a2 * c.a0;
    if (disc < 0.0) {
        if (disc <= -1e-12 * c.a1 * c.a1) throw NegativeDiscriminantError();
        disc = 0.0;
    }
    const double sq = std::sqrt(disc);
    // cancellation-free form of (-a1 - sq) / (2 a2)
    if (c.a1 <= 0.0) return 2.0 * c.a0 / (-c.a1 + sq);
    return (-c.a1 - sq) / (2.0 * c.a2);
}

/// Right-hand side of the scheme identity evaluated at a candidate g; equals
/// M at a root. Used for residual diagnostics.
inline double velocity_rhs_at(double g, const BoundaryScheme& scheme, const MarketParams& p,
                              double h) {
    const BoundaryDerivatives d = q_boundary_derivatives(p, convection_beta(p, g));
    const double h2 = h * h, h3 = h2 * h;
    return h * scheme.v1 * d.q1 + h2 * scheme.v2 * d.q2 + h3 * scheme.v3 * d.q3;
}

// ===========================================================================
// Second time derivative of the boundary
// ===========================================================================

/// Fixed stagger for the s_f'' extraction: nodes (xbar, 2 xbar, 3 xbar,
/// 4 xbar) with xbar = 2h, i.e. grid nodes 2, 4, 6, 8, weights
/// (1024, -96, 1024/81, -1) annihilating Taylor orders 5..7.
struct SfSecondScheme {
    static constexpr int node_index[4] = {2, 4, 6, 8};
    static constexpr double weight[4] = {1024.0, -96.0, 1024.0 / 81.0, -1.0};
    // retained Taylor weights at unit stagger: v1 = 23380/27, v2 = 3320/9,
    // v3 = 800/9, v4 = 32/3
    static constexpr double v1 = 23380.0 / 27.0;
    static constexpr double v2 = 3320.0 / 9.0;
    static constexpr double v3 = 800.0 / 9.0;
    static constexpr double v4 = 32.0 / 3.0;
};

/// d^2 s_f / dtau^2 extracted from the solution state. Diagnostic output;
/// never feeds back into the stepping.
///
/// The scheme isolates Q_xxxx(0) from the weighted Q-sum; the second
/// derivative then follows from the PDE-consistency relation
///
///   Q_xxxx(0) = -(4/5) sqrt(rE)/(sigma^5 s_f)   * s_f''
///             +  (4/5) sqrt(rE)/(sigma^5 s_f^2) * (s_f')^2
///             -  (32/45) beta^3 sqrt(rE)/sigma^7
///             -  (14/15) beta r  sqrt(rE)/sigma^5,
///
/// obtained by differentiating the transformed pricing PDE three times in x
/// at the boundary (the same route that yields the closed-form Q', Q'', Q''').
inline double sf_second_derivative(std::span<const double> u, double s_f, double g,
                                   const MarketParams& p, const GridSpec& grid,
                                   long* clamp_count = nullptr) {
    const double h = grid.h();
    const double xb = 2.0 * h;
    double m4 = 0.0;
    for (int k = 0; k < 4; ++k) {
        const int i = SfSecondScheme::node_index[k];
        m4 += SfSecondScheme::weight[k] *
              q_transform(u[i - 1], i * h, s_f, p.strike, clamp_count);
    }

    const double beta = convection_beta(p, g);
    const BoundaryDerivatives d = q_boundary_derivatives(p, beta);
    const double xb2 = xb * xb, xb3 = xb2 * xb, xb4 = xb2 * xb2;
    const double q4_scaled = m4 - SfSecondScheme::v1 * xb * d.q1 -
                             SfSecondScheme::v2 * xb2 * d.q2 - SfSecondScheme::v3 * xb3 * d.q3;
    const double q4 = q4_scaled / (SfSecondScheme::v4 * xb4);  // = Q_xxxx(0)

    const double sr = p.sqrt_rE();
    const double s = p.sigma;
    const double s5 = s * s * s * s * s;
    const double s7 = s5 * s * s;
    const double sf_prime = g * s_f;
    const double rest = 0.8 * sr / (s5 * s_f * s_f) * sf_prime * sf_prime -
                        (32.0 / 45.0) * beta * beta * beta * sr / s7 -
                        (14.0 / 15.0) * beta * p.rate * sr / s5;
    return -1.25 * (s5 * s_f / sr) * (q4 - rest);
}

}  // namespace frontfix
