// SPDX-License-Identifier: MIT
/**
 * @file stencil.hpp
 * @brief Generation and certification of every finite-difference stencil the
 *        solver uses: one-sided near-boundary rows for the compact operator
 *        and the dynamic staggered boundary schemes with their truncation
 *        constants.
 *
 * A staggered boundary scheme combines samples f(gamma_m h) at freely chosen
 * node offsets gamma_1 < ... < gamma_5 into
 *
 *     w0 f(0) + sum_m w_m f(gamma_m h)
 *         = v1 h f'(0) + v2 h^2 f''(0) + v3 h^3 f'''(0) + R,
 *
 * where the weights annihilate a chosen set of Taylor orders (the kill set).
 * Weights are produced by solving the moment conditions directly rather than
 * by the closed-form elimination cascades; the moment conditions are
 * unambiguous and the linear systems are tiny.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace frontfix {

// ===========================================================================
// Grid
// ===========================================================================

/// Uniform grid x_i = i*h on [0, x_max] with h = x_max/n_x. h is derived,
/// never stored, so h*n_x == x_max holds exactly.
struct GridSpec {
    double x_max;
    int n_x;

    GridSpec(double x_max_, int n_x_) : x_max(x_max_), n_x(n_x_) {
        if (!(x_max > 0.0)) throw std::invalid_argument("GridSpec: x_max must be > 0");
        if (n_x < 12)
            throw std::invalid_argument(
                "GridSpec: n_x >= 12 required (near-boundary rows span 6 nodes each side)");
    }

    double h() const { return x_max / n_x; }
    int interior_count() const { return n_x - 1; }
};

// ===========================================================================
// Staggered node distributions
// ===========================================================================

/// Ordered offsets gamma_1 < ... < gamma_5 (in units of h) of the staggered
/// boundary scheme. Four-entry distributions (the CS-54 family) are completed
/// with an auxiliary fifth node gamma_5 = gamma_4 + (gamma_4 - gamma_3); its
/// weight cancels when the two underlying five-node schemes are subtracted.
class NodeDistribution {
public:
    static NodeDistribution from(std::vector<double> gammas) {
        const bool completed = gammas.size() == 4;
        if (completed) gammas.push_back(gammas[3] + (gammas[3] - gammas[2]));
        if (gammas.size() != 5)
            throw std::invalid_argument("NodeDistribution: need 4 or 5 offsets");
        if (!(gammas.front() >= 2.0))
            throw std::invalid_argument("NodeDistribution: gamma_1 >= 2 required");
        for (std::size_t m = 1; m < gammas.size(); ++m)
            if (!(gammas[m] > gammas[m - 1]))
                throw std::invalid_argument("NodeDistribution: offsets must strictly increase");
        NodeDistribution d;
        std::copy(gammas.begin(), gammas.end(), d.gamma_.begin());
        d.completed_ = completed;
        return d;
    }

    const std::array<double, 5>& offsets() const { return gamma_; }
    double max_offset() const { return gamma_.back(); }
    /// True when the distribution was given with 4 entries and auto-completed.
    bool auto_completed() const { return completed_; }

    /// All scheme nodes must land on grid points inside the domain.
    void check_on_grid(const GridSpec& grid) const {
        for (double g : gamma_) {
            if (std::abs(g - std::round(g)) > 1e-12)
                throw std::invalid_argument("NodeDistribution: offsets must be integers");
            if (std::round(g) > grid.n_x - 1)
                throw std::invalid_argument("NodeDistribution: offset beyond x_max");
        }
    }

private:
    NodeDistribution() = default;
    std::array<double, 5> gamma_{};
    bool completed_ = false;
};

// ===========================================================================
// Boundary schemes from moment conditions
// ===========================================================================

/// A staggered left-boundary stencil: signed node weights, the derivative
/// weights it retains, and its truncation constant.
struct BoundaryScheme {
    std::vector<double> nodes;     ///< offsets in units of h
    std::vector<double> w;         ///< signed weights of f(node*h)
    double w0 = 0.0;               ///< weight of f(0), equals -sum(w)
    double v1 = 0.0;               ///< weight of h   f'(0)
    double v2 = 0.0;               ///< weight of h^2 f''(0)
    double v3 = 0.0;               ///< weight of h^3 f'''(0)
    double c = 0.0;                ///< truncation constant sum w nodes^8 / 8!
    std::vector<int> kill_set;     ///< annihilated Taylor orders

    /// sum_m w_m f(nodes_m * h) + w0 f(0) for samples f given at the nodes.
    double apply(const std::vector<double>& f_at_nodes, double f_at_zero) const {
        double acc = w0 * f_at_zero;
        for (std::size_t m = 0; m < w.size(); ++m) acc += w[m] * f_at_nodes[m];
        return acc;
    }
};

namespace detail {

inline long double ld_pow(long double base, int p) {
    long double r = 1.0L;
    for (int i = 0; i < p; ++i) r *= base;
    return r;
}

/// Dense Gaussian elimination with full pivoting in long double.
/// Throws on a numerically singular system.
inline void full_pivot_solve(std::vector<long double>& a, std::vector<long double>& b,
                             std::vector<long double>& x) {
    const std::size_t n = b.size();
    std::vector<std::size_t> col(n);
    for (std::size_t j = 0; j < n; ++j) col[j] = j;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pr = k, pc = k;
        long double best = 0.0L;
        for (std::size_t i = k; i < n; ++i)
            for (std::size_t j = k; j < n; ++j)
                if (std::abs(a[i * n + j]) > best) {
                    best = std::abs(a[i * n + j]);
                    pr = i;
                    pc = j;
                }
        if (best == 0.0L) throw std::runtime_error("moment system is singular");
        if (pr != k)
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[pr * n + j]);
        if (pr != k) std::swap(b[k], b[pr]);
        if (pc != k) {
            for (std::size_t i = 0; i < n; ++i) std::swap(a[i * n + k], a[i * n + pc]);
            std::swap(col[k], col[pc]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const long double m = a[i * n + k] / a[k * n + k];
            a[i * n + k] = 0.0L;
            for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= m * a[k * n + j];
            b[i] -= m * b[k];
        }
    }
    std::vector<long double> y(n);
    for (std::size_t ii = n; ii-- > 0;) {
        long double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a[ii * n + j] * y[j];
        y[ii] = s / a[ii * n + ii];
    }
    x.assign(n, 0.0L);
    for (std::size_t j = 0; j < n; ++j) x[col[j]] = y[j];
}

inline double factorial(int k) {
    double r = 1.0;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

}  // namespace detail

/// Solve the moment conditions sum_m w_m nodes_m^p = 0 for every p in
/// `kill_set`, with the farthest-node weight pinned to +1 for an odd node
/// count and -1 for an even one (the alternating-sign convention). Requires
/// |nodes| == |kill_set| + 1. Every residual is checked to 1e-10 relative.
inline BoundaryScheme solve_moment_weights(const std::vector<double>& nodes,
                                           const std::vector<int>& kill_set) {
    const std::size_t n = nodes.size();
    if (n < 2) throw std::invalid_argument("solve_moment_weights: need at least 2 nodes");
    if (kill_set.size() != n - 1)
        throw std::invalid_argument("solve_moment_weights: |nodes| must equal |kill_set| + 1");
    for (std::size_t m = 0; m < n; ++m) {
        if (!(nodes[m] > 0.0))
            throw std::invalid_argument("solve_moment_weights: nodes must be positive");
        for (std::size_t l = m + 1; l < n; ++l)
            if (nodes[m] == nodes[l])
                throw std::invalid_argument("solve_moment_weights: nodes must be distinct");
    }

    const double w_last = (n % 2 == 1) ? 1.0 : -1.0;
    const std::size_t k = n - 1;
    std::vector<long double> a(k * k), b(k), x;
    for (std::size_t row = 0; row < k; ++row) {
        const int p = kill_set[row];
        for (std::size_t m = 0; m < k; ++m)
            a[row * k + m] = detail::ld_pow(static_cast<long double>(nodes[m]), p);
        b[row] = -static_cast<long double>(w_last) *
                 detail::ld_pow(static_cast<long double>(nodes[k]), p);
    }
    detail::full_pivot_solve(a, b, x);

    BoundaryScheme s;
    s.nodes = nodes;
    s.kill_set = kill_set;
    s.w.resize(n);
    for (std::size_t m = 0; m < k; ++m) s.w[m] = static_cast<double>(x[m]);
    s.w[k] = w_last;

    long double sum = 0.0L, m1 = 0.0L, m2 = 0.0L, m3 = 0.0L, m8 = 0.0L;
    for (std::size_t m = 0; m < n; ++m) {
        const long double wm = s.w[m], g = nodes[m];
        sum += wm;
        m1 += wm * g;
        m2 += wm * g * g;
        m3 += wm * g * g * g;
        m8 += wm * detail::ld_pow(g, 8);
    }
    s.w0 = static_cast<double>(-sum);
    s.v1 = static_cast<double>(m1);
    s.v2 = static_cast<double>(m2 / 2.0L);
    s.v3 = static_cast<double>(m3 / 6.0L);
    s.c = static_cast<double>(m8 / 40320.0L);
    for (int p : kill_set) {  // killed orders are zero by construction
        if (p == 1) s.v1 = 0.0;
        if (p == 2) s.v2 = 0.0;
        if (p == 3) s.v3 = 0.0;
    }

    for (int p : kill_set) {
        long double mom = 0.0L, scale = 0.0L;
        for (std::size_t m = 0; m < n; ++m) {
            const long double t = s.w[m] * detail::ld_pow(static_cast<long double>(nodes[m]), p);
            mom += t;
            scale = std::max(scale, std::abs(t));
        }
        if (std::abs(mom) > 1e-10L * scale)
            throw std::runtime_error("solve_moment_weights: moment residual exceeds 1e-10");
    }
    return s;
}

/// Five-node scheme retaining f', f'', f''' (kill set {4,5,6,7}); the scheme
/// the CS-55 family extracts the boundary velocity with. Undivided truncation
/// error c * h^8 * f^(8)(0).
inline BoundaryScheme scheme_a(const NodeDistribution& d) {
    return solve_moment_weights({d.offsets().begin(), d.offsets().end()}, {4, 5, 6, 7});
}

/// Companion five-node scheme retaining only f' and f'' (kill set {3,4,5,6});
/// v3 = 0 by construction. Shares the farthest-node normalization with
/// scheme_a so their difference cancels that node.
inline BoundaryScheme scheme_b(const NodeDistribution& d) {
    return solve_moment_weights({d.offsets().begin(), d.offsets().end()}, {3, 4, 5, 6});
}

/// Effective four-node scheme: scheme_a minus scheme_b. The gamma_5 weight
/// cancels (checked to 1e-9), leaving a stencil on gamma_1..gamma_4 that still
/// retains f''' with scheme_a's v3. This drives the CS-54 family.
inline BoundaryScheme scheme_c(const NodeDistribution& d) {
    const BoundaryScheme a = scheme_a(d);
    const BoundaryScheme b = scheme_b(d);
    BoundaryScheme s;
    s.nodes = a.nodes;
    s.w.resize(a.w.size());
    for (std::size_t m = 0; m < a.w.size(); ++m) s.w[m] = a.w[m] - b.w[m];
    if (std::abs(s.w.back()) > 1e-9)
        throw std::runtime_error("scheme_c: farthest-node weight failed to cancel");
    s.w0 = a.w0 - b.w0;
    s.v1 = a.v1 - b.v1;
    s.v2 = a.v2 - b.v2;
    s.v3 = a.v3;  // scheme_b kills order 3
    s.c = a.c - b.c;
    s.kill_set = {4, 5, 6};
    return s;
}

/// Scheme selected by the method family: CS-55 uses the five-node scheme_a,
/// CS-54 the subtracted four-node scheme_c.
inline BoundaryScheme velocity_scheme(const NodeDistribution& d) {
    return d.auto_completed() ? scheme_c(d) : scheme_a(d);
}

// ===========================================================================
// Near-boundary compact rows
// ===========================================================================

enum class NearBoundaryOrder { fourth, fifth, sixth };

/// One-sided replacement row for the node adjacent to a Dirichlet boundary:
/// sum_k lhs_k f''(x_k) = 12/h^2 (f_0 - 2 f_1 + f_2). Avoids f'' at the
/// boundary node itself. Coefficients sum to 12 (balance on f = x^2).
struct NearBoundaryRow {
    NearBoundaryOrder order;
    std::vector<double> lhs;  ///< coefficients of f'' at nodes 1..k

    double lhs_sum() const {
        double s = 0.0;
        for (double v : lhs) s += v;
        return s;
    }
};

inline NearBoundaryRow near_boundary_row(NearBoundaryOrder order) {
    switch (order) {
        case NearBoundaryOrder::fourth:
            return {order, {14.0, -5.0, 4.0, -1.0}};
        case NearBoundaryOrder::fifth:
            return {order, {897.0 / 60, -528.0 / 60, 582.0 / 60, -288.0 / 60, 57.0 / 60}};
        case NearBoundaryOrder::sixth:
            return {order, {1902.0 / 120, -1596.0 / 120, 2244.0 / 120, -1656.0 / 120,
                            654.0 / 120, -108.0 / 120}};
    }
    throw std::logic_error("near_boundary_row: bad order");
}

// ===========================================================================
// Certification
// ===========================================================================

/// Per-degree residual of a scheme applied to monomials at h = 1.
struct CertifyReport {
    std::vector<double> residual;           ///< |scheme(x^d) - retained terms|, d = 0..degree
    std::vector<double> relative_residual;  ///< residual scaled by the moment magnitude
};

/// Evaluate `s` on x^0..x^degree at h = 1 and report how far each degree is
/// from the retained v1/v2/v3 combination. Degrees in the kill set (and 0)
/// must come out at round-off level; degree 8 reproduces 8! * c.
inline CertifyReport certify_scheme(const BoundaryScheme& s, int degree) {
    if (degree > 10) throw std::invalid_argument("certify_scheme: degree <= 10");
    CertifyReport rep;
    for (int d = 0; d <= degree; ++d) {
        long double applied = (d == 0) ? static_cast<long double>(s.w0) : 0.0L;
        long double scale = std::abs(static_cast<long double>(s.w0));
        for (std::size_t m = 0; m < s.w.size(); ++m) {
            const long double t = s.w[m] * detail::ld_pow(static_cast<long double>(s.nodes[m]), d);
            applied += t;
            scale = std::max(scale, std::abs(t));
        }
        long double retained = 0.0L;
        if (d == 1) retained = s.v1;
        if (d == 2) retained = 2.0L * s.v2;
        if (d == 3) retained = 6.0L * s.v3;
        const long double r = std::abs(applied - retained);
        rep.residual.push_back(static_cast<double>(r));
        rep.relative_residual.push_back(static_cast<double>(scale > 0.0L ? r / scale : r));
    }
    return rep;
}

}  // namespace frontfix
