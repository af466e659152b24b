// SPDX-License-Identifier: MIT
/**
 * @file integrator.hpp
 * @brief Time integration of the coupled semi-discrete system (u, w, s_f):
 *        four-stage 3(2) Bogacki-Shampine embedded pair with adaptive step
 *        control, or fixed-step SSPRK3 for convergence studies.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "frontfix/boundary.hpp"
#include "frontfix/compact.hpp"
#include "frontfix/market.hpp"
#include "frontfix/stencil.hpp"

namespace frontfix {

// ===========================================================================
// State and configuration
// ===========================================================================

/// Semi-discrete state: option values u and delta sensitivities w on the
/// interior nodes, boundary s_f, and time-to-maturity tau.
struct SolverState {
    std::vector<double> u;
    std::vector<double> w;
    double s_f = 0.0;
    double tau = 0.0;
};

/// Adaptive step controller configuration. The new step after an attempt with
/// error E* = max(e_u, e_w, e_sf) is
///   accepted (E* < eps):  k_new = rho * k * (eps/E*)^(1/2)
///   rejected (E* >= eps): k_new = rho * k * (eps/E*)^(1/3)
/// clamped to [k_min, k_max]. `swap_exponents` flips the two exponents for
/// comparison runs.
struct StepControl {
    double eps = 1e-4;
    double rho = 0.9;
    double k_init = 1e-3;
    double k_min = 1e-12;
    double k_max = 0.0;  ///< 0 selects T/10
    int max_rejects = 50;
    bool swap_exponents = false;
};

enum class TimeMethod { bs32, ssprk3 };

struct StepStats {
    double k_min = 0.0, k_avg = 0.0, k_max = 0.0;
    long accepted = 0, rejected = 0;
};

/// One accepted time level: step taken, boundary and its derivatives.
struct TrajectoryPoint {
    double tau, k, s_f, sf_prime, sf_second;
};

struct Solution {
    SolverState state;
    double g = 0.0;          ///< relative boundary velocity at tau = T
    double sf_prime = 0.0;   ///< ds_f/dtau at T
    double sf_second = 0.0;  ///< d^2 s_f/dtau^2 at T
    std::vector<TrajectoryPoint> trajectory;
    StepStats stats;
    long clamp_count = 0;        ///< square-root radicand clamps (diagnostic)
    double max_g_residual = 0.0; ///< worst scheme-identity residual of g at accepted levels
    double max_error_ratio = 0.0;///< worst accepted E*/eps (adaptive runs)
};

// ===========================================================================
// Semi-discrete right-hand side
// ===========================================================================

/// Everything fixed across one solve: market, grid, operators, scheme.
class SemiDiscreteSystem {
public:
    SemiDiscreteSystem(const MarketParams& p, const GridSpec& grid,
                       const NodeDistribution& dist, CompactVariant variant = CompactVariant::b5)
        : p_(p), grid_(grid), scheme_(velocity_scheme(dist)), compact_(grid, variant),
          nu_(drift_nu(p)) {
        p.sqrt_rE();  // free-boundary solve requires r > 0
        dist.check_on_grid(grid);
        if (grid.n_x - 1 < 8)
            throw std::invalid_argument("grid too small for the s_f'' stagger");
    }

    const MarketParams& params() const { return p_; }
    const GridSpec& grid() const { return grid_; }
    const BoundaryScheme& scheme() const { return scheme_; }
    const CompactSystem& compact() const { return compact_; }

    /// Relative boundary velocity from the current state. May throw
    /// NegativeDiscriminantError.
    double velocity(std::span<const double> u, double s_f, long* clamp_count = nullptr) const {
        const std::vector<double> q = sample_q(u, s_f, scheme_, grid_, p_, clamp_count);
        const double m = weighted_q_sum(scheme_, q);
        return boundary_velocity(velocity_quadratic(m, scheme_, p_, grid_.h()));
    }

    /// Relative residual of the scheme identity at a candidate g.
    double velocity_residual(std::span<const double> u, double s_f, double g) const {
        const std::vector<double> q = sample_q(u, s_f, scheme_, grid_, p_);
        const double m = weighted_q_sum(scheme_, q);
        const double rhs = velocity_rhs_at(g, scheme_, p_, grid_.h());
        return std::abs(rhs - m) / (std::abs(m) + 1e-300);
    }

    struct Rhs {
        std::vector<double> u, w;
        double s_f = 0.0;
        double g = 0.0;
    };

    /// Per-solve scratch buffers; the system itself stays immutable, so one
    /// shared instance can serve concurrent solves that each own a scratch.
    struct RhsScratch {
        std::vector<double> du, dw;
    };

    /// L_u = (sigma^2/2) D u + beta w - r u,
    /// L_w = (sigma^2/2) D w + beta D u - r w,
    /// L_sf = g s_f, with boundary values u_0 = E - s_f, w_0 = -s_f recomputed
    /// from the stage's own s_f.
    void eval(const SolverState& s, Rhs& out, RhsScratch& scratch,
              long* clamp_count = nullptr) const {
        const double g = velocity(s.u, s.s_f, clamp_count);
        const double beta = nu_ + g;
        const double half_sig2 = 0.5 * p_.sigma * p_.sigma;

        compact_.second_derivative_into(s.u, {p_.strike - s.s_f, 0.0}, scratch.du);
        compact_.second_derivative_into(s.w, {-s.s_f, 0.0}, scratch.dw);

        const std::size_t n = s.u.size();
        out.u.resize(n);
        out.w.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            out.u[i] = half_sig2 * scratch.du[i] + beta * s.w[i] - p_.rate * s.u[i];
            out.w[i] = half_sig2 * scratch.dw[i] + beta * scratch.du[i] - p_.rate * s.w[i];
        }
        out.s_f = g * s.s_f;
        out.g = g;
    }

    /// Convenience wrapper with its own scratch.
    void eval(const SolverState& s, Rhs& out, long* clamp_count = nullptr) const {
        RhsScratch scratch;
        eval(s, out, scratch, clamp_count);
    }

private:
    MarketParams p_;
    GridSpec grid_;
    BoundaryScheme scheme_;
    CompactSystem compact_;
    double nu_;
};

// ===========================================================================
// Steppers
// ===========================================================================

/// Butcher data of the 3(2) Bogacki-Shampine pair: stage increments k/2 and
/// 3k/4, third-order combination (2/9, 1/3, 4/9), embedded second-order
/// combination (7, 6, 8, 3)/24 with the fourth evaluation at the third-order
/// result.
struct Bs32Tableau {
    static constexpr double a21 = 0.5;
    static constexpr double a32 = 0.75;
    static constexpr double b1 = 2.0 / 9.0, b2 = 1.0 / 3.0, b3 = 4.0 / 9.0;
    static constexpr double e1 = 7.0 / 24.0, e2 = 0.25, e3 = 1.0 / 3.0, e4 = 0.125;
};

/// Scalar reference stepper (same tableau as the PDE stepper); returns the
/// third-order value and writes |third - embedded| to err.
template <class Rhs>
double bs32_scalar_step(double y, double k, Rhs&& f, double* err = nullptr) {
    const double l1 = f(y);
    const double l2 = f(y + Bs32Tableau::a21 * k * l1);
    const double l3 = f(y + Bs32Tableau::a32 * k * l2);
    const double y3 = y + k * (Bs32Tableau::b1 * l1 + Bs32Tableau::b2 * l2 + Bs32Tableau::b3 * l3);
    const double l4 = f(y3);
    const double ye = y + k * (Bs32Tableau::e1 * l1 + Bs32Tableau::e2 * l2 +
                               Bs32Tableau::e3 * l3 + Bs32Tableau::e4 * l4);
    if (err) *err = std::abs(y3 - ye);
    return y3;
}

/// Scalar SSPRK3 stepper in Shu-Osher form.
template <class Rhs>
double ssprk3_scalar_step(double y, double k, Rhs&& f) {
    const double y1 = y + k * f(y);
    const double y2 = 0.75 * y + 0.25 * (y1 + k * f(y1));
    return y / 3.0 + (2.0 / 3.0) * (y2 + k * f(y2));
}

/// Component-wise errors of an attempted step, in the max norm.
struct StepErrors {
    double e_u = 0.0, e_w = 0.0, e_sf = 0.0;
    double max() const { return std::max({e_u, e_w, e_sf}); }
};

namespace detail {

inline void combine2(std::vector<double>& out, const std::vector<double>& y, double a,
                     const std::vector<double>& l) {
    out.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + a * l[i];
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace detail

/// Workspace for one solve; reused across steps and stages.
struct StepWorkspace {
    SemiDiscreteSystem::Rhs l1, l2, l3, l4;
    SemiDiscreteSystem::RhsScratch scratch;
    SolverState stage;
    SolverState proposed;
    std::vector<double> embedded_u, embedded_w;
};

/// One attempt of the 3(2) pair from `s` with step k. Four fresh RHS
/// evaluations per attempt (no reuse across attempts). The proposed state and
/// errors land in `ws`. Throws NegativeDiscriminantError when any stage
/// velocity is unusable; the caller rejects the step.
inline StepErrors bs32_step(const SemiDiscreteSystem& sys, const SolverState& s, double k,
                            StepWorkspace& ws, long* clamp_count = nullptr) {
    using T = Bs32Tableau;
    sys.eval(s, ws.l1, ws.scratch, clamp_count);

    ws.stage.tau = s.tau + T::a21 * k;
    detail::combine2(ws.stage.u, s.u, T::a21 * k, ws.l1.u);
    detail::combine2(ws.stage.w, s.w, T::a21 * k, ws.l1.w);
    ws.stage.s_f = s.s_f + T::a21 * k * ws.l1.s_f;
    sys.eval(ws.stage, ws.l2, ws.scratch, clamp_count);

    ws.stage.tau = s.tau + T::a32 * k;
    detail::combine2(ws.stage.u, s.u, T::a32 * k, ws.l2.u);
    detail::combine2(ws.stage.w, s.w, T::a32 * k, ws.l2.w);
    ws.stage.s_f = s.s_f + T::a32 * k * ws.l2.s_f;
    sys.eval(ws.stage, ws.l3, ws.scratch, clamp_count);

    const std::size_t n = s.u.size();
    ws.proposed.u.resize(n);
    ws.proposed.w.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ws.proposed.u[i] =
            s.u[i] + k * (T::b1 * ws.l1.u[i] + T::b2 * ws.l2.u[i] + T::b3 * ws.l3.u[i]);
        ws.proposed.w[i] =
            s.w[i] + k * (T::b1 * ws.l1.w[i] + T::b2 * ws.l2.w[i] + T::b3 * ws.l3.w[i]);
    }
    ws.proposed.s_f = s.s_f + k * (T::b1 * ws.l1.s_f + T::b2 * ws.l2.s_f + T::b3 * ws.l3.s_f);
    ws.proposed.tau = s.tau + k;
    sys.eval(ws.proposed, ws.l4, ws.scratch, clamp_count);

    ws.embedded_u.resize(n);
    ws.embedded_w.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ws.embedded_u[i] = s.u[i] + k * (T::e1 * ws.l1.u[i] + T::e2 * ws.l2.u[i] +
                                         T::e3 * ws.l3.u[i] + T::e4 * ws.l4.u[i]);
        ws.embedded_w[i] = s.w[i] + k * (T::e1 * ws.l1.w[i] + T::e2 * ws.l2.w[i] +
                                         T::e3 * ws.l3.w[i] + T::e4 * ws.l4.w[i]);
    }
    const double embedded_sf = s.s_f + k * (T::e1 * ws.l1.s_f + T::e2 * ws.l2.s_f +
                                            T::e3 * ws.l3.s_f + T::e4 * ws.l4.s_f);

    StepErrors e;
    e.e_u = detail::max_abs_diff(ws.proposed.u, ws.embedded_u);
    e.e_w = detail::max_abs_diff(ws.proposed.w, ws.embedded_w);
    e.e_sf = std::abs(ws.proposed.s_f - embedded_sf);
    return e;
}

/// One fixed step of SSPRK3 in Shu-Osher form applied jointly to (u, w, s_f).
inline void ssprk3_step(const SemiDiscreteSystem& sys, SolverState& s, double k,
                        StepWorkspace& ws, long* clamp_count = nullptr) {
    const std::size_t n = s.u.size();
    sys.eval(s, ws.l1, ws.scratch, clamp_count);
    ws.stage.tau = s.tau + k;
    detail::combine2(ws.stage.u, s.u, k, ws.l1.u);
    detail::combine2(ws.stage.w, s.w, k, ws.l1.w);
    ws.stage.s_f = s.s_f + k * ws.l1.s_f;
    sys.eval(ws.stage, ws.l2, ws.scratch, clamp_count);
    for (std::size_t i = 0; i < n; ++i) {
        ws.stage.u[i] = 0.75 * s.u[i] + 0.25 * (ws.stage.u[i] + k * ws.l2.u[i]);
        ws.stage.w[i] = 0.75 * s.w[i] + 0.25 * (ws.stage.w[i] + k * ws.l2.w[i]);
    }
    ws.stage.s_f = 0.75 * s.s_f + 0.25 * (ws.stage.s_f + k * ws.l2.s_f);
    ws.stage.tau = s.tau + 0.5 * k;
    sys.eval(ws.stage, ws.l3, ws.scratch, clamp_count);
    for (std::size_t i = 0; i < n; ++i) {
        s.u[i] = s.u[i] / 3.0 + (2.0 / 3.0) * (ws.stage.u[i] + k * ws.l3.u[i]);
        s.w[i] = s.w[i] / 3.0 + (2.0 / 3.0) * (ws.stage.w[i] + k * ws.l3.w[i]);
    }
    s.s_f = s.s_f / 3.0 + (2.0 / 3.0) * (ws.stage.s_f + k * ws.l3.s_f);
    s.tau += k;
}

// ===========================================================================
// Step-size controller
// ===========================================================================

struct StepDecision {
    bool accept;
    double k_new;
};

/// Accept/reject an attempt and propose the next step. E* = 0 maps straight
/// to k_max.
inline StepDecision adapt_step(const StepErrors& e, double k_old, const StepControl& ctl,
                               double k_max_eff) {
    const double e_star = e.max();
    const double exp_acc = ctl.swap_exponents ? 1.0 / 3.0 : 0.5;
    const double exp_rej = ctl.swap_exponents ? 0.5 : 1.0 / 3.0;
    StepDecision d{};
    if (e_star < ctl.eps) {
        d.accept = true;
        d.k_new = (e_star == 0.0)
                      ? k_max_eff
                      : ctl.rho * k_old * std::pow(ctl.eps / e_star, exp_acc);
    } else {
        d.accept = false;
        d.k_new = std::isfinite(e_star)
                      ? ctl.rho * k_old * std::pow(ctl.eps / e_star, exp_rej)
                      : ctl.k_min;
    }
    d.k_new = std::clamp(d.k_new, ctl.k_min, k_max_eff);
    return d;
}

// ===========================================================================
// Full solve
// ===========================================================================

struct SolveOptions {
    TimeMethod method = TimeMethod::bs32;
    StepControl control = {};
    double fixed_step = 0.0;      ///< SSPRK3 step
    int trajectory_stride = 1;    ///< record every n-th accepted level
};

class MaxRejectsError : public std::runtime_error {
public:
    MaxRejectsError() : std::runtime_error("step rejected max_rejects times in a row") {}
};

class NonFiniteStateError : public std::runtime_error {
public:
    NonFiniteStateError() : std::runtime_error("solver state became non-finite") {}
};

namespace detail {

inline void check_finite(const SolverState& s) {
    if (!std::isfinite(s.s_f)) throw NonFiniteStateError();
    for (double v : s.u)
        if (!std::isfinite(v)) throw NonFiniteStateError();
    for (double v : s.w)
        if (!std::isfinite(v)) throw NonFiniteStateError();
}

}  // namespace detail

/// Advance from the payoff state (u = w = 0, s_f = E) to tau = T exactly.
/// Records the boundary, its two derivatives and the step size at every
/// recorded level; derived values are post-processing and never feed back
/// into the stepping.
inline Solution solve(const SemiDiscreteSystem& sys, const SolveOptions& opt) {
    const MarketParams& p = sys.params();
    const double T = p.maturity;
    const int n = sys.grid().interior_count();

    Solution sol;
    SolverState& s = sol.state;
    s.u.assign(n, 0.0);
    s.w.assign(n, 0.0);
    s.s_f = p.strike;
    s.tau = 0.0;

    const int stride = std::max(1, opt.trajectory_stride);

    auto derived = [&](double k_taken) -> TrajectoryPoint {
        const double g = sys.velocity(s.u, s.s_f, &sol.clamp_count);
        sol.max_g_residual = std::max(sol.max_g_residual, sys.velocity_residual(s.u, s.s_f, g));
        return {s.tau, k_taken,
                s.s_f, g * s.s_f,
                sf_second_derivative(s.u, s.s_f, g, p, sys.grid(), &sol.clamp_count)};
    };

    sol.trajectory.push_back(derived(0.0));

    StepWorkspace ws;
    double k_sum = 0.0;
    sol.stats.k_min = std::numeric_limits<double>::infinity();

    if (opt.method == TimeMethod::ssprk3) {
        if (!(opt.fixed_step > 0.0))
            throw std::invalid_argument("solve: ssprk3 requires fixed_step > 0");
        long level = 0;
        while (s.tau < T) {
            const bool last = T - s.tau <= opt.fixed_step;
            const double k = last ? T - s.tau : opt.fixed_step;
            ssprk3_step(sys, s, k, ws, &sol.clamp_count);
            if (last) s.tau = T;
            detail::check_finite(s);
            ++sol.stats.accepted;
            ++level;
            k_sum += k;
            sol.stats.k_min = std::min(sol.stats.k_min, k);
            sol.stats.k_max = std::max(sol.stats.k_max, k);
            if (s.tau >= T || level % stride == 0)
                sol.trajectory.push_back(derived(k));
        }
    } else {
        StepControl ctl = opt.control;
        if (ctl.k_max <= 0.0) ctl.k_max = T / 10.0;
        double k = std::clamp(ctl.k_init, ctl.k_min, ctl.k_max);
        int consecutive_rejects = 0;
        long level = 0;
        while (s.tau < T) {
            const bool last = T - s.tau <= k;
            const double k_eff = last ? T - s.tau : k;
            StepErrors e;
            bool usable = true;
            try {
                e = bs32_step(sys, s, k_eff, ws, &sol.clamp_count);
            } catch (const NegativeDiscriminantError&) {
                usable = false;
                e.e_u = e.e_w = e.e_sf = std::numeric_limits<double>::infinity();
            }
            const StepDecision d = adapt_step(e, k_eff, ctl, ctl.k_max);
            if (usable && d.accept) {
                consecutive_rejects = 0;
                s.u.swap(ws.proposed.u);
                s.w.swap(ws.proposed.w);
                s.s_f = ws.proposed.s_f;
                s.tau = last ? T : ws.proposed.tau;
                detail::check_finite(s);
                ++sol.stats.accepted;
                ++level;
                k_sum += k_eff;
                sol.stats.k_min = std::min(sol.stats.k_min, k_eff);
                sol.stats.k_max = std::max(sol.stats.k_max, k_eff);
                sol.max_error_ratio = std::max(sol.max_error_ratio, e.max() / ctl.eps);
                if (s.tau >= T || level % stride == 0)
                    sol.trajectory.push_back(derived(k_eff));
            } else {
                ++sol.stats.rejected;
                if (++consecutive_rejects > ctl.max_rejects) throw MaxRejectsError();
            }
            k = d.k_new;
        }
    }

    if (sol.stats.accepted > 0) sol.stats.k_avg = k_sum / sol.stats.accepted;
    const TrajectoryPoint& last = sol.trajectory.back();
    sol.sf_prime = last.sf_prime;
    sol.sf_second = last.sf_second;
    sol.g = last.sf_prime / last.s_f;
    return sol;
}

}  // namespace frontfix
