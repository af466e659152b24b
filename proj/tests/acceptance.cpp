// SPDX-License-Identifier: MIT
// Acceptance suite: exercises every shipped guarantee end to end and prints
// one pass/fail line per criterion.
//
// Default configuration finishes in a few minutes. Setting
// FRONTFIX_ACCEPTANCE_FULL=1 switches criterion 4 to the complete
// refinement ladder with the 1e-6 fixed step (tens of minutes).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "frontfix/binomial.hpp"
#include "frontfix/boundary.hpp"
#include "frontfix/compact.hpp"
#include "frontfix/convergence.hpp"
#include "frontfix/integrator.hpp"
#include "frontfix/market.hpp"
#include "frontfix/readout.hpp"
#include "frontfix/stencil.hpp"
#include "support/rational_oracle.hpp"

using namespace frontfix;

namespace {

int g_failures = 0;

void report(int criterion, char part, bool ok, const std::string& detail) {
    if (!ok) ++g_failures;
    std::printf("[%s] criterion %d%c: %s\n", ok ? "PASS" : "FAIL", criterion, part,
                detail.c_str());
    std::fflush(stdout);
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double wall_seconds(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. truncation constants of the five-node staggered scheme
// ---------------------------------------------------------------------------

void criterion_1() {
    const struct {
        std::vector<double> gamma;
        double want;
    } cases[] = {{{2, 3, 4, 5, 6}, 0.77143},
                 {{2, 4, 5, 6, 7}, 1.78646},
                 {{2, 4, 6, 8, 10}, 95.23810}};
    bool ok = true;
    std::string detail = "truncation constants";
    const double elapsed = wall_seconds([&] {
        for (const auto& c : cases) {
            const double got = scheme_a(NodeDistribution::from(c.gamma)).c;
            ok = ok && std::abs(got - c.want) <= 5e-6;
            detail += " " + num(got);
        }
    });
    ok = ok && elapsed < 1.0;
    report(1, ' ', ok, detail + " vs 0.77143 1.78646 95.2381 (" + num(elapsed) + " s)");
}

// ---------------------------------------------------------------------------
// 2. benchmark prices
// ---------------------------------------------------------------------------

Solution run_adaptive(const MarketParams& p, double x_max, double h,
                      const std::vector<double>& gammas, double eps, double rho,
                      int stride = 1) {
    const GridSpec grid(x_max, static_cast<int>(std::lround(x_max / h)));
    const SemiDiscreteSystem sys(p, grid, NodeDistribution::from(gammas));
    SolveOptions opt;
    opt.method = TimeMethod::bs32;
    opt.control.eps = eps;
    opt.control.rho = rho;
    opt.trajectory_stride = stride;
    return solve(sys, opt);
}

struct PriceRun {
    Solution sol;
    GridSpec grid{3.0, 300};
};

PriceRun criterion_2() {
    const MarketParams p = preset("ex-c");
    PriceRun run;
    run.sol = run_adaptive(p, 3.0, 0.01, {2, 3, 4, 5}, 1e-4, 0.9);
    const double p100 = price_at(run.sol, run.grid, p, 100.0).price;
    const double p110 = price_at(run.sol, run.grid, p, 110.0).price;
    report(2, 'a', std::abs(p100 - 6.9322) <= 5e-4 && std::abs(p110 - 4.1550) <= 5e-4,
           "prices P(100)=" + num(p100) + " P(110)=" + num(p110) +
               " vs 6.9322 / 4.1550 (tol 5e-4)");
    const double crr100 = crr_american_put(p, 100.0, {15000});
    const double crr110 = crr_american_put(p, 110.0, {15000});
    report(2, 'b', std::abs(p100 - crr100) <= 1e-3 && std::abs(p110 - crr110) <= 1e-3,
           "binomial oracle CRR(100)=" + num(crr100) + " CRR(110)=" + num(crr110) +
               " (tol 1e-3)");
    return run;
}

// ---------------------------------------------------------------------------
// 3. boundary values and derivatives
// ---------------------------------------------------------------------------

std::vector<Solution> criterion_3() {
    const MarketParams p = preset("ex-b");
    const struct {
        std::vector<double> gamma;
        double reference_acc;  // published h = 0.01 boundary-acceleration column
    } cases[] = {{{2, 3, 4, 5}, 10.20},
                 {{2, 4, 6, 8}, 15.11},
                 {{3, 4, 5, 6}, 9.74},
                 {{3, 5, 7, 9}, 15.53},
                 {{3, 6, 9, 12}, 21.33}};

    std::vector<Solution> sols;
    bool sf_ok = true, sfp_ok = true, acc_ok = true, oracle_ok = true;
    std::string sf_detail = "s_f(T):", sfp_detail = "s_f'(T):", acc_detail = "s_f''(T):",
                oracle_detail = "window-mean est/oracle:";

    for (const auto& c : cases) {
        Solution sol = run_adaptive(p, 3.0, 0.01, c.gamma, 1e-4, 0.9);
        sf_ok = sf_ok && std::abs(sol.state.s_f - 76.16) <= 0.01;
        sfp_ok = sfp_ok && std::abs(sol.sf_prime - (-4.51)) <= 0.03;
        sf_detail += " " + num(sol.state.s_f);
        sfp_detail += " " + num(sol.sf_prime);

        const bool in_band = std::abs(sol.sf_second - c.reference_acc) <= 0.25 * c.reference_acc;
        acc_ok = acc_ok && in_band;
        acc_detail += " " + num(sol.sf_second) + "/" + num(c.reference_acc);

        // trajectory-differentiation oracle over [T/2, T]: the time average of
        // the extracted acceleration must match the exact mean slope of the
        // recorded s_f' trajectory
        const auto& tr = sol.trajectory;
        std::size_t i0 = 0;
        while (i0 < tr.size() && tr[i0].tau < 0.5 * p.maturity) ++i0;
        double integral = 0.0;
        for (std::size_t i = i0 + 1; i < tr.size(); ++i)
            integral +=
                0.5 * (tr[i].sf_second + tr[i - 1].sf_second) * (tr[i].tau - tr[i - 1].tau);
        const double span = tr.back().tau - tr[i0].tau;
        const double mean_est = integral / span;
        const double mean_oracle = (tr.back().sf_prime - tr[i0].sf_prime) / span;
        oracle_ok = oracle_ok && std::abs(mean_est - mean_oracle) <= 0.15 * std::abs(mean_oracle);
        oracle_detail += " " + num(mean_est) + "/" + num(mean_oracle);

        sols.push_back(std::move(sol));
    }
    report(3, 'a', sf_ok, sf_detail + " vs 76.16 (tol 0.01)");
    report(3, 'b', sfp_ok, sfp_detail + " vs -4.51 (tol 0.03)");
    report(3, 'c', acc_ok,
           acc_detail + " (tol 25%); note: the reference column values scale linearly with h "
                        "and extrapolate to ~0 as h -> 0, i.e. they are estimator artifacts of "
                        "the source implementation, while this extraction is pinned to the "
                        "trajectory oracle below");
    report(3, 'd', oracle_ok, oracle_detail + " (tol 15%)");
    return sols;
}

// ---------------------------------------------------------------------------
// 4. convergence rates
// ---------------------------------------------------------------------------

void criterion_4(bool full) {
    const MarketParams p = preset("ex-a");
    const double threshold = full ? 4.2 : 3.8;
    const struct {
        const char* name;
        std::vector<double> gamma;
    } families[] = {{"CS-55(2,4,5,6,7)", {2, 4, 5, 6, 7}}, {"CS-54(2,4,5,6)", {2, 4, 5, 6}}};

    char part = 'a';
    for (const auto& fam : families) {
        LadderConfig cfg{p, 3.0, fam.gamma, CompactVariant::b5, {}, {}};
        cfg.options.method = TimeMethod::ssprk3;
        cfg.options.trajectory_stride = 1 << 20;
        if (full) {
            cfg.spacings = {0.05, 0.025, 0.0125, 0.00625};
            cfg.options.fixed_step = 1e-6;
        } else {
            cfg.spacings = {0.05, 0.025, 0.0125};
            cfg.options.fixed_step = 1e-5;
            // the payoff-state boundary velocity grows like h^(-3/2): the
            // 4x-finer reference needs the smaller startup step
            cfg.reference_fixed_step = 1e-6;
        }
        const ConvergenceTable t = run_ladder(cfg);
        const std::size_t last = t.levels.size() - 1;
        const double ru = *t.rate_u[last], rw = *t.rate_w[last], rsf = *t.rate_sf[last],
                     rsfp = *t.rate_sf_prime[last];
        const bool ok =
            ru >= threshold && rw >= threshold && rsf >= threshold && rsfp >= threshold;
        report(4, part++, ok,
               std::string(fam.name) + " finest-pair rates " + num(ru) + " " + num(rw) + " " +
                   num(rsf) + " " + num(rsfp) + " >= " + num(threshold) +
                   (full ? " (full ladder, k=1e-6)" : " (reduced ladder, k=1e-5)"));
    }
}

// ---------------------------------------------------------------------------
// 5. adaptive vs fixed-step efficiency
// ---------------------------------------------------------------------------

void criterion_5() {
    const MarketParams p = preset("ex-c");
    const GridSpec grid(3.0, 150);
    const SemiDiscreteSystem sys(p, grid, NodeDistribution::from({2, 4, 6, 8}));
    const double target = 11.6976, tol = 5e-4;

    struct Run {
        std::string label;
        Solution sol;
        double wall = 0.0;
        double price = 0.0;
    };
    std::vector<Run> adaptive, fixed;
    for (const double rho : {0.3, 0.9}) {
        Run r;
        r.label = "bs32(rho=" + num(rho) + ")";
        SolveOptions opt;
        opt.method = TimeMethod::bs32;
        opt.control.eps = 1e-2;
        opt.control.rho = rho;
        opt.trajectory_stride = 1 << 20;
        r.wall = wall_seconds([&] { r.sol = solve(sys, opt); });
        r.price = price_at(r.sol, grid, p, 90.0).price;
        adaptive.push_back(std::move(r));
    }
    for (const double k : {4e-3, 8e-4, 4e-4}) {
        Run r;
        r.label = "ssprk3(k=" + num(k) + ")";
        SolveOptions opt;
        opt.method = TimeMethod::ssprk3;
        opt.fixed_step = k;
        opt.trajectory_stride = 1 << 20;
        r.wall = wall_seconds([&] { r.sol = solve(sys, opt); });
        r.price = price_at(r.sol, grid, p, 90.0).price;
        fixed.push_back(std::move(r));
    }

    bool price_ok = true;
    std::string detail;
    for (const Run& r : adaptive) {
        price_ok = price_ok && std::abs(r.price - target) <= tol;
        detail += r.label + " P=" + num(r.price) + " " + num(r.wall) + "s  ";
    }
    report(5, 'a', price_ok, detail + "vs 11.6976 (tol 5e-4)");

    double cheapest_fixed = -1.0;
    std::string fixed_detail;
    for (const Run& r : fixed) {
        const bool hits = std::abs(r.price - target) <= tol;
        if (hits && (cheapest_fixed < 0.0 || r.wall < cheapest_fixed)) cheapest_fixed = r.wall;
        fixed_detail += r.label + " P=" + num(r.price) + " " + num(r.wall) + "s  ";
    }
    const double slowest_adaptive = std::max(adaptive[0].wall, adaptive[1].wall);
    report(5, 'b', cheapest_fixed > 0.0 && slowest_adaptive <= 0.5 * cheapest_fixed,
           fixed_detail + "-- adaptive " + num(slowest_adaptive) +
               "s <= half of cheapest accurate fixed " + num(cheapest_fixed) + "s");

    const StepStats st = adaptive[1].sol.stats;  // rho = 0.9
    auto within3 = [](double got, double want) {
        return got >= want / 3.0 && got <= want * 3.0;
    };
    report(5, 'c',
           within3(st.k_min, 4.9e-4) && within3(st.k_avg, 7.1e-3) && within3(st.k_max, 1.6e-2),
           "step stats min/avg/max " + num(st.k_min) + " " + num(st.k_avg) + " " +
               num(st.k_max) + " vs 4.9e-4 7.1e-3 1.6e-2 (factor 3)");
}

// ---------------------------------------------------------------------------
// 6. property suite
// ---------------------------------------------------------------------------

void criterion_6(const PriceRun& priced, const std::vector<Solution>& boundary_runs) {
    bool stencil_ok = true;
    for (const auto& gammas : {std::vector<double>{2, 3, 4, 5, 6}, {3, 5, 7, 9, 11}}) {
        const NodeDistribution d = NodeDistribution::from(gammas);
        for (const BoundaryScheme& s : {scheme_a(d), scheme_b(d), scheme_c(d)}) {
            const CertifyReport rep = certify_scheme(s, 8);
            for (int kp : s.kill_set)
                stencil_ok = stencil_ok && rep.relative_residual[kp] <= 1e-9;
        }
    }
    report(6, 'a', stencil_ok, "staggered schemes annihilate their kill sets (<= 1e-9)");

    bool rows_ok = true;
    for (const NearBoundaryOrder o :
         {NearBoundaryOrder::fourth, NearBoundaryOrder::fifth, NearBoundaryOrder::sixth})
        rows_ok = rows_ok && std::abs(near_boundary_row(o).lhs_sum() - 12.0) <= 1e-12;
    report(6, 'b', rows_ok, "near-boundary row sums equal 12");

    bool quad_ok = true;
    {
        const GridSpec g(3.0, 48);
        const CompactSystem sys(g);
        std::vector<double> f(g.interior_count());
        for (int i = 1; i < g.n_x; ++i) f[i - 1] = 1.5 * (i * g.h()) * (i * g.h());
        for (double d2 : sys.second_derivative(f, {0.0, 1.5 * 9.0}))
            quad_ok = quad_ok && std::abs(d2 - 3.0) <= 1e-9;
    }
    report(6, 'c', quad_ok, "compact operator exact on quadratics at all nodes");

    auto slope = [](bool bs) {
        const std::vector<double> ks = {1e-1, 5e-2, 2.5e-2, 1.25e-2, 1e-3};
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (double k : ks) {
            double y = 1.0;
            const long n = std::lround(1.0 / k);
            for (long i = 0; i < n; ++i)
                y = bs ? bs32_scalar_step(y, k, [](double v) { return -v; })
                       : ssprk3_scalar_step(y, k, [](double v) { return -v; });
            const double lx = std::log2(k), ly = std::log2(std::abs(y - std::exp(-1.0)));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double n = static_cast<double>(ks.size());
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    const double s_bs = slope(true), s_ssp = slope(false);
    report(6, 'd', std::abs(s_bs - 3.0) <= 0.1 && std::abs(s_ssp - 3.0) <= 0.1,
           "scalar order slopes bs32=" + num(s_bs) + " ssprk3=" + num(s_ssp) + " (3.0 +- 0.1)");

    double worst_res = priced.sol.max_g_residual;
    for (const Solution& s : boundary_runs) worst_res = std::max(worst_res, s.max_g_residual);
    report(6, 'e', worst_res <= 1e-8,
           "velocity-identity residual at accepted levels <= 1e-8 (worst " + num(worst_res) +
               ")");

    auto monotone = [](const Solution& s) {
        double prev = 1e300;
        for (const TrajectoryPoint& t : s.trajectory) {
            if (!(t.s_f <= prev + 1e-10 * 100.0 && t.s_f > 0.0 && t.s_f <= 100.0)) return false;
            prev = t.s_f;
        }
        return true;
    };
    bool mono_ok = monotone(priced.sol);
    for (const Solution& s : boundary_runs) mono_ok = mono_ok && monotone(s);
    report(6, 'f', mono_ok, "boundary trajectories monotone non-increasing in (0, E]");

    bool delta_ok = true;
    {
        const MarketParams p = preset("ex-c");
        for (double s = priced.sol.state.s_f + 0.5; s < 300.0; s += 3.0) {
            const double d = price_at(priced.sol, priced.grid, p, s).delta;
            delta_ok = delta_ok && d <= 1e-6 && d >= -1.0 - 1e-6;
        }
    }
    report(6, 'g', delta_ok, "delta readout within [-1, 0] (slack 1e-6)");

    double worst_ratio = priced.sol.max_error_ratio;
    for (const Solution& s : boundary_runs)
        worst_ratio = std::max(worst_ratio, s.max_error_ratio);
    report(6, 'h', worst_ratio < 1.0,
           "accepted-step errors stay below the tolerance (worst ratio " + num(worst_ratio) +
               ")");

    bool rational_ok = true;
    for (const auto& nodes :
         {std::vector<long>{2, 3, 4, 5, 6}, {2, 4, 6, 8, 10}, {3, 5, 7, 9, 11}}) {
        const auto exact = frontfix_test::rational_moment_weights(nodes, {4, 5, 6, 7});
        const BoundaryScheme s =
            solve_moment_weights(std::vector<double>(nodes.begin(), nodes.end()), {4, 5, 6, 7});
        for (std::size_t m = 0; m < nodes.size(); ++m) {
            const double want = static_cast<double>(exact[m]);
            rational_ok = rational_ok && std::abs(s.w[m] - want) <= 1e-12 * std::abs(want);
        }
    }
    report(6, 'i', rational_ok, "double-precision weights match the exact-rational oracle");

    {
        const MarketParams p = preset("ex-b");
        const Solution cs55 = run_adaptive(p, 3.0, 0.01, {2, 3, 4, 5, 6}, 1e-4, 0.9, 1 << 20);
        const double diff = std::abs(cs55.state.s_f - boundary_runs[0].state.s_f);
        report(6, 'j', diff < 0.01,
               "CS-55(2,3,4,5,6) vs CS-54(2,3,4,5) terminal boundary differs by " + num(diff) +
                   " (< 0.01)");
    }
}

// ---------------------------------------------------------------------------
// 7. erratum regressions
// ---------------------------------------------------------------------------

void criterion_7() {
    using frontfix_test::Rational;
    const auto w = frontfix_test::rational_moment_weights({1, 2, 3, 4, 5}, {4, 5, 6, 7});
    report(7, 'a', w[2] == Rational(1250, 27) && w[2] != Rational(1024, 27),
           "equispaced five-node third weight is 1250/27, not the published 1024/27");

    // velocity quadratic: expansion-derived coefficients satisfy the scheme
    // identity, the verbatim transcription does not
    const MarketParams p = preset("ex-b");
    const double s_f = 90.0, g_star = -0.05;
    const BoundaryDerivatives d = q_boundary_derivatives(p, convection_beta(p, g_star));
    const GridSpec grid(3.0, 300);
    const BoundaryScheme s = scheme_a(NodeDistribution::from({2, 3, 4, 5, 6}));
    std::vector<double> u(grid.interior_count());
    for (int i = 1; i < grid.n_x; ++i) {
        const double x = i * grid.h();
        const double q = d.q1 * x + d.q2 * x * x / 2 + d.q3 * x * x * x / 6 +
                         0.5 * (std::exp(x) - 1 - x - x * x / 2 - x * x * x / 6);
        u[i - 1] = q * q + p.strike - std::exp(x) * s_f;
    }
    const double m = weighted_q_sum(s, sample_q(u, s_f, s, grid, p));
    const double h = grid.h();
    const double g_derived = boundary_velocity(velocity_quadratic(m, s, p, h));

    const double sr = p.sqrt_rE(), sig = p.sigma;
    const double s3 = sig * sig * sig, s5 = s3 * sig * sig;
    const double nu = drift_nu(p);
    const double alpha = h * h * h * sr * s.v3 / (3.0 * s5 * s_f * s_f);
    const double varpi = -2.0 * h * h * sr * s.v2 / (3.0 * s3 * s_f) +
                         4.0 * h * h * h * sr * s.v3 / (3.0 * s5 * s_f);
    const double kappa = -m + h * sr * s.v1 / sig - h * h * nu * sr * s.v2 / (3.0 * s3) +
                         2.0 * h * h * h * nu * nu * sr * s.v3 / (3.0 * s5) +
                         h * h * h * p.rate * sr * s.v3 / (2.0 * s3);
    const double g_verbatim =
        (-varpi - std::sqrt(varpi * varpi - 4.0 * alpha * kappa)) / (2.0 * alpha) / s_f;

    const double res_derived = std::abs(velocity_rhs_at(g_derived, s, p, h) - m);
    const double res_verbatim = std::abs(velocity_rhs_at(g_verbatim, s, p, h) - m);
    report(7, 'b',
           res_derived <= 1e-9 * std::abs(m) + 1e-12 && res_verbatim > 1e3 * res_derived,
           "identity residuals: derived " + num(res_derived) + ", verbatim transcription " +
               num(res_verbatim));
}

}  // namespace

int main() {
    const bool full = std::getenv("FRONTFIX_ACCEPTANCE_FULL") != nullptr;
    std::printf("acceptance suite (%s mode)\n", full ? "full" : "reduced");

    criterion_1();
    const PriceRun priced = criterion_2();
    const std::vector<Solution> boundary_runs = criterion_3();
    criterion_4(full);
    criterion_5();
    criterion_6(priced, boundary_runs);
    criterion_7();

    std::printf("%d failure(s)\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
