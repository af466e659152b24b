// SPDX-License-Identifier: MIT
/**
 * @file convergence.hpp
 * @brief Grid-refinement ladders: errors against a fine self-reference and
 *        observed convergence rates.
 *
 * Errors are max-norm differences on shared nodes only (ladder spacings are
 * integer multiples of the reference spacing, so coarse nodes coincide with
 * reference nodes and no interpolation enters the metric), plus the terminal
 * |delta s_f| and |delta s_f'|.
 */

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "frontfix/integrator.hpp"
#include "frontfix/parallel.hpp"

namespace frontfix {

struct LadderConfig {
    MarketParams params;
    double x_max = 3.0;
    std::vector<double> gammas;          ///< 4 (CS-54) or 5 (CS-55) offsets
    CompactVariant variant = CompactVariant::b5;
    std::vector<double> spacings;        ///< ladder h values, descending 2:1
    SolveOptions options;                ///< method + control shared by levels
    int reference_refinement = 4;        ///< reference h = finest h / this
    double reference_eps_tightening = 100.0;  ///< adaptive runs only
    /// Fixed step for the reference run (0 keeps the levels' step). The
    /// payoff-state boundary velocity grows like h^(-3/2), so very fine
    /// reference grids need a smaller startup step than the levels.
    double reference_fixed_step = 0.0;
};

struct LevelErrors {
    double h;
    double err_u, err_w, err_sf, err_sf_prime;
};

struct ConvergenceTable {
    std::vector<LevelErrors> levels;  ///< coarse to fine
    /// rate between consecutive levels: log2(err_2h / err_h); empty for the
    /// first level.
    std::vector<std::optional<double>> rate_u, rate_w, rate_sf, rate_sf_prime;
};

namespace detail {

inline int grid_points(double x_max, double h) {
    const double n = x_max / h;
    const int ni = static_cast<int>(std::lround(n));
    if (std::abs(n - ni) > 1e-9 * ni)
        throw std::invalid_argument("spacing must divide x_max");
    return ni;
}

}  // namespace detail

/// Solve one ladder level.
inline Solution run_level(const LadderConfig& cfg, double h, const SolveOptions& opt) {
    const GridSpec grid(cfg.x_max, detail::grid_points(cfg.x_max, h));
    const SemiDiscreteSystem sys(cfg.params, grid, NodeDistribution::from(cfg.gammas),
                                 cfg.variant);
    return solve(sys, opt);
}

/// Reference run: a grid `reference_refinement` times finer than the finest
/// ladder level, with epsilon tightened for adaptive runs.
inline Solution reference_solution(const LadderConfig& cfg) {
    if (cfg.spacings.empty()) throw std::invalid_argument("ladder is empty");
    SolveOptions opt = cfg.options;
    if (opt.method == TimeMethod::bs32)
        opt.control.eps /= cfg.reference_eps_tightening;
    if (opt.method == TimeMethod::ssprk3 && cfg.reference_fixed_step > 0.0)
        opt.fixed_step = cfg.reference_fixed_step;
    const double h_ref = cfg.spacings.back() / cfg.reference_refinement;
    return run_level(cfg, h_ref, opt);
}

/// Max-norm error of a level against the reference on shared interior nodes.
inline LevelErrors level_errors(const Solution& level, double h, const Solution& ref,
                                double h_ref) {
    const double ratio_d = h / h_ref;
    const int ratio = static_cast<int>(std::lround(ratio_d));
    if (std::abs(ratio_d - ratio) > 1e-9)
        throw std::invalid_argument("level spacing must be an integer multiple of reference");
    LevelErrors e{h, 0.0, 0.0, 0.0, 0.0};
    const std::size_t n = level.state.u.size();
    for (std::size_t i = 1; i <= n; ++i) {
        const std::size_t j = i * ratio;  // shared node in the reference grid
        e.err_u = std::max(e.err_u, std::abs(level.state.u[i - 1] - ref.state.u[j - 1]));
        e.err_w = std::max(e.err_w, std::abs(level.state.w[i - 1] - ref.state.w[j - 1]));
    }
    e.err_sf = std::abs(level.state.s_f - ref.state.s_f);
    e.err_sf_prime = std::abs(level.sf_prime - ref.sf_prime);
    return e;
}

/// Run the whole ladder (levels in parallel) and tabulate errors and rates.
inline ConvergenceTable run_ladder(const LadderConfig& cfg) {
    if (cfg.spacings.size() < 2)
        throw std::invalid_argument("ladder needs at least two spacings");
    for (std::size_t i = 1; i < cfg.spacings.size(); ++i)
        if (!(cfg.spacings[i] < cfg.spacings[i - 1]))
            throw std::invalid_argument("ladder spacings must descend");

    const double h_ref = cfg.spacings.back() / cfg.reference_refinement;
    std::vector<Solution> sols(cfg.spacings.size());
    Solution ref;
    std::vector<std::function<void()>> tasks;
    tasks.emplace_back([&] { ref = reference_solution(cfg); });
    for (std::size_t i = 0; i < cfg.spacings.size(); ++i)
        tasks.emplace_back([&, i] { sols[i] = run_level(cfg, cfg.spacings[i], cfg.options); });
    run_parallel(std::move(tasks));

    ConvergenceTable table;
    for (std::size_t i = 0; i < sols.size(); ++i)
        table.levels.push_back(level_errors(sols[i], cfg.spacings[i], ref, h_ref));

    auto rates = [&](auto member) {
        std::vector<std::optional<double>> r(table.levels.size());
        for (std::size_t i = 1; i < table.levels.size(); ++i) {
            const double coarse = table.levels[i - 1].*member;
            const double fine = table.levels[i].*member;
            if (coarse > 0.0 && fine > 0.0) r[i] = std::log2(coarse / fine);
        }
        return r;
    };
    table.rate_u = rates(&LevelErrors::err_u);
    table.rate_w = rates(&LevelErrors::err_w);
    table.rate_sf = rates(&LevelErrors::err_sf);
    table.rate_sf_prime = rates(&LevelErrors::err_sf_prime);
    return table;
}

}  // namespace frontfix
