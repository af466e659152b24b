// SPDX-License-Identifier: MIT
// Command-line front end: configures solver runs and emits machine-readable
// CSV for prices, convergence ladders, boundary trajectories, timing
// comparisons, stencil weights and binomial oracle prices.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frontfix/binomial.hpp"
#include "frontfix/boundary.hpp"
#include "frontfix/compact.hpp"
#include "frontfix/convergence.hpp"
#include "frontfix/integrator.hpp"
#include "frontfix/market.hpp"
#include "frontfix/parallel.hpp"
#include "frontfix/readout.hpp"
#include "frontfix/stencil.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

// ---------------------------------------------------------------------------
// Output helpers: deterministic CSV (fixed formats, no timestamps)
// ---------------------------------------------------------------------------

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

class CsvOut {
public:
    explicit CsvOut(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
    void row(const std::vector<std::string>& cells) {
        std::ostream& os = stream();
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << cells[i];
        }
        os << '\n';
    }

private:
    std::ofstream file_;
};

// ---------------------------------------------------------------------------
// Shared configuration
// ---------------------------------------------------------------------------

struct Options {
    std::string preset;
    double strike = 100.0, rate = 0.05, vol = 0.2, maturity = 1.0;
    double h = 0.01;
    double xmax = 3.0;
    std::string scheme = "cs54";
    std::vector<double> gamma;
    double eps = 1e-4;
    double rho = 0.9;
    std::string method = "bs32";
    double k = 0.0;
    double kinit = 1e-3;
    std::vector<double> spots = {90.0, 100.0, 110.0};
    std::string out;
    bool b6 = false;
    // subcommand extras
    std::vector<double> ladder = {0.05, 0.025, 0.0125, 0.00625};
    std::vector<double> rho_list = {0.3, 0.9};
    std::vector<double> k_list = {4e-3, 8e-4, 4e-4};
    int steps = 15000;
    std::string family = "a";
    int stride = 1;
};

frontfix::MarketParams make_params(const Options& o) {
    if (!o.preset.empty()) return frontfix::preset(o.preset);
    return {o.strike, o.rate, o.vol, o.maturity};
}

std::vector<double> default_gamma(const std::string& scheme) {
    if (scheme == "cs55") return {2, 3, 4, 5, 6};
    return {2, 3, 4, 5};
}

std::vector<double> resolve_gamma(const Options& o) {
    std::vector<double> g = o.gamma.empty() ? default_gamma(o.scheme) : o.gamma;
    const std::size_t want = o.scheme == "cs55" ? 5 : 4;
    if (g.size() != want)
        throw CLI::ValidationError("--gamma", o.scheme + " needs " + std::to_string(want) +
                                                  " offsets, got " + std::to_string(g.size()));
    return g;
}

frontfix::GridSpec make_grid(const Options& o, double h) {
    const double n = o.xmax / h;
    const int ni = static_cast<int>(std::lround(n));
    if (std::abs(n - ni) > 1e-9 * std::max(1, ni))
        throw CLI::ValidationError("--h", "h must divide xmax");
    return {o.xmax, ni};
}

frontfix::SolveOptions make_solve_options(const Options& o) {
    frontfix::SolveOptions s;
    if (o.method == "bs32") {
        s.method = frontfix::TimeMethod::bs32;
        s.control.eps = o.eps;
        s.control.rho = o.rho;
        s.control.k_init = o.kinit;
    } else if (o.method == "ssprk3") {
        s.method = frontfix::TimeMethod::ssprk3;
        if (!(o.k > 0.0)) throw CLI::ValidationError("--k", "ssprk3 requires --k > 0");
        s.fixed_step = o.k;
    } else {
        throw CLI::ValidationError("--method", "must be bs32 or ssprk3");
    }
    s.trajectory_stride = o.stride;
    return s;
}

frontfix::CompactVariant variant_of(const Options& o) {
    return o.b6 ? frontfix::CompactVariant::b6 : frontfix::CompactVariant::b5;
}

frontfix::Solution run_solve(const Options& o, double h) {
    const frontfix::MarketParams p = make_params(o);
    const frontfix::GridSpec grid = make_grid(o, h);
    const frontfix::SemiDiscreteSystem sys(
        p, grid, frontfix::NodeDistribution::from(resolve_gamma(o)), variant_of(o));
    return frontfix::solve(sys, make_solve_options(o));
}

/// Published reference prices for the ex-c preset (binomial benchmark).
std::optional<double> known_benchmark(const Options& o, double spot) {
    if (o.preset != "ex-c") return std::nullopt;
    if (spot == 90.0) return 11.6976;
    if (spot == 100.0) return 6.9320;
    if (spot == 110.0) return 4.1550;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Flat key=value config file; command-line flags override file entries.
// ---------------------------------------------------------------------------

std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot read " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }
    return kv;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    return v;
}

void apply_config(Options& o, const std::map<std::string, std::string>& kv) {
    auto get = [&](const char* key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (const auto* v = get("preset")) o.preset = *v;
    if (const auto* v = get("strike")) o.strike = std::stod(*v);
    if (const auto* v = get("rate")) o.rate = std::stod(*v);
    if (const auto* v = get("vol")) o.vol = std::stod(*v);
    if (const auto* v = get("maturity")) o.maturity = std::stod(*v);
    if (const auto* v = get("h")) o.h = std::stod(*v);
    if (const auto* v = get("xmax")) o.xmax = std::stod(*v);
    if (const auto* v = get("scheme")) o.scheme = *v;
    if (const auto* v = get("gamma")) o.gamma = parse_list(*v);
    if (const auto* v = get("eps")) o.eps = std::stod(*v);
    if (const auto* v = get("rho")) o.rho = std::stod(*v);
    if (const auto* v = get("method")) o.method = *v;
    if (const auto* v = get("k")) o.k = std::stod(*v);
    if (const auto* v = get("kinit")) o.kinit = std::stod(*v);
    if (const auto* v = get("spots")) o.spots = parse_list(*v);
    if (const auto* v = get("out")) o.out = *v;
    if (const auto* v = get("b6")) o.b6 = (*v == "1" || *v == "true");
    if (const auto* v = get("ladder")) o.ladder = parse_list(*v);
    if (const auto* v = get("rho-list")) o.rho_list = parse_list(*v);
    if (const auto* v = get("k-list")) o.k_list = parse_list(*v);
    if (const auto* v = get("steps")) o.steps = std::stoi(*v);
    if (const auto* v = get("family")) o.family = *v;
    if (const auto* v = get("stride")) o.stride = std::stoi(*v);
}

void add_common_flags(CLI::App* cmd, Options& o) {
    cmd->set_help_flag("--help", "print help");
    cmd->add_option("--config", [&o](const std::vector<std::string>&) { return true; },
                    "flat key=value file mirroring every flag (flags override)");
    cmd->add_option("--preset", o.preset, "parameter preset: ex-a, ex-b or ex-c");
    cmd->add_option("--strike", o.strike, "strike E");
    cmd->add_option("--rate", o.rate, "interest rate r");
    cmd->add_option("--vol", o.vol, "volatility sigma");
    cmd->add_option("--maturity", o.maturity, "maturity T in years");
    cmd->add_option("--h", o.h, "grid spacing (must divide xmax)");
    cmd->add_option("--xmax", o.xmax, "domain truncation length");
    cmd->add_option("--scheme", o.scheme, "boundary-scheme family: cs55 or cs54");
    cmd->add_option("--gamma", o.gamma, "staggered node offsets, e.g. 2,3,4,5[,6]")
        ->delimiter(',');
    cmd->add_option("--eps", o.eps, "adaptive error tolerance");
    cmd->add_option("--rho", o.rho, "step-control safety factor");
    cmd->add_option("--method", o.method, "time integrator: bs32 or ssprk3");
    cmd->add_option("--k", o.k, "fixed step for ssprk3");
    cmd->add_option("--kinit", o.kinit, "initial adaptive step");
    cmd->add_option("--spots", o.spots, "evaluation spot list")->delimiter(',');
    cmd->add_option("--out", o.out, "output CSV path (default stdout)");
    cmd->add_flag("--b6", o.b6, "sixth-order near-boundary rows");
    cmd->add_option("--stride", o.stride, "trajectory recording stride");
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_price(const Options& o) {
    const frontfix::MarketParams p = make_params(o);
    const frontfix::GridSpec grid = make_grid(o, o.h);
    const frontfix::Solution sol = run_solve(o, o.h);
    CsvOut csv(o.out);
    csv.row({"S", "price", "delta", "benchmark", "abs_diff"});
    for (double s : o.spots) {
        const frontfix::PriceReadout r = frontfix::price_at(sol, grid, p, s);
        const std::optional<double> bench = known_benchmark(o, s);
        csv.row({fmt(s), fmt(r.price), fmt(r.delta), bench ? fmt(*bench) : "",
                 bench ? fmt(std::abs(r.price - *bench)) : ""});
    }
    return 0;
}

int cmd_convergence(const Options& o) {
    for (std::size_t i = 1; i < o.ladder.size(); ++i)
        if (std::abs(o.ladder[i - 1] / o.ladder[i] - 2.0) > 1e-9)
            throw CLI::ValidationError("--ladder", "ladder must descend in 2:1 ratios");
    frontfix::LadderConfig cfg{make_params(o), o.xmax, resolve_gamma(o), variant_of(o),
                               o.ladder, make_solve_options(o)};
    if (cfg.options.method == frontfix::TimeMethod::ssprk3 && o.k > 1e-6)
        cfg.reference_fixed_step = 1e-6;  // fine reference grids need the smaller startup step
    const frontfix::ConvergenceTable t = frontfix::run_ladder(cfg);
    CsvOut csv(o.out);
    csv.row({"h", "err_option", "rate_option", "err_delta", "rate_delta", "err_boundary",
             "rate_boundary", "err_boundary_deriv", "rate_boundary_deriv"});
    auto rate_cell = [](const std::optional<double>& r) { return r ? fmt(*r) : "~"; };
    for (std::size_t i = 0; i < t.levels.size(); ++i) {
        const frontfix::LevelErrors& e = t.levels[i];
        csv.row({fmt(e.h), fmt(e.err_u), rate_cell(t.rate_u[i]), fmt(e.err_w),
                 rate_cell(t.rate_w[i]), fmt(e.err_sf), rate_cell(t.rate_sf[i]),
                 fmt(e.err_sf_prime), rate_cell(t.rate_sf_prime[i])});
    }
    return 0;
}

int cmd_boundary(const Options& o) {
    const frontfix::Solution sol = run_solve(o, o.h);
    CsvOut csv(o.out);
    csv.row({"tau", "s_f", "sf_prime", "sf_second", "k"});
    for (const frontfix::TrajectoryPoint& t : sol.trajectory)
        csv.row({fmt(t.tau), fmt(t.s_f), fmt(t.sf_prime), fmt(t.sf_second), fmt(t.k)});
    return 0;
}

int cmd_timing(const Options& o) {
    struct Cell {
        std::string method;
        double eps = 0.0, rho = 0.0, k = 0.0;
        frontfix::Solution sol;
        double wall_s = 0.0;
    };
    std::vector<Cell> cells;
    for (double rho : o.rho_list)
        cells.push_back({"bs32", o.eps, rho, 0.0, {}, 0.0});
    for (double k : o.k_list)
        cells.push_back({"ssprk3", 0.0, 0.0, k, {}, 0.0});

    std::vector<std::function<void()>> tasks;
    for (Cell& c : cells)
        tasks.emplace_back([&o, &c] {
            Options run = o;
            run.method = c.method;
            run.eps = c.eps;
            run.rho = c.rho;
            run.k = c.k;
            run.stride = 1 << 20;  // timing runs do not need dense trajectories
            const auto t0 = std::chrono::steady_clock::now();
            c.sol = run_solve(run, o.h);
            c.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        });
    frontfix::run_parallel(std::move(tasks));

    const frontfix::MarketParams p = make_params(o);
    const frontfix::GridSpec grid = make_grid(o, o.h);
    CsvOut csv(o.out);
    std::vector<std::string> header = {"method", "eps", "rho", "k"};
    for (double s : o.spots) header.push_back("price_S" + fmt(s));
    header.insert(header.end(),
                  {"k_min", "k_avg", "k_max", "accepted", "rejected", "wall_s"});
    csv.row(header);
    for (const Cell& c : cells) {
        std::vector<std::string> row = {c.method, c.method == "bs32" ? fmt(c.eps) : "",
                                        c.method == "bs32" ? fmt(c.rho) : "",
                                        c.method == "ssprk3" ? fmt(c.k) : ""};
        for (double s : o.spots)
            row.push_back(fmt(frontfix::price_at(c.sol, grid, p, s).price));
        row.push_back(fmt(c.sol.stats.k_min));
        row.push_back(fmt(c.sol.stats.k_avg));
        row.push_back(fmt(c.sol.stats.k_max));
        row.push_back(std::to_string(c.sol.stats.accepted));
        row.push_back(std::to_string(c.sol.stats.rejected));
        row.push_back(fmt(c.wall_s));  // excluded from determinism checks
        csv.row(row);
    }
    return 0;
}

int cmd_stencil(const Options& o) {
    if (o.gamma.empty()) throw CLI::ValidationError("--gamma", "stencil requires --gamma");
    const frontfix::NodeDistribution dist = frontfix::NodeDistribution::from(o.gamma);
    frontfix::BoundaryScheme s;
    if (o.family == "a") s = frontfix::scheme_a(dist);
    else if (o.family == "b") s = frontfix::scheme_b(dist);
    else if (o.family == "c") s = frontfix::scheme_c(dist);
    else throw CLI::ValidationError("--family", "must be a, b or c");

    double max_residual = 0.0;
    const frontfix::CertifyReport rep = frontfix::certify_scheme(s, 8);
    for (int p : s.kill_set) max_residual = std::max(max_residual, rep.relative_residual[p]);

    CsvOut csv(o.out);
    std::vector<std::string> header = {"nodes", "w0"};
    for (std::size_t m = 1; m <= s.w.size(); ++m) header.push_back("w" + std::to_string(m));
    header.insert(header.end(), {"v1", "v2", "v3", "C", "max_moment_residual"});
    csv.row(header);
    std::string nodes;
    for (std::size_t m = 0; m < s.nodes.size(); ++m)
        nodes += (m ? ";" : "") + fmt(s.nodes[m]);
    std::vector<std::string> row = {nodes, fmt(s.w0)};
    for (double w : s.w) row.push_back(fmt(w));
    row.insert(row.end(), {fmt(s.v1), fmt(s.v2), fmt(s.v3), fmt(s.c), fmt(max_residual)});
    csv.row(row);
    return 0;
}

int cmd_oracle(const Options& o) {
    const frontfix::MarketParams p = make_params(o);
    CsvOut csv(o.out);
    csv.row({"S", "crr_price"});
    std::vector<double> prices(o.spots.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t i = 0; i < o.spots.size(); ++i)
        tasks.emplace_back([&, i] {
            prices[i] = frontfix::crr_american_put(p, o.spots[i], {o.steps});
        });
    frontfix::run_parallel(std::move(tasks));
    for (std::size_t i = 0; i < o.spots.size(); ++i)
        csv.row({fmt(o.spots[i]), fmt(prices[i])});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Options o;

    // Pre-scan for --config so the file provides defaults that flags override.
    try {
        for (int i = 1; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg.rfind("--config=", 0) == 0) apply_config(o, read_config(arg.substr(9)));
            else if (arg == "--config" && i + 1 < argc) apply_config(o, read_config(argv[i + 1]));
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    CLI::App app{"American put front-fixing solver (sixth-order compact scheme)"};
    app.set_help_flag("--help", "print help");  // keep -h free: --h is the grid spacing
    app.require_subcommand(1);

    CLI::App* price = app.add_subcommand("price", "price and delta at given spots");
    CLI::App* conv = app.add_subcommand("convergence", "grid-refinement error ladder");
    CLI::App* bnd = app.add_subcommand("boundary", "exercise-boundary trajectory dump");
    CLI::App* timing = app.add_subcommand("timing", "adaptive vs fixed-step comparison");
    CLI::App* stencil = app.add_subcommand("stencil", "print a staggered boundary scheme");
    CLI::App* oracle = app.add_subcommand("oracle", "binomial-tree reference prices");

    for (CLI::App* cmd : {price, conv, bnd, timing, stencil, oracle}) add_common_flags(cmd, o);
    conv->add_option("--ladder", o.ladder, "spacing ladder, 2:1 ratios")->delimiter(',');
    timing->add_option("--rho-list", o.rho_list, "safety factors for bs32 runs")->delimiter(',');
    timing->add_option("--k-list", o.k_list, "fixed steps for ssprk3 runs")->delimiter(',');
    oracle->add_option("--steps", o.steps, "binomial steps");
    stencil->add_option("--family", o.family, "scheme family: a, b or c");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (price->parsed()) return cmd_price(o);
        if (conv->parsed()) return cmd_convergence(o);
        if (bnd->parsed()) return cmd_boundary(o);
        if (timing->parsed()) return cmd_timing(o);
        if (stencil->parsed()) return cmd_stencil(o);
        if (oracle->parsed()) return cmd_oracle(o);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    }
    return 0;
}
