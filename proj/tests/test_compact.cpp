// SPDX-License-Identifier: MIT
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "frontfix/compact.hpp"

using namespace frontfix;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> sample_interior(const GridSpec& g, double (*f)(double)) {
    std::vector<double> v(g.interior_count());
    for (int i = 1; i < g.n_x; ++i) v[i - 1] = f(i * g.h());
    return v;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("constants are annihilated") {
    const GridSpec g(3.0, 60);
    const CompactSystem sys(g);
    const double c = 7.5;
    const std::vector<double> f(g.interior_count(), c);
    const std::vector<double> d2 = sys.second_derivative(f, {c, c});
    const double h = g.h();
    CHECK(max_abs(d2) <= 1e-11 * c / (h * h));
}

TEST_CASE("quadratics are differentiated exactly at every node") {
    for (const CompactVariant variant : {CompactVariant::b5, CompactVariant::b6}) {
        const GridSpec g(3.0, 48);
        const CompactSystem sys(g, variant);
        std::vector<double> f(g.interior_count());
        for (int i = 1; i < g.n_x; ++i) {
            const double x = i * g.h();
            f[i - 1] = 0.3 * x * x - 1.1 * x + 2.0;
        }
        const double left = 2.0;
        const double right = 0.3 * 9.0 - 1.1 * 3.0 + 2.0;
        for (double d2 : sys.second_derivative(f, {left, right}))
            CHECK_THAT(d2, WithinAbs(0.6, 1e-9));
    }
}

TEST_CASE("linears give zero second derivative") {
    const GridSpec g(3.0, 40);
    const CompactSystem sys(g);
    const std::vector<double> f = sample_interior(g, [](double x) { return x; });
    const std::vector<double> d2 = sys.second_derivative(f, {0.0, g.x_max});
    CHECK(max_abs(d2) <= 1e-9 / (g.h() * g.h()) * g.x_max);
}

TEST_CASE("boundary forcing hits only the four documented rows") {
    const GridSpec g(3.0, 30);  // h = 0.1
    const CompactSystem sys(g);
    const std::vector<double> f = sys.forcing({1.0, 0.0});
    CHECK_THAT(f[0], WithinRel(1200.0, 1e-12));
    CHECK_THAT(f[1], WithinRel(3.0 / (11.0 * 0.04), 1e-12));
    for (std::size_t i = 2; i < f.size(); ++i) CHECK(f[i] == 0.0);

    const std::vector<double> zero = sys.forcing({0.0, 0.0});
    CHECK(max_abs(zero) == 0.0);

    const std::vector<double> right = sys.forcing({0.0, 2.0});
    CHECK_THAT(right[f.size() - 1], WithinRel(2400.0, 1e-12));
    CHECK_THAT(right[f.size() - 2], WithinRel(6.0 / (11.0 * 0.04), 1e-12));
    CHECK(right[0] == 0.0);
}

TEST_CASE("operator is linear") {
    const GridSpec g(3.0, 36);
    const CompactSystem sys(g);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<double> f(g.interior_count()), gvec(g.interior_count());
    for (double& v : f) v = val(rng);
    for (double& v : gvec) v = val(rng);
    const BoundaryValues bf{val(rng), val(rng)}, bg{val(rng), val(rng)};
    const double a = 1.7, b = -0.6;

    std::vector<double> combo(g.interior_count());
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = a * f[i] + b * gvec[i];
    const std::vector<double> lhs =
        sys.second_derivative(combo, {a * bf.left + b * bg.left, a * bf.right + b * bg.right});
    const std::vector<double> df = sys.second_derivative(f, bf);
    const std::vector<double> dg = sys.second_derivative(gvec, bg);
    for (std::size_t i = 0; i < lhs.size(); ++i)
        CHECK_THAT(lhs[i], WithinAbs(a * df[i] + b * dg[i],
                                     1e-12 * (1.0 + std::abs(lhs[i])) / (g.h() * g.h())));
}

TEST_CASE("zero in, zero out") {
    const GridSpec g(3.0, 24);
    const CompactSystem sys(g);
    const std::vector<double> z(g.interior_count(), 0.0);
    CHECK(max_abs(sys.second_derivative(z, {0.0, 0.0})) == 0.0);
}

TEST_CASE("non-finite inputs are rejected") {
    const GridSpec g(3.0, 24);
    const CompactSystem sys(g);
    std::vector<double> f(g.interior_count(), 0.0);
    f[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(sys.second_derivative(f, {0.0, 0.0}), std::domain_error);
    f[3] = 0.0;
    CHECK_THROWS_AS(sys.second_derivative(f, {std::numeric_limits<double>::infinity(), 0.0}),
                    std::domain_error);
}

TEST_CASE("sixth-order convergence on sin") {
    // away from the one-sided rows the error shrinks ~2^6 per halving; the
    // node adjacent to the boundary is limited by the fifth-order row (~2^5),
    // and it also bounds the all-node maximum
    std::vector<double> deep_err, node1_err;
    for (const int n : {30, 60, 120}) {
        const GridSpec g(3.0, n);
        const CompactSystem sys(g);
        const std::vector<double> f = sample_interior(g, [](double x) { return std::sin(x); });
        const std::vector<double> d2 = sys.second_derivative(f, {0.0, std::sin(3.0)});
        double deep = 0.0;
        for (int i = 1; i < g.n_x; ++i) {
            const double x = i * g.h();
            if (x >= 1.0 && x <= 2.0) deep = std::max(deep, std::abs(d2[i - 1] + std::sin(x)));
        }
        deep_err.push_back(deep);
        node1_err.push_back(std::abs(d2[0] + std::sin(g.h())));
    }
    CHECK(deep_err[0] / deep_err[1] >= 45.0);  // ~2^6 (then the round-off floor)
    CHECK(node1_err[0] / node1_err[1] >= 30.0);
    CHECK(node1_err[1] / node1_err[2] >= 30.0);
}

TEST_CASE("exponential error drops by ~2^5 per halving") {
    // the all-node maximum sits at the fifth-order row next to the boundary
    std::vector<double> errs;
    for (const int n : {60, 120, 240}) {  // h = 0.05, 0.025, 0.0125
        const GridSpec g(3.0, n);
        const CompactSystem sys(g);
        const std::vector<double> f = sample_interior(g, [](double x) { return std::exp(-x); });
        const std::vector<double> d2 = sys.second_derivative(f, {1.0, std::exp(-3.0)});
        double e = 0.0;
        for (int i = 1; i < g.n_x; ++i)
            e = std::max(e, std::abs(d2[i - 1] - std::exp(-i * g.h())));
        errs.push_back(e);
    }
    CHECK(errs[0] / errs[1] >= 27.0);
    CHECK(errs[1] / errs[2] >= 27.0);
}

TEST_CASE("cubic polynomials are exact at every node") {
    const GridSpec g(3.0, 40);
    const CompactSystem sys(g);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    const double c0 = val(rng), c1 = val(rng), c2 = val(rng), c3 = val(rng);
    auto poly = [&](double x) { return c0 + c1 * x + c2 * x * x + c3 * x * x * x; };
    std::vector<double> f(g.interior_count());
    for (int i = 1; i < g.n_x; ++i) f[i - 1] = poly(i * g.h());
    const std::vector<double> d2 = sys.second_derivative(f, {poly(0.0), poly(3.0)});
    for (int i = 1; i < g.n_x; ++i) {
        const double want = 2.0 * c2 + 6.0 * c3 * i * g.h();
        CHECK_THAT(d2[i - 1], WithinAbs(want, 1e-9 * (1.0 + std::abs(want))));
    }
}

TEST_CASE("degree-7 polynomials are exact away from the boundary rows") {
    const GridSpec g(3.0, 60);
    const CompactSystem sys(g);
    auto poly = [](double x) { return std::pow(x, 7) - 2.0 * std::pow(x, 5) + x * x; };
    auto d2exact = [](double x) { return 42.0 * std::pow(x, 5) - 40.0 * x * x * x + 2.0; };
    std::vector<double> f(g.interior_count());
    for (int i = 1; i < g.n_x; ++i) f[i - 1] = poly(i * g.h());
    const std::vector<double> d2 = sys.second_derivative(f, {poly(0.0), poly(3.0)});
    double scale = 0.0;
    for (int i = 1; i < g.n_x; ++i) scale = std::max(scale, std::abs(d2exact(i * g.h())));
    for (int i = 3; i <= g.n_x - 3; ++i)
        CHECK_THAT(d2[i - 1], WithinAbs(d2exact(i * g.h()), 1e-8 * scale));
}

TEST_CASE("factorization is well behaved") {
    for (const CompactVariant variant : {CompactVariant::b5, CompactVariant::b6}) {
        const CompactSystem sys(GridSpec(3.0, 120), variant);
        CHECK(sys.pivot_growth() <= 10.0);
    }
}
