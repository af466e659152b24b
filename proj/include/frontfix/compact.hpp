// SPDX-License-Identifier: MIT
/**
 * @file compact.hpp
 * @brief Sixth-order compact second-derivative operator on the interior nodes.
 *
 * The operator solves B f'' = A f + forcing, where B is h-independent
 * (tridiagonal 2/11, 1, 2/11 with a one-sided near-boundary row at each end)
 * and A carries all 1/h^2 factors. Interior rows use the classical
 * sixth-order compact relation
 *
 *   (2/11) f''_{i-1} + f''_i + (2/11) f''_{i+1}
 *       = (12/11)(f_{i+1} - 2 f_i + f_{i-1})/h^2
 *       + (3/11) (f_{i+2} - 2 f_i + f_{i-2})/(4 h^2);
 *
 * rows 1 and n_x-1 use the fifth-order (or sixth-order) one-sided row with
 * right-hand side 12/h^2 (f_0 - 2 f_1 + f_2), mirrored at the far end.
 */

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "frontfix/banded.hpp"
#include "frontfix/stencil.hpp"

namespace frontfix {

/// Near-boundary row variant of the left-hand matrix.
enum class CompactVariant { b5, b6 };

/// Dirichlet values at x = 0 and x = x_max. The solver always passes
/// right = 0 (the option value vanishes at the truncation boundary).
struct BoundaryValues {
    double left = 0.0;
    double right = 0.0;
};

/// Assembled compact system: banded LU of B plus the right-hand operator.
/// Immutable after construction; concurrent second_derivative calls on one
/// shared instance are safe.
class CompactSystem {
public:
    CompactSystem(const GridSpec& grid, CompactVariant variant = CompactVariant::b5)
        : grid_(grid), variant_(variant), lu_(assemble_lhs(grid, variant)) {}

    const GridSpec& grid() const { return grid_; }
    CompactVariant variant() const { return variant_; }
    double pivot_growth() const { return lu_.pivot_growth(); }

    /// A f + forcing(bc): every 1/h^2 factor lives here.
    std::vector<double> apply_rhs(std::span<const double> f, const BoundaryValues& bc) const {
        std::vector<double> out(grid_.interior_count());
        apply_rhs_into(f, bc, out);
        return out;
    }

    void apply_rhs_into(std::span<const double> f, const BoundaryValues& bc,
                        std::vector<double>& out) const {
        const int n = grid_.interior_count();
        if (static_cast<int>(f.size()) != n)
            throw std::invalid_argument("CompactSystem: interior vector size mismatch");
        out.resize(n);
        const double h = grid_.h();
        const double inv_h2 = 1.0 / (h * h);
        const double c3 = 12.0 * inv_h2;
        const double ca = (12.0 / 11.0) * inv_h2;
        const double cb = (3.0 / 11.0) * inv_h2 / 4.0;

        auto fv = [&](int i) -> double {  // value at grid node i, 0..n_x
            if (i == 0) return bc.left;
            if (i == grid_.n_x) return bc.right;
            return f[i - 1];
        };
        out[0] = c3 * (bc.left - 2.0 * fv(1) + fv(2));
        for (int i = 2; i <= grid_.n_x - 2; ++i)
            out[i - 1] = ca * (fv(i + 1) - 2.0 * fv(i) + fv(i - 1)) +
                         cb * (fv(i + 2) - 2.0 * fv(i) + fv(i - 2));
        out[n - 1] = c3 * (bc.right - 2.0 * fv(grid_.n_x - 1) + fv(grid_.n_x - 2));
    }

    /// Boundary forcing alone: nonzero only at rows 1, 2, n_x-2, n_x-1.
    std::vector<double> forcing(const BoundaryValues& bc) const {
        const int n = grid_.interior_count();
        const double h = grid_.h();
        const double inv_h2 = 1.0 / (h * h);
        std::vector<double> out(n, 0.0);
        out[0] = 12.0 * inv_h2 * bc.left;
        out[1] = (3.0 / 11.0) * inv_h2 / 4.0 * bc.left;
        out[n - 1] = 12.0 * inv_h2 * bc.right;
        out[n - 2] = (3.0 / 11.0) * inv_h2 / 4.0 * bc.right;
        return out;
    }

    /// f'' on the interior nodes: solves B f'' = A f + forcing.
    std::vector<double> second_derivative(std::span<const double> f,
                                          const BoundaryValues& bc) const {
        for (double v : f)
            if (!std::isfinite(v)) throw std::domain_error("second_derivative: non-finite input");
        if (!std::isfinite(bc.left) || !std::isfinite(bc.right))
            throw std::domain_error("second_derivative: non-finite boundary value");
        std::vector<double> rhs = apply_rhs(f, bc);
        lu_.solve_in_place(rhs);
        return rhs;
    }

    /// Allocation-free variant for the stepping hot path. Inputs are not
    /// checked.
    void second_derivative_into(std::span<const double> f, const BoundaryValues& bc,
                                std::vector<double>& out) const {
        apply_rhs_into(f, bc, out);
        lu_.solve_in_place(out);
    }

private:
    static BandedMatrix assemble_lhs(const GridSpec& grid, CompactVariant variant) {
        const NearBoundaryRow row = near_boundary_row(
            variant == CompactVariant::b5 ? NearBoundaryOrder::fifth : NearBoundaryOrder::sixth);
        const int bw = static_cast<int>(row.lhs.size()) - 1;
        const int n = grid.interior_count();
        BandedMatrix m(n, bw, bw);
        for (int k = 0; k <= bw; ++k) {
            m.at(0, k) = row.lhs[k];
            m.at(n - 1, n - 1 - k) = row.lhs[k];
        }
        for (int i = 1; i < n - 1; ++i) {
            m.at(i, i - 1) = 2.0 / 11.0;
            m.at(i, i) = 1.0;
            m.at(i, i + 1) = 2.0 / 11.0;
        }
        return m;
    }

    GridSpec grid_;
    CompactVariant variant_;
    BandedLU lu_;
};

}  // namespace frontfix
