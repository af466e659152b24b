// SPDX-License-Identifier: MIT
/// @file banded.hpp
/// @brief Banded LU factorization with partial pivoting and reusable solves.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace frontfix {

/// Square banded matrix with lower bandwidth `kl` and upper bandwidth `ku`.
/// Row i stores columns [i-kl, i+kl+ku]; the extra kl superdiagonals hold the
/// fill produced by partial pivoting.
class BandedMatrix {
public:
    BandedMatrix(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), width_(2 * kl + ku + 1), a_(static_cast<std::size_t>(n) * width_, 0.0) {
        if (n <= 0 || kl < 0 || ku < 0) throw std::invalid_argument("BandedMatrix: bad shape");
    }

    int size() const { return n_; }
    int lower_bandwidth() const { return kl_; }
    int upper_bandwidth() const { return ku_; }

    double& at(int i, int j) {
        if (i < 0 || i >= n_ || j < 0 || j >= n_ || j - i < -kl_ || j - i > kl_ + ku_)
            throw std::out_of_range("BandedMatrix::at outside band");
        return a_[static_cast<std::size_t>(i) * width_ + (j - i + kl_)];
    }
    double get(int i, int j) const {
        if (i < 0 || i >= n_ || j < 0 || j >= n_ || j - i < -kl_ || j - i > kl_ + ku_) return 0.0;
        return a_[static_cast<std::size_t>(i) * width_ + (j - i + kl_)];
    }

private:
    friend class BandedLU;
    int n_, kl_, ku_, width_;
    std::vector<double> a_;
};

/// LU factorization of a BandedMatrix, computed once and reused. Solves are
/// const and allocation-free, safe to call concurrently on one factorization.
class BandedLU {
public:
    explicit BandedLU(BandedMatrix m) : m_(std::move(m)), piv_(m_.n_) {
        factorize();
    }

    int size() const { return m_.n_; }

    /// Ratio of the largest magnitude in U to the largest magnitude in A;
    /// near 1 for diagonally dominant systems.
    double pivot_growth() const { return growth_; }

    /// Solve A x = b in place.
    void solve_in_place(std::span<double> b) const {
        const int n = m_.n_, kl = m_.kl_, ku = m_.ku_, w = m_.width_;
        if (static_cast<int>(b.size()) != n) throw std::invalid_argument("BandedLU::solve size");
        const double* a = m_.a_.data();
        for (int k = 0; k < n; ++k) {
            if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
            const int iend = std::min(k + kl, n - 1);
            for (int i = k + 1; i <= iend; ++i)
                b[i] -= a[static_cast<std::size_t>(i) * w + (k - i + kl)] * b[k];
        }
        for (int i = n - 1; i >= 0; --i) {
            const int jend = std::min(i + kl + ku, n - 1);
            double s = b[i];
            for (int j = i + 1; j <= jend; ++j)
                s -= a[static_cast<std::size_t>(i) * w + (j - i + kl)] * b[j];
            b[i] = s / a[static_cast<std::size_t>(i) * w + kl];
        }
    }

    std::vector<double> solve(std::vector<double> b) const {
        solve_in_place(b);
        return b;
    }

private:
    void factorize() {
        const int n = m_.n_, kl = m_.kl_, ku = m_.ku_, w = m_.width_;
        double* a = m_.a_.data();
        double amax = 0.0;
        for (double v : m_.a_) amax = std::max(amax, std::abs(v));

        auto entry = [&](int i, int j) -> double& {
            return a[static_cast<std::size_t>(i) * w + (j - i + kl)];
        };

        for (int k = 0; k < n; ++k) {
            const int iend = std::min(k + kl, n - 1);
            int p = k;
            for (int i = k + 1; i <= iend; ++i)
                if (std::abs(entry(i, k)) > std::abs(entry(p, k))) p = i;
            piv_[k] = p;
            if (p != k) {
                const int jend = std::min(k + kl + ku, n - 1);
                for (int j = k; j <= jend; ++j) std::swap(entry(k, j), entry(p, j));
            }
            const double pivot = entry(k, k);
            if (pivot == 0.0) throw std::runtime_error("BandedLU: singular matrix");
            const int jend = std::min(k + kl + ku, n - 1);
            for (int i = k + 1; i <= iend; ++i) {
                const double mult = entry(i, k) / pivot;
                entry(i, k) = mult;
                for (int j = k + 1; j <= jend; ++j) entry(i, j) -= mult * entry(k, j);
            }
        }
        double umax = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i; j <= std::min(i + kl + ku, n - 1); ++j)
                umax = std::max(umax, std::abs(a[static_cast<std::size_t>(i) * w + (j - i + kl)]));
        growth_ = amax > 0.0 ? umax / amax : 1.0;
    }

    BandedMatrix m_;
    std::vector<int> piv_;
    double growth_ = 1.0;
};

}  // namespace frontfix
