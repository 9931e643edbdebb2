#pragma once

// Test-only oracles, deliberately independent of the library's
// eigendecomposition path: central finite differences, a Taylor
// scaling-and-squaring matrix exponential, and a Denman-Beavers matrix
// square root (both built on Gauss-Jordan inversion, no spectral code).

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "figlearn/matrix.hpp"

namespace oracles {

using figlearn::Matrix;

/// Central finite-difference gradient of f at x.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double step = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + step;
        const double fp = f(x);
        x[i] = orig - step;
        const double fm = f(x);
        x[i] = orig;
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

inline double fd_directional(const std::function<double(double)>& f_of_eps, double step = 1e-5) {
    return (f_of_eps(step) - f_of_eps(-step)) / (2.0 * step);
}

/// Relative error between an analytic and a finite-difference gradient,
/// vector-level: ||a - b|| / max(||b||, floor).
inline double gradient_rel_error(const std::vector<double>& analytic,
                                 const std::vector<double>& fd) {
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        diff += (analytic[i] - fd[i]) * (analytic[i] - fd[i]);
        ref += fd[i] * fd[i];
    }
    return std::sqrt(diff) / std::max(std::sqrt(ref), 1e-12);
}

/// Entrywise relative error with an absolute floor to keep finite-difference
/// noise on near-zero entries from dominating.
inline double gradient_max_rel_error(const std::vector<double>& analytic,
                                     const std::vector<double>& fd, double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double denom = std::max({std::abs(analytic[i]), std::abs(fd[i]), floor});
        worst = std::max(worst, std::abs(analytic[i] - fd[i]) / denom);
    }
    return worst;
}

/// Gauss-Jordan inversion with partial pivoting.
inline Matrix gj_inverse(Matrix a) {
    const std::size_t n = a.rows();
    Matrix inv = Matrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (std::abs(a(pivot, col)) < 1e-14)
            throw std::runtime_error("gj_inverse: singular matrix");
        if (pivot != col)
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a(pivot, c), a(col, c));
                std::swap(inv(pivot, c), inv(col, c));
            }
        const double d = a(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a(col, c) /= d;
            inv(col, c) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double factor = a(r, col);
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) -= factor * a(col, c);
                inv(r, c) -= factor * inv(col, c);
            }
        }
    }
    return inv;
}

/// exp(A) by Taylor series with scaling and squaring.
inline Matrix expm_taylor(const Matrix& a) {
    const std::size_t n = a.rows();
    int squarings = 0;
    double norm = figlearn::max_abs(a) * static_cast<double>(n);
    while (norm > 0.5 && squarings < 40) {
        norm *= 0.5;
        ++squarings;
    }
    const double scale = std::ldexp(1.0, -squarings);
    const Matrix as = scale * a;

    Matrix result = Matrix::identity(n);
    Matrix term = Matrix::identity(n);
    for (int k = 1; k <= 30; ++k) {
        term = (1.0 / k) * (term * as);
        result = result + term;
        if (figlearn::max_abs(term) < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

/// Principal square root of an SPD matrix by the Denman-Beavers iteration.
inline Matrix denman_beavers_sqrt(const Matrix& a, int max_iters = 60) {
    Matrix y = a;
    Matrix z = Matrix::identity(a.rows());
    for (int it = 0; it < max_iters; ++it) {
        const Matrix y_next = 0.5 * (y + gj_inverse(z));
        const Matrix z_next = 0.5 * (z + gj_inverse(y));
        const double delta = figlearn::frobenius_norm(y_next - y);
        y = y_next;
        z = z_next;
        if (delta < 1e-13 * std::max(1.0, figlearn::frobenius_norm(y))) break;
    }
    return y;
}

}  // namespace oracles
