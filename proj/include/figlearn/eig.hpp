#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "figlearn/errors.hpp"
#include "figlearn/matrix.hpp"

namespace figlearn {

/// Eigenpairs of a symmetric matrix. Column k of `eigenvectors` pairs with
/// `eigenvalues[k]`; eigenvalues are ascending.
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
};

/// Squash the rounding noise around zero in a PSD spectrum to exact zeros.
/// Filters with a distinguished zero branch (h_normal) must see the
/// mathematical spectrum: a disconnected graph's second kernel eigenvalue
/// computes as +-1e-16, and 1/sqrt of that is garbage, not a filter value.
inline std::vector<double> zero_clamped_spectrum(std::vector<double> lam,
                                                 double rel_tol = 1e-9) {
    double max_abs_lam = 0.0;
    for (double v : lam) max_abs_lam = std::max(max_abs_lam, std::abs(v));
    const double tol = rel_tol * std::max(1.0, max_abs_lam);
    for (double& v : lam) v = std::abs(v) <= tol ? 0.0 : v;
    return lam;
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The sweep order is fixed (row-major over the upper triangle), so the
/// result is deterministic for a given input. Eigenvalues are sorted
/// ascending; ties keep their pre-sort column order. Each eigenvector is
/// sign-normalized so that its largest-magnitude component is nonnegative,
/// with the lowest index winning ties.
///
/// O(n^3) per sweep; random symmetric matrices settle in under ten sweeps.
/// Every graph in this library has at most a few hundred nodes, so dense
/// Jacobi is adequate and keeps the solver dependency-free.
inline EigenDecomposition sym_eig(const Matrix& a, std::size_t max_sweeps = 0) {
    require_symmetric(a, "sym_eig");
    const std::size_t n = a.rows();
    if (max_sweeps == 0) max_sweeps = 100 * std::max<std::size_t>(n, 1);

    Matrix w = symmetrize(a);  // exact symmetry so rotations stay consistent
    Matrix v = Matrix::identity(n);

    const double scale = std::max(1.0, frobenius_norm(w));
    const double off_tol = 1e-14 * scale;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) s += w(p, q) * w(p, q);
        return std::sqrt(2.0 * s);
    };

    bool converged = n < 2;
    std::size_t sweep = 0;
    for (; sweep < max_sweeps && !converged; ++sweep) {
        if (off_norm() <= off_tol) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = w(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double wkp = w(k, p), wkq = w(k, q);
                    w(k, p) = c * wkp - s * wkq;
                    w(k, q) = s * wkp + c * wkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double wpk = w(p, k), wqk = w(q, k);
                    w(p, k) = c * wpk - s * wqk;
                    w(q, k) = s * wpk + c * wqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged && off_norm() > off_tol)
        throw numerical_error("sym_eig: Jacobi iteration did not converge for " +
                              std::to_string(n) + "x" + std::to_string(n) + " matrix after " +
                              std::to_string(max_sweeps) + " sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return w(i, i) < w(j, j); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.eigenvalues[k] = w(src, src);

        std::size_t peak = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(v(i, src)) > std::abs(v(peak, src))) peak = i;
        const double sign = v(peak, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = sign * v(i, src);
    }
    return out;
}

}  // namespace figlearn
