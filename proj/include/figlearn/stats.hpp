#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "figlearn/eig.hpp"
#include "figlearn/errors.hpp"
#include "figlearn/matrix.hpp"

namespace figlearn {

/// Gaussian estimated from observed signals: sample mean and the PSD square
/// root of the sample covariance. The square root (not the covariance) is
/// what the Wasserstein loss consumes, so that is what we keep.
struct GaussianModel {
    std::vector<double> mean;
    Matrix cov_sqrt;
};

/// U max(lambda, 0)^{1/2} U^T. Eigenvalues within -1e-8 * max(1, lambda_max)
/// of zero are clamped to zero; anything below that floor is rejected.
/// Rank-deficient sample covariances (M < N) land in the clamp path.
inline Matrix psd_sqrt(const Matrix& a) {
    require_symmetric(a, "psd_sqrt");
    const EigenDecomposition eig = sym_eig(a);
    const double lambda_max = eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.back();
    const double floor = -1e-8 * std::max(1.0, lambda_max);

    std::vector<double> roots(eig.eigenvalues.size());
    for (std::size_t k = 0; k < roots.size(); ++k) {
        const double lam = eig.eigenvalues[k];
        if (lam < floor)
            throw validation_error("psd_sqrt: matrix not PSD (eigenvalue " + std::to_string(lam) +
                                   " below tolerance floor " + std::to_string(floor) + ")");
        roots[k] = lam > 0.0 ? std::sqrt(lam) : 0.0;
    }
    return symmetrize(assemble_from_eigen(eig.eigenvectors, roots));
}

namespace detail {

/// Sum in ascending value order. The addends of a column (or of a
/// covariance entry) form the same multiset under any row permutation, so
/// summing them in a canonical order makes the estimate bit-identical
/// across permutations.
inline double ordered_sum(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

}  // namespace detail

/// Sample mean and covariance square root of a signal matrix (rows are
/// observations). The covariance divisor is M, matching the zero-mean
/// generative model rather than the unbiased M-1 estimator. Invariant under
/// row permutation, exactly.
inline GaussianModel sample_stats(const SignalMatrix& x) {
    const std::size_t m = x.rows();
    const std::size_t n = x.cols();
    if (m < 2) throw validation_error("sample_stats: need at least 2 observations, got " +
                                      std::to_string(m));
    for (double v : x.data())
        if (!std::isfinite(v))
            throw validation_error("sample_stats: input contains a non-finite entry; "
                                   "missing values are only handled by signal inference");

    GaussianModel out;
    out.mean.assign(n, 0.0);
    std::vector<double> terms(m);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t r = 0; r < m; ++r) terms[r] = x(r, c);
        out.mean[c] = detail::ordered_sum(terms) / static_cast<double>(m);
    }

    Matrix cov(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            for (std::size_t r = 0; r < m; ++r)
                terms[r] = (x(r, i) - out.mean[i]) * (x(r, j) - out.mean[j]);
            const double v = detail::ordered_sum(terms) / static_cast<double>(m);
            cov(i, j) = v;
            cov(j, i) = v;
        }
    }

    out.cov_sqrt = psd_sqrt(cov);
    return out;
}

inline double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace figlearn
