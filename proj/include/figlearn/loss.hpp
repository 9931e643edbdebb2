#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "figlearn/eig.hpp"
#include "figlearn/errors.hpp"
#include "figlearn/filter.hpp"
#include "figlearn/graph.hpp"
#include "figlearn/matrix.hpp"

namespace figlearn {

/// J = || C_sqrt - U diag(hvals) U^T ||_F^2, evaluated in the eigenbasis
/// where the filtered term is diagonal (the Frobenius norm is invariant
/// under the orthogonal change of basis).
inline double loss_from_eig(const Matrix& cov_sqrt, const EigenDecomposition& eig,
                            std::span<const double> hvals) {
    const Matrix c_tilde = conjugate_by_transpose(eig.eigenvectors, cov_sqrt);
    double j = 0.0;
    const std::size_t n = c_tilde.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const double r = c_tilde(i, k) - (i == k ? hvals[i] : 0.0);
            j += r * r;
        }
    return j;
}

/// Covariance term of the 2-Wasserstein distance between the estimated
/// signal Gaussian and the filtered-white-noise model:
/// J(L, h) = || C_sqrt - h(L) ||_F^2.
template <SpectralFilter F>
double loss(const Matrix& cov_sqrt, const GraphLaplacian& lap, const F& filter) {
    if (cov_sqrt.rows() != lap.m.rows())
        throw validation_error("loss: covariance and Laplacian sizes differ");
    EigenDecomposition eig = sym_eig(lap.m);
    eig.eigenvalues = zero_clamped_spectrum(std::move(eig.eigenvalues));
    const std::vector<double> hvals = filter.eval(eig.eigenvalues);
    return loss_from_eig(cov_sqrt, eig, hvals);
}

/// dJ/dh(lambda_k) = -2 u_k^T (C_sqrt - h(L)) u_k = -2 ((U^T C_sqrt U)_kk - h_k).
/// This is the upstream vector fed into the filter network's backprop.
inline std::vector<double> loss_grad_filter(const Matrix& cov_sqrt,
                                            const EigenDecomposition& eig,
                                            std::span<const double> hvals) {
    const std::size_t n = eig.eigenvalues.size();
    std::vector<double> upstream(n);
    for (std::size_t k = 0; k < n; ++k) {
        double diag = 0.0;  // u_k^T C_sqrt u_k
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += cov_sqrt(i, j) * eig.eigenvectors(j, k);
            diag += eig.eigenvectors(i, k) * row;
        }
        upstream[k] = -2.0 * (diag - hvals[k]);
    }
    return upstream;
}

/// Adjoint of the Frechet derivative of the matrix function h(L) by the
/// Daleckii-Krein formula:
///
///   dJ/dL = U ( Gamma o (U^T G_h U) ) U^T,
///   Gamma_kl = (h(lambda_k) - h(lambda_l)) / (lambda_k - lambda_l)
///
/// with the divided difference replaced by h'((lambda_k + lambda_l)/2)
/// whenever |lambda_k - lambda_l| <= tau * max(1, |lambda_max|). Only
/// divided differences of h appear, so degenerate eigenvalues cause no
/// blowup; the tau rule is the continuous limit of the off-diagonal term.
inline Matrix matrix_function_grad(const EigenDecomposition& eig, std::span<const double> hvals,
                                   std::span<const double> hderivs, const Matrix& g_h,
                                   double tau = 1e-8) {
    const std::size_t n = eig.eigenvalues.size();
    if (g_h.rows() != n || g_h.cols() != n)
        throw validation_error("matrix_function_grad: G_h shape mismatch");

    double lam_abs_max = 0.0;
    for (double lam : eig.eigenvalues) lam_abs_max = std::max(lam_abs_max, std::abs(lam));
    const double gap_tol = tau * std::max(1.0, lam_abs_max);

    Matrix m = conjugate_by_transpose(eig.eigenvectors, g_h);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            const double gap = eig.eigenvalues[k] - eig.eigenvalues[l];
            double gamma;
            if (std::abs(gap) > gap_tol) {
                gamma = (hvals[k] - hvals[l]) / gap;
            } else {
                // Degenerate pair: h' at the midpoint, realized as the mean of
                // the endpoint derivatives (equal when the pair is an exact tie).
                gamma = 0.5 * (hderivs[k] + hderivs[l]);
            }
            m(k, l) *= gamma;
        }
    }
    return symmetrize(conjugate(eig.eigenvectors, m));
}

/// Full chain dJ/dz: eigendecompose L(sigmoid(z)), build G_h = -2(C_sqrt - h(L)),
/// pull it back through the matrix function, the Laplacian operator, and the
/// sigmoid reparameterization.
template <SpectralFilter F>
std::vector<double> loss_grad_logits(const Matrix& cov_sqrt, const EdgeLogits& logits,
                                     const F& filter, double tau = 1e-8) {
    const UpperTriWeights w = logits_to_weights(logits);
    const GraphLaplacian lap = weights_to_laplacian(w);
    EigenDecomposition eig = sym_eig(lap.m);
    eig.eigenvalues = zero_clamped_spectrum(std::move(eig.eigenvalues));
    const std::vector<double> hvals = filter.eval(eig.eigenvalues);
    const std::vector<double> hderivs = filter.derivative(eig.eigenvalues);

    const Matrix h_of_l = assemble_from_eigen(eig.eigenvectors, hvals);
    const Matrix g_h = -2.0 * (cov_sqrt - h_of_l);
    const Matrix dj_dl = matrix_function_grad(eig, hvals, hderivs, g_h, tau);
    const std::vector<double> gw = laplacian_grad_to_weight_grad(dj_dl, logits.n);
    return weight_grad_to_logit_grad(gw, w);
}

}  // namespace figlearn
