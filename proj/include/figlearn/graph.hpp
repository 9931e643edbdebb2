#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "figlearn/errors.hpp"
#include "figlearn/matrix.hpp"

namespace figlearn {

inline std::size_t num_edge_slots(std::size_t n) { return n * (n - 1) / 2; }

/// Flat index of the unordered pair (i, j), i < j, in the row-major upper
/// triangle: e = i*n - i*(i+1)/2 + (j - i - 1). This convention is shared by
/// the edge-list file format and the saved-model z vector; changing it would
/// silently scramble every serialized artifact.
inline std::size_t edge_index(std::size_t i, std::size_t j, std::size_t n) {
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

/// Unconstrained logits, one per node pair. sigmoid(z) are the edge weights.
struct EdgeLogits {
    std::size_t n = 0;
    std::vector<double> z;
};

/// Relaxed edge weights in [0, 1], upper triangle only.
struct UpperTriWeights {
    std::size_t n = 0;
    std::vector<double> w;
};

/// Combinatorial graph Laplacian L = D - W. Constructed only through
/// weights_to_laplacian, which guarantees membership in the constraint set
/// (symmetric, nonpositive off-diagonals, zero row sums).
struct GraphLaplacian {
    Matrix m;
};

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline UpperTriWeights logits_to_weights(const EdgeLogits& logits) {
    if (logits.z.size() != num_edge_slots(logits.n))
        throw validation_error("logits_to_weights: logit vector has " +
                               std::to_string(logits.z.size()) + " entries, expected " +
                               std::to_string(num_edge_slots(logits.n)));
    UpperTriWeights out{logits.n, std::vector<double>(logits.z.size())};
    for (std::size_t e = 0; e < logits.z.size(); ++e) out.w[e] = sigmoid(logits.z[e]);
    return out;
}

inline GraphLaplacian weights_to_laplacian(const UpperTriWeights& wt) {
    const std::size_t n = wt.n;
    if (wt.w.size() != num_edge_slots(n))
        throw validation_error("weights_to_laplacian: weight vector has " +
                               std::to_string(wt.w.size()) + " entries, expected " +
                               std::to_string(num_edge_slots(n)));
    Matrix l(n, n);
    std::size_t e = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j, ++e) {
            const double w = wt.w[e];
            l(i, j) = -w;
            l(j, i) = -w;
            l(i, i) += w;
            l(j, j) += w;
        }
    }
    return GraphLaplacian{std::move(l)};
}

/// Adjoint of weights_to_laplacian: given G = dJ/dL, the derivative with
/// respect to edge weight (i,j) is G_ii + G_jj - G_ij - G_ji.
inline std::vector<double> laplacian_grad_to_weight_grad(const Matrix& g, std::size_t n) {
    if (g.rows() != n || g.cols() != n)
        throw validation_error("laplacian_grad_to_weight_grad: gradient is " +
                               std::to_string(g.rows()) + "x" + std::to_string(g.cols()) +
                               ", expected " + std::to_string(n) + "x" + std::to_string(n));
    std::vector<double> gw(num_edge_slots(n));
    std::size_t e = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j, ++e)
            gw[e] = g(i, i) + g(j, j) - g(i, j) - g(j, i);
    return gw;
}

/// Chain rule through the sigmoid: gz_e = gw_e * w_e * (1 - w_e).
inline std::vector<double> weight_grad_to_logit_grad(std::span<const double> gw,
                                                     const UpperTriWeights& wt) {
    if (gw.size() != wt.w.size())
        throw validation_error("weight_grad_to_logit_grad: length mismatch");
    std::vector<double> gz(gw.size());
    for (std::size_t e = 0; e < gw.size(); ++e) gz[e] = gw[e] * wt.w[e] * (1.0 - wt.w[e]);
    return gz;
}

/// Threshold to a binary edge set; w >= threshold becomes an edge.
inline UpperTriWeights binarize(const UpperTriWeights& wt, double threshold = 0.5) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw validation_error("binarize: threshold must lie in (0, 1)");
    UpperTriWeights out{wt.n, std::vector<double>(wt.w.size())};
    for (std::size_t e = 0; e < wt.w.size(); ++e) out.w[e] = wt.w[e] >= threshold ? 1.0 : 0.0;
    return out;
}

/// Off-diagonals of a valid Laplacian, negated, as upper-tri weights.
inline UpperTriWeights laplacian_to_weights(const GraphLaplacian& lap) {
    const std::size_t n = lap.m.rows();
    UpperTriWeights out{n, std::vector<double>(num_edge_slots(n))};
    std::size_t e = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j, ++e) out.w[e] = -lap.m(i, j);
    return out;
}

/// Membership check for the valid-Laplacian constraint set.
inline void validate_laplacian(const Matrix& l) {
    require_symmetric(l, "validate_laplacian");
    const std::size_t n = l.rows();
    const double off_tol = 1e-12 * std::max(1.0, max_abs(l));
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row_sum += l(i, j);
            if (i != j && l(i, j) > off_tol)
                throw validation_error("validate_laplacian: positive off-diagonal at (" +
                                       std::to_string(i) + "," + std::to_string(j) + ")");
        }
        if (std::abs(row_sum) > 1e-10 * static_cast<double>(n))
            throw validation_error("validate_laplacian: row " + std::to_string(i) +
                                   " sums to " + std::to_string(row_sum));
    }
}

}  // namespace figlearn
