#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "figlearn/adam.hpp"
#include "figlearn/eig.hpp"
#include "figlearn/errors.hpp"
#include "figlearn/filter.hpp"
#include "figlearn/graph.hpp"
#include "figlearn/matrix.hpp"
#include "figlearn/rng.hpp"

namespace figlearn {

/// A signal with gaps: values[i] is meaningful iff observed[i] != 0.
struct PartialSignal {
    std::vector<double> values;
    std::vector<std::uint8_t> observed;

    std::size_t observed_count() const {
        std::size_t c = 0;
        for (auto o : observed) c += o != 0;
        return c;
    }
};

struct InferenceConfig {
    int steps = 2000;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;

    void validate() const {
        if (steps <= 0 || !(learning_rate > 0.0))
            throw validation_error("InferenceConfig: steps and learning rate must be positive");
    }
};

struct InferenceResult {
    std::vector<double> completed;  // h(L) x
    std::vector<double> latent;     // x
    double fit_mse = 0.0;           // mean squared residual at observed indices
};

/// h(L) = U diag(h(lambda)) U^T, the filter as an N x N operator.
template <SpectralFilter F>
Matrix filter_matrix(const GraphLaplacian& lap, const F& filter) {
    const EigenDecomposition eig = sym_eig(lap.m);
    const std::vector<double> lam = zero_clamped_spectrum(eig.eigenvalues);
    return assemble_from_eigen(eig.eigenvectors, filter.eval(lam));
}

/// Recover the latent white signal x minimizing
///   sum_{i observed} ((H x)_i - y_i)^2
/// by Adam from a white-noise start, then return the completed signal H x.
/// The objective is a fixed quadratic, so the analytic gradient
/// 2 H^T mask (H x - y) is used directly.
inline InferenceResult infer_missing(const Matrix& h_of_l, const PartialSignal& y,
                                     const InferenceConfig& cfg) {
    cfg.validate();
    const std::size_t n = h_of_l.rows();
    if (h_of_l.cols() != n) throw validation_error("infer_missing: filter matrix must be square");
    if (y.values.size() != n || y.observed.size() != n)
        throw validation_error("infer_missing: signal length " + std::to_string(y.values.size()) +
                               " does not match filter size " + std::to_string(n));
    const std::size_t observed = y.observed_count();
    if (observed == 0)
        throw validation_error("infer_missing: signal has no observed entries");

    Rng rng(cfg.seed);
    std::vector<double> x(n);
    for (double& v : x) v = rng.normal();

    AdamState adam(n, cfg.learning_rate);
    std::vector<double> grad(n);
    for (int step = 0; step < cfg.steps; ++step) {
        const std::vector<double> hx = h_of_l * std::span<const double>(x);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!y.observed[i]) continue;
            const double r = hx[i] - y.values[i];
            for (std::size_t j = 0; j < n; ++j) grad[j] += 2.0 * r * h_of_l(i, j);
        }
        adam_step(adam, x, grad);
    }

    InferenceResult out;
    out.latent = x;
    out.completed = h_of_l * std::span<const double>(x);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (y.observed[i]) {
            const double r = out.completed[i] - y.values[i];
            sq += r * r;
        }
    out.fit_mse = sq / static_cast<double>(observed);
    return out;
}

template <SpectralFilter F>
InferenceResult infer_missing(const GraphLaplacian& lap, const F& filter, const PartialSignal& y,
                              const InferenceConfig& cfg) {
    return infer_missing(filter_matrix(lap, filter), y, cfg);
}

}  // namespace figlearn
