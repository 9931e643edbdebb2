#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "figlearn/eig.hpp"
#include "figlearn/errors.hpp"
#include "figlearn/filter.hpp"
#include "figlearn/graph.hpp"
#include "figlearn/matrix.hpp"
#include "figlearn/rng.hpp"

namespace figlearn {

/// Stochastic block model. Node v belongs to cluster v mod num_clusters,
/// which keeps cluster sizes balanced up to one node.
struct SbmSpec {
    std::size_t n = 0;
    std::size_t num_clusters = 2;
    double p_within = 0.3;
    double p_between = 0.1;
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 2) throw validation_error("SbmSpec: need at least 2 nodes");
        if (num_clusters < 1 || num_clusters > n)
            throw validation_error("SbmSpec: cluster count must lie in [1, n]");
        if (p_within < 0.0 || p_within > 1.0 || p_between < 0.0 || p_between > 1.0)
            throw validation_error("SbmSpec: probabilities must lie in [0, 1]");
    }
};

/// Independent Bernoulli edges in fixed pair-index order; seeded, so the
/// draw is bit-reproducible.
inline UpperTriWeights generate_sbm(const SbmSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    UpperTriWeights out{spec.n, std::vector<double>(num_edge_slots(spec.n))};
    std::size_t e = 0;
    for (std::size_t i = 0; i < spec.n; ++i) {
        for (std::size_t j = i + 1; j < spec.n; ++j, ++e) {
            const bool same = (i % spec.num_clusters) == (j % spec.num_clusters);
            out.w[e] = rng.bernoulli(same ? spec.p_within : spec.p_between) ? 1.0 : 0.0;
        }
    }
    return out;
}

/// M filtered white-noise signals, one per row: x = h(L) x0 with
/// x0 ~ N(0, Id). Near-zero eigenvalues are clamped to exact zero before
/// filtering so the normal filter sees the kernel (including the extra
/// kernel modes of a disconnected draw) as zeros, not rounding noise.
inline SignalMatrix generate_signals(const GraphLaplacian& lap, const ReferenceFilter& filter,
                                     std::size_t num_signals, std::uint64_t seed) {
    if (num_signals < 1) throw validation_error("generate_signals: need at least one signal");
    const std::size_t n = lap.m.rows();
    const EigenDecomposition eig = sym_eig(lap.m);
    const std::vector<double> lam = zero_clamped_spectrum(eig.eigenvalues);
    const Matrix h_of_l = assemble_from_eigen(eig.eigenvectors, filter.eval(lam));

    Rng rng(seed);
    SignalMatrix x(num_signals, n);
    std::vector<double> white(n);
    for (std::size_t r = 0; r < num_signals; ++r) {
        for (double& v : white) v = rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += h_of_l(i, j) * white[j];
            x(r, i) = s;
        }
    }
    return x;
}

/// Edge-recovery confusion counts over upper-triangle pairs; the positive
/// class is "edge present" (weight >= 0.5).
struct EdgeMetrics {
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double accuracy = 0.0;
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline EdgeMetrics edge_metrics(const UpperTriWeights& truth, const UpperTriWeights& learned) {
    if (truth.n != learned.n)
        throw validation_error("edge_metrics: node counts differ (" + std::to_string(truth.n) +
                               " vs " + std::to_string(learned.n) + ")");
    EdgeMetrics m;
    for (std::size_t e = 0; e < truth.w.size(); ++e) {
        const bool t = truth.w[e] >= 0.5;
        const bool p = learned.w[e] >= 0.5;
        if (t && p) ++m.tp;
        else if (!t && p) ++m.fp;
        else if (t && !p) ++m.fn;
        else ++m.tn;
    }
    const double total = static_cast<double>(truth.w.size());
    m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
    m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    m.accuracy = total > 0.0 ? static_cast<double>(m.tp + m.tn) / total : 0.0;
    return m;
}

}  // namespace figlearn
