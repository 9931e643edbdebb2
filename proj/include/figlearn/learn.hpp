#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "figlearn/adam.hpp"
#include "figlearn/eig.hpp"
#include "figlearn/errors.hpp"
#include "figlearn/filter.hpp"
#include "figlearn/graph.hpp"
#include "figlearn/loss.hpp"
#include "figlearn/matrix.hpp"
#include "figlearn/stats.hpp"

namespace figlearn {

/// Schedule and tolerances for the alternating optimization. Within each
/// round the filter phase runs first (on the current graph), then the graph
/// phase; a round ends with a fresh loss evaluation for the trace.
struct LearnConfig {
    int rounds = 50;
    int filter_steps = 200;
    int graph_steps = 200;
    double lr_filter = 1e-3;
    double lr_graph = 1e-2;
    double stop_rel_tol = 1e-6;
    double degenerate_eig_tol = 1e-8;
    std::uint64_t seed = 0;
    /// Complementing a graph (w -> 1 - w) preserves the Laplacian eigenbasis
    /// and reflects the spectrum (lambda -> n - lambda), so (G, h) and the
    /// complement with the reflected filter explain any covariance equally
    /// well. Joint fits resolve this tie toward the graph with at most half
    /// the possible edges; disable to keep whichever basin the run landed in.
    bool prefer_sparse = true;

    void validate() const {
        if (rounds <= 0 || filter_steps <= 0 || graph_steps <= 0)
            throw validation_error("LearnConfig: rounds and per-phase step counts must be positive");
        if (!(lr_filter > 0.0) || !(lr_graph > 0.0))
            throw validation_error("LearnConfig: learning rates must be positive");
        if (!(stop_rel_tol > 0.0) || !(degenerate_eig_tol > 0.0))
            throw validation_error("LearnConfig: tolerances must be positive");
    }
};

struct LearnedModel {
    EdgeLogits logits;
    FilterNetwork filter;
    /// Set when the filter was held fixed to a closed form during fitting;
    /// consumers should use it instead of `filter`.
    std::optional<ReferenceFilter> reference;
    /// loss_trace[0] is the loss at initialization, one entry per round after.
    std::vector<double> loss_trace;
    std::size_t n = 0;
    int rounds_run = 0;

    GraphLaplacian laplacian() const { return weights_to_laplacian(logits_to_weights(logits)); }
};

struct FitOptions {
    std::optional<GraphLaplacian> known_graph;
    std::optional<ReferenceFilter> known_filter;
    /// Overrides the seed-induced uniform [-0.5, 0.5] logit initialization.
    std::optional<EdgeLogits> initial_logits;
};

namespace detail {

/// Logits that sigmoid back to w exactly up to double rounding; binary
/// weights map to +/-40, deep enough into saturation that sigmoid(40)
/// rounds to 1.0.
inline std::vector<double> saturated_logits(const UpperTriWeights& wt) {
    std::vector<double> z(wt.w.size());
    const double lo = sigmoid(-40.0), hi = sigmoid(40.0);
    for (std::size_t e = 0; e < wt.w.size(); ++e) {
        const double w = std::min(std::max(wt.w[e], lo), hi);
        z[e] = std::log(w / (1.0 - w));
    }
    return z;
}

}  // namespace detail

/// Alternating minimization of J = ||C_sqrt - h(L(sigmoid(z)))||_F^2 over
/// the filter parameters and the edge logits. At most one of known_graph /
/// known_filter may be fixed; fixing one reduces the loop to the other
/// phase. Deterministic for a given config.
inline LearnedModel fit(const GaussianModel& target, std::size_t n, const LearnConfig& cfg,
                        const FitOptions& opts = {}) {
    cfg.validate();
    if (opts.known_graph && opts.known_filter)
        throw validation_error("fit: cannot fix both the graph and the filter");
    if (target.cov_sqrt.rows() != n || target.cov_sqrt.cols() != n)
        throw validation_error("fit: covariance size does not match node count");
    if (opts.known_graph && opts.known_graph->m.rows() != n)
        throw validation_error("fit: known graph size does not match node count");

    const Matrix& cov_sqrt = target.cov_sqrt;
    const std::size_t num_edges = num_edge_slots(n);

    // Independent sub-streams so that fixing one phase does not disturb the
    // other phase's initialization.
    SplitMix64 seed_stream(cfg.seed);
    const std::uint64_t logit_seed = seed_stream.next();
    const std::uint64_t net_seed = seed_stream.next();

    LearnedModel model;
    model.n = n;
    model.logits.n = n;
    if (opts.known_graph) {
        model.logits.z = detail::saturated_logits(laplacian_to_weights(*opts.known_graph));
    } else if (opts.initial_logits) {
        if (opts.initial_logits->n != n || opts.initial_logits->z.size() != num_edges)
            throw validation_error("fit: initial logits do not match node count");
        model.logits.z = opts.initial_logits->z;
    } else {
        Rng rng(logit_seed);
        model.logits.z.resize(num_edges);
        for (double& z : model.logits.z) z = rng.uniform(-0.5, 0.5);
    }
    model.filter = FilterNetwork::init(net_seed);
    model.reference = opts.known_filter;

    const auto current_laplacian = [&]() -> GraphLaplacian {
        if (opts.known_graph) return *opts.known_graph;
        return weights_to_laplacian(logits_to_weights(model.logits));
    };
    const auto current_loss = [&]() -> double {
        const GraphLaplacian lap = current_laplacian();
        return opts.known_filter ? loss(cov_sqrt, lap, *opts.known_filter)
                                 : loss(cov_sqrt, lap, model.filter);
    };

    std::vector<double> theta = model.filter.flatten();
    AdamState adam_filter(theta.size(), cfg.lr_filter);
    AdamState adam_graph(num_edges, cfg.lr_graph);

    double j_prev = current_loss();
    model.loss_trace.push_back(j_prev);

    const auto run_filter_phase = [&](AdamState& adam) {
        // L is fixed within the phase, so the eigenbasis and the diagonal
        // targets (U^T C_sqrt U)_kk are computed once.
        EigenDecomposition eig = sym_eig(current_laplacian().m);
        eig.eigenvalues = zero_clamped_spectrum(std::move(eig.eigenvalues));
        const Matrix c_tilde = conjugate_by_transpose(eig.eigenvectors, cov_sqrt);
        std::vector<double> targets(n);
        for (std::size_t k = 0; k < n; ++k) targets[k] = c_tilde(k, k);

        for (int step = 0; step < cfg.filter_steps; ++step) {
            const std::vector<double> hvals = model.filter.eval(eig.eigenvalues);
            std::vector<double> upstream(n);
            for (std::size_t k = 0; k < n; ++k) upstream[k] = -2.0 * (targets[k] - hvals[k]);
            const std::vector<double> grad =
                model.filter.backprop_params(eig.eigenvalues, upstream);
            adam_step(adam, theta, grad);
            model.filter.assign(theta);
        }
    };
    const auto run_graph_phase = [&](const auto& filter) {
        for (int step = 0; step < cfg.graph_steps; ++step) {
            const std::vector<double> gz =
                loss_grad_logits(cov_sqrt, model.logits, filter, cfg.degenerate_eig_tol);
            adam_step(adam_graph, model.logits.z, gz);
        }
    };

    const auto record_round = [&](double j, int round) {
        model.loss_trace.push_back(j);
        model.rounds_run = round;
        if (!std::isfinite(j))
            throw numerical_error("fit: loss became non-finite after round " +
                                  std::to_string(round));
    };

    int round = 1;
    for (; round <= cfg.rounds; ++round) {
        if (!opts.known_filter) run_filter_phase(adam_filter);
        if (!opts.known_graph) {
            if (opts.known_filter)
                run_graph_phase(*opts.known_filter);
            else
                run_graph_phase(model.filter);
        }
        const double j = current_loss();
        record_round(j, round);
        if (std::abs(j - j_prev) < cfg.stop_rel_tol * std::max(j_prev, 1e-300)) {
            ++round;
            break;
        }
        j_prev = j;
    }

    // Sparsity canonicalization for joint fits: if the learned graph has
    // more than half the possible edges, move to the complement basin
    // (z -> -z is exact) and refit the filter to the reflected spectrum.
    if (cfg.prefer_sparse && !opts.known_graph && !opts.known_filter) {
        const UpperTriWeights bin = binarize(logits_to_weights(model.logits), 0.5);
        std::size_t edges = 0;
        for (double w : bin.w) edges += w >= 0.5;
        if (2 * edges > num_edges) {
            for (double& z : model.logits.z) z = -z;
            AdamState adam_refit(theta.size(), cfg.lr_filter);
            j_prev = current_loss();
            for (int extra = 0; extra < cfg.rounds; ++extra, ++round) {
                run_filter_phase(adam_refit);
                const double j = current_loss();
                record_round(j, round);
                if (std::abs(j - j_prev) < cfg.stop_rel_tol * std::max(j_prev, 1e-300)) break;
                j_prev = j;
            }
        }
    }
    return model;
}

inline LearnedModel fit(const SignalMatrix& signals, const LearnConfig& cfg,
                        const FitOptions& opts = {}) {
    return fit(sample_stats(signals), signals.cols(), cfg, opts);
}

}  // namespace figlearn
