#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "figlearn/errors.hpp"
#include "figlearn/matrix.hpp"
#include "figlearn/rng.hpp"

namespace figlearn {

/// Overflow-safe ln(1 + e^x).
inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double softplus_derivative(double x) {  // = sigmoid(x)
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// Scalar-to-scalar feed-forward network with a softplus output head:
/// h(x) = softplus(f(x)). Evaluated elementwise on eigenvalues, so the
/// filter it represents is h(L) = U diag(h(lambda)) U^T.
///
/// Hidden activation is tanh: the graph-step gradient needs h'(lambda) to
/// exist everywhere, which rules out kinked activations that could sit
/// exactly on an eigenvalue. Default architecture is 5 hidden layers of 30.
class FilterNetwork {
public:
    FilterNetwork() = default;

    static std::vector<std::size_t> default_layer_sizes() { return {1, 30, 30, 30, 30, 30, 1}; }

    /// Weights uniform in [-a, a] with a = sqrt(6/(fan_in+fan_out)), biases
    /// zero. Draw order is fixed (layer by layer, row-major), so a seed
    /// pins the network exactly.
    static FilterNetwork init(std::uint64_t seed,
                              std::vector<std::size_t> layer_sizes = default_layer_sizes()) {
        if (layer_sizes.size() < 2 || layer_sizes.front() != 1 || layer_sizes.back() != 1)
            throw validation_error("FilterNetwork: layer sizes must run scalar-to-scalar");
        FilterNetwork net;
        net.layer_sizes_ = std::move(layer_sizes);
        Rng rng(seed);
        for (std::size_t l = 0; l + 1 < net.layer_sizes_.size(); ++l) {
            const std::size_t fan_in = net.layer_sizes_[l];
            const std::size_t fan_out = net.layer_sizes_[l + 1];
            const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            Matrix w(fan_out, fan_in);
            for (double& v : w.data()) v = rng.uniform(-a, a);
            net.weights_.push_back(std::move(w));
            net.biases_.emplace_back(fan_out, 0.0);
        }
        return net;
    }

    const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }
    const std::vector<Matrix>& weights() const { return weights_; }
    const std::vector<std::vector<double>>& biases() const { return biases_; }

    std::size_t param_count() const {
        std::size_t count = 0;
        for (std::size_t l = 0; l < weights_.size(); ++l)
            count += weights_[l].data().size() + biases_[l].size();
        return count;
    }

    /// Parameters as one flat vector (per layer: weights row-major, then bias).
    std::vector<double> flatten() const {
        std::vector<double> flat;
        flat.reserve(param_count());
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            flat.insert(flat.end(), weights_[l].data().begin(), weights_[l].data().end());
            flat.insert(flat.end(), biases_[l].begin(), biases_[l].end());
        }
        return flat;
    }

    void assign(std::span<const double> flat) {
        if (flat.size() != param_count())
            throw validation_error("FilterNetwork::assign: flat vector has " +
                                   std::to_string(flat.size()) + " entries, expected " +
                                   std::to_string(param_count()));
        std::size_t pos = 0;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            for (double& v : weights_[l].data()) v = flat[pos++];
            for (double& v : biases_[l]) v = flat[pos++];
        }
    }

    /// Raw network output f(x), before the softplus head.
    double raw(double x) const {
        std::vector<double> act{x};
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            std::vector<double> next(biases_[l]);
            const Matrix& w = weights_[l];
            for (std::size_t r = 0; r < w.rows(); ++r)
                for (std::size_t c = 0; c < w.cols(); ++c) next[r] += w(r, c) * act[c];
            if (l + 1 < weights_.size())
                for (double& v : next) v = std::tanh(v);
            act = std::move(next);
        }
        return act[0];
    }

    double eval(double x) const { return softplus(raw(x)); }

    std::vector<double> eval(std::span<const double> xs) const {
        std::vector<double> out(xs.size());
        for (std::size_t k = 0; k < xs.size(); ++k) out[k] = eval(xs[k]);
        return out;
    }

    /// dh/dx at each input, via forward-mode through the scalar chain.
    std::vector<double> derivative(std::span<const double> xs) const {
        std::vector<double> out(xs.size());
        for (std::size_t k = 0; k < xs.size(); ++k) {
            std::vector<double> act{xs[k]};
            std::vector<double> dact{1.0};
            for (std::size_t l = 0; l < weights_.size(); ++l) {
                const Matrix& w = weights_[l];
                std::vector<double> next(biases_[l]);
                std::vector<double> dnext(w.rows(), 0.0);
                for (std::size_t r = 0; r < w.rows(); ++r)
                    for (std::size_t c = 0; c < w.cols(); ++c) {
                        next[r] += w(r, c) * act[c];
                        dnext[r] += w(r, c) * dact[c];
                    }
                if (l + 1 < weights_.size()) {
                    for (std::size_t r = 0; r < next.size(); ++r) {
                        const double t = std::tanh(next[r]);
                        next[r] = t;
                        dnext[r] *= 1.0 - t * t;
                    }
                }
                act = std::move(next);
                dact = std::move(dnext);
            }
            out[k] = softplus_derivative(act[0]) * dact[0];
        }
        return out;
    }

    /// Gradient of sum_k upstream[k] * h(xs[k]) with respect to every weight
    /// and bias, flattened in the same order as flatten().
    std::vector<double> backprop_params(std::span<const double> xs,
                                        std::span<const double> upstream) const {
        if (xs.size() != upstream.size())
            throw validation_error("backprop_params: upstream length mismatch");
        std::vector<Matrix> gw;
        std::vector<std::vector<double>> gb;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            gw.emplace_back(weights_[l].rows(), weights_[l].cols());
            gb.emplace_back(biases_[l].size(), 0.0);
        }

        const std::size_t depth = weights_.size();
        std::vector<std::vector<double>> act(depth + 1);
        for (std::size_t k = 0; k < xs.size(); ++k) {
            act[0] = {xs[k]};
            for (std::size_t l = 0; l < depth; ++l) {
                const Matrix& w = weights_[l];
                std::vector<double> next(biases_[l]);
                for (std::size_t r = 0; r < w.rows(); ++r)
                    for (std::size_t c = 0; c < w.cols(); ++c) next[r] += w(r, c) * act[l][c];
                if (l + 1 < depth)
                    for (double& v : next) v = std::tanh(v);
                act[l + 1] = std::move(next);
            }

            // Seed with d(upstream_k * h)/df = upstream_k * sigmoid(f).
            std::vector<double> delta{upstream[k] * softplus_derivative(act[depth][0])};
            for (std::size_t l = depth; l-- > 0;) {
                const Matrix& w = weights_[l];
                for (std::size_t r = 0; r < w.rows(); ++r) {
                    gb[l][r] += delta[r];
                    for (std::size_t c = 0; c < w.cols(); ++c)
                        gw[l](r, c) += delta[r] * act[l][c];
                }
                if (l == 0) break;
                std::vector<double> prev(w.cols(), 0.0);
                for (std::size_t r = 0; r < w.rows(); ++r)
                    for (std::size_t c = 0; c < w.cols(); ++c) prev[c] += w(r, c) * delta[r];
                // act[l] holds tanh outputs of layer l's pre-activation
                for (std::size_t c = 0; c < prev.size(); ++c)
                    prev[c] *= 1.0 - act[l][c] * act[l][c];
                delta = std::move(prev);
            }
        }

        std::vector<double> flat;
        flat.reserve(param_count());
        for (std::size_t l = 0; l < depth; ++l) {
            flat.insert(flat.end(), gw[l].data().begin(), gw[l].data().end());
            flat.insert(flat.end(), gb[l].begin(), gb[l].end());
        }
        return flat;
    }

    /// Direct construction from stored weights (model files).
    static FilterNetwork from_parts(std::vector<std::size_t> layer_sizes,
                                    std::vector<Matrix> weights,
                                    std::vector<std::vector<double>> biases) {
        FilterNetwork net;
        net.layer_sizes_ = std::move(layer_sizes);
        net.weights_ = std::move(weights);
        net.biases_ = std::move(biases);
        if (net.weights_.size() + 1 != net.layer_sizes_.size() ||
            net.biases_.size() != net.weights_.size())
            throw validation_error("FilterNetwork::from_parts: inconsistent layer structure");
        for (std::size_t l = 0; l < net.weights_.size(); ++l) {
            if (net.weights_[l].rows() != net.layer_sizes_[l + 1] ||
                net.weights_[l].cols() != net.layer_sizes_[l] ||
                net.biases_[l].size() != net.layer_sizes_[l + 1])
                throw validation_error("FilterNetwork::from_parts: layer " + std::to_string(l) +
                                       " shape does not match layer sizes");
        }
        return net;
    }

private:
    std::vector<std::size_t> layer_sizes_;
    std::vector<Matrix> weights_;
    std::vector<std::vector<double>> biases_;
};

enum class FilterKind { heat, normal, highpass };

/// Closed-form generating filters used by the synthetic benchmarks:
///   heat(x)     = exp(-s x)
///   normal(x)   = 1/sqrt(x) for x > 0, 0 at x = 0
///   highpass(x) = s x / (1 + s x)
struct ReferenceFilter {
    FilterKind kind = FilterKind::heat;
    double param = 0.1;

    static ReferenceFilter heat(double s = 0.1) { return {FilterKind::heat, s}; }
    static ReferenceFilter normal() { return {FilterKind::normal, 0.0}; }
    static ReferenceFilter highpass(double s = 0.1) { return {FilterKind::highpass, s}; }

    double eval(double x) const {
        switch (kind) {
            case FilterKind::heat:
                return std::exp(-param * x);
            case FilterKind::normal:
                if (x < 0.0)
                    throw validation_error("h_normal: negative input " + std::to_string(x));
                return x > 0.0 ? 1.0 / std::sqrt(x) : 0.0;
            case FilterKind::highpass:
                return param * x / (1.0 + param * x);
        }
        return 0.0;
    }

    /// h'(x). For the normal filter the x = 0 branch is the constant 0, so
    /// its derivative there is taken as 0.
    double derivative(double x) const {
        switch (kind) {
            case FilterKind::heat:
                return -param * std::exp(-param * x);
            case FilterKind::normal:
                if (x < 0.0)
                    throw validation_error("h_normal: negative input " + std::to_string(x));
                return x > 0.0 ? -0.5 / (x * std::sqrt(x)) : 0.0;
            case FilterKind::highpass: {
                const double d = 1.0 + param * x;
                return param / (d * d);
            }
        }
        return 0.0;
    }

    std::vector<double> eval(std::span<const double> xs) const {
        std::vector<double> out(xs.size());
        for (std::size_t k = 0; k < xs.size(); ++k) out[k] = eval(xs[k]);
        return out;
    }

    std::vector<double> derivative(std::span<const double> xs) const {
        std::vector<double> out(xs.size());
        for (std::size_t k = 0; k < xs.size(); ++k) out[k] = derivative(xs[k]);
        return out;
    }

    std::string spec_string() const {
        auto fmt = [](double v) {
            std::string s = std::to_string(v);
            while (s.size() > 1 && s.back() == '0') s.pop_back();
            if (!s.empty() && s.back() == '.') s.pop_back();
            return s;
        };
        switch (kind) {
            case FilterKind::heat:
                return "heat:" + fmt(param);
            case FilterKind::normal:
                return "normal";
            case FilterKind::highpass:
                return "highpass:" + fmt(param);
        }
        return "";
    }
};

/// Parse "heat:0.1" | "normal" | "highpass:0.1". The scale suffix is
/// optional for heat/highpass (default 0.1) and rejected for normal.
inline ReferenceFilter parse_filter_spec(const std::string& spec) {
    std::string kind = spec;
    std::string param_str;
    if (auto colon = spec.find(':'); colon != std::string::npos) {
        kind = spec.substr(0, colon);
        param_str = spec.substr(colon + 1);
    }
    double param = 0.1;
    if (!param_str.empty()) {
        try {
            std::size_t used = 0;
            param = std::stod(param_str, &used);
            if (used != param_str.size()) throw std::invalid_argument(param_str);
        } catch (const std::exception&) {
            throw validation_error("filter spec '" + spec + "': bad parameter '" + param_str + "'");
        }
        if (!(param > 0.0))
            throw validation_error("filter spec '" + spec + "': parameter must be positive");
    }
    if (kind == "heat") return ReferenceFilter::heat(param);
    if (kind == "highpass") return ReferenceFilter::highpass(param);
    if (kind == "normal") {
        if (!param_str.empty())
            throw validation_error("filter spec '" + spec + "': normal takes no parameter");
        return ReferenceFilter::normal();
    }
    throw validation_error("filter spec '" + spec + "': unknown kind '" + kind +
                           "' (expected heat, normal, or highpass)");
}

/// Anything that can be evaluated elementwise on a spectrum and
/// differentiated with respect to its scalar input.
template <typename F>
concept SpectralFilter = requires(const F f, std::span<const double> xs) {
    { f.eval(xs) } -> std::convertible_to<std::vector<double>>;
    { f.derivative(xs) } -> std::convertible_to<std::vector<double>>;
};

static_assert(SpectralFilter<FilterNetwork>);
static_assert(SpectralFilter<ReferenceFilter>);

}  // namespace figlearn
