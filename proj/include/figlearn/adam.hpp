#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "figlearn/errors.hpp"

namespace figlearn {

/// Bias-corrected Adam. One state per parameter vector; the caller owns the
/// parameters and passes them by span each step.
struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::int64_t step_count = 0;
    double learning_rate;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState(std::size_t dim, double lr)
        : first_moment(dim, 0.0), second_moment(dim, 0.0), learning_rate(lr) {}
};

inline void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
    if (params.size() != state.first_moment.size() || grads.size() != params.size())
        throw validation_error("adam_step: parameter/gradient size mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i)
        if (!std::isfinite(grads[i]))
            throw numerical_error("adam_step: non-finite gradient entry " + std::to_string(i) +
                                  " = " + std::to_string(grads[i]) + " at step " +
                                  std::to_string(state.step_count + 1));

    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.first_moment[i] = state.beta1 * state.first_moment[i] + (1.0 - state.beta1) * g;
        state.second_moment[i] =
            state.beta2 * state.second_moment[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.first_moment[i] / bc1;
        const double v_hat = state.second_moment[i] / bc2;
        params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

}  // namespace figlearn
