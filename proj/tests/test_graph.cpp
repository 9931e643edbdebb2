#include <gtest/gtest.h>

#include <cmath>

#include "figlearn/graph.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace figlearn;

namespace {

TEST(EdgeIndex, RowMajorUpperTriangle) {
    // (0,1) first, (n-2, n-1) last, contiguous in between.
    const std::size_t n = 5;
    std::size_t expected = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) EXPECT_EQ(edge_index(i, j, n), expected++);
    EXPECT_EQ(expected, num_edge_slots(n));
}

TEST(LogitsToWeights, MidpointAndSaturation) {
    EdgeLogits z{2, {0.0}};
    EXPECT_EQ(logits_to_weights(z).w[0], 0.5);

    z.z[0] = 20.0;
    const double w_hi = logits_to_weights(z).w[0];
    EXPECT_LT(w_hi, 1.0);
    EXPECT_NEAR(w_hi, 1.0, 3e-9);

    z.z[0] = -745.0;  // deep saturation must not overflow
    const double w_lo = logits_to_weights(z).w[0];
    EXPECT_GE(w_lo, 0.0);
    EXPECT_LT(w_lo, 1e-300);
}

TEST(LogitsToWeights, UniformInitLandsInSigmoidInterval) {
    const double lo = sigmoid(-0.5), hi = sigmoid(0.5);
    Rng rng(3);
    EdgeLogits z{8, std::vector<double>(num_edge_slots(8))};
    for (double& v : z.z) v = rng.uniform(-0.5, 0.5);
    for (double w : logits_to_weights(z).w) {
        EXPECT_GE(w, lo);
        EXPECT_LE(w, hi);
    }
    // Frozen interval endpoints: sigmoid(+-0.5).
    EXPECT_NEAR(lo, 0.3775406687981454, 1e-15);
    EXPECT_NEAR(hi, 0.6224593312018546, 1e-15);
}

TEST(WeightsToLaplacian, SingleEdge) {
    const GraphLaplacian lap = weights_to_laplacian({2, {1.0}});
    EXPECT_EQ(lap.m(0, 0), 1.0);
    EXPECT_EQ(lap.m(0, 1), -1.0);
    EXPECT_EQ(lap.m(1, 0), -1.0);
    EXPECT_EQ(lap.m(1, 1), 1.0);
}

TEST(WeightsToLaplacian, ThreeNodePath) {
    // Pairs in index order: (0,1), (0,2), (1,2); edges on (0,1) and (1,2).
    const GraphLaplacian lap = weights_to_laplacian({3, {1.0, 0.0, 1.0}});
    const double expected[3][3] = {{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(lap.m(i, j), expected[i][j]);
}

TEST(WeightsToLaplacian, ZeroWeightsGiveZeroMatrix) {
    const GraphLaplacian lap = weights_to_laplacian({4, std::vector<double>(6, 0.0)});
    EXPECT_EQ(max_abs(lap.m), 0.0);
}

TEST(WeightsToLaplacian, LinearityExactOnDyadics) {
    // Dyadic weights and coefficients keep every sum exact, so linearity can
    // be asserted bit-for-bit.
    const std::size_t n = 6;
    Rng rng(17);
    UpperTriWeights w1{n, std::vector<double>(num_edge_slots(n))};
    UpperTriWeights w2 = w1;
    for (std::size_t e = 0; e < w1.w.size(); ++e) {
        w1.w[e] = 0.25 * static_cast<double>(rng.next_u64() % 5);
        w2.w[e] = 0.25 * static_cast<double>(rng.next_u64() % 5);
    }
    const double a = 0.5, b = 2.0;
    UpperTriWeights combo{n, std::vector<double>(num_edge_slots(n))};
    for (std::size_t e = 0; e < combo.w.size(); ++e) combo.w[e] = a * w1.w[e] + b * w2.w[e];

    const Matrix lhs = weights_to_laplacian(combo).m;
    const Matrix rhs = a * weights_to_laplacian(w1).m + b * weights_to_laplacian(w2).m;
    EXPECT_EQ(lhs, rhs);
}

TEST(WeightsToLaplacian, ConstantVectorInKernel) {
    // Binary weights: row sums cancel exactly. Random weights: within the
    // documented 1e-10 * n tolerance.
    Rng rng(23);
    const std::size_t n = 12;
    UpperTriWeights binary{n, std::vector<double>(num_edge_slots(n))};
    for (double& v : binary.w) v = rng.bernoulli(0.4) ? 1.0 : 0.0;
    const std::vector<double> ones(n, 1.0);
    for (double v : weights_to_laplacian(binary).m * std::span<const double>(ones))
        EXPECT_EQ(v, 0.0);

    const UpperTriWeights soft = testutil::random_weights(n, rng);
    for (double v : weights_to_laplacian(soft).m * std::span<const double>(ones))
        EXPECT_LE(std::abs(v), 1e-10 * static_cast<double>(n));
}

TEST(LaplacianAdjoint, HandComputedCases) {
    const std::vector<double> g_id = laplacian_grad_to_weight_grad(Matrix::identity(2), 2);
    EXPECT_EQ(g_id[0], 2.0);  // G_00 + G_11 - G_01 - G_10 = 1 + 1 - 0 - 0

    Matrix g(2, 2);
    g(0, 0) = 1.0; g(0, 1) = -1.0;
    g(1, 0) = -1.0; g(1, 1) = 1.0;
    EXPECT_EQ(laplacian_grad_to_weight_grad(g, 2)[0], 4.0);
}

TEST(LaplacianAdjoint, RejectsShapeMismatch) {
    EXPECT_THROW(laplacian_grad_to_weight_grad(Matrix::identity(3), 4), validation_error);
}

TEST(LaplacianAdjoint, AdjointIdentityExactOnIntegers) {
    // <G, L(dw)> = <adjoint(G), dw> bit-for-bit when entries are small ints.
    const std::size_t n = 5;
    Rng rng(31);
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = static_cast<double>(static_cast<int>(rng.next_u64() % 7)) - 3.0;
            g(i, j) = v;
            g(j, i) = v;
        }
    UpperTriWeights dw{n, std::vector<double>(num_edge_slots(n))};
    for (double& v : dw.w) v = static_cast<double>(static_cast<int>(rng.next_u64() % 5)) - 2.0;

    const Matrix l_dw = weights_to_laplacian(dw).m;
    double lhs = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) lhs += g(i, j) * l_dw(i, j);
    const std::vector<double> adj = laplacian_grad_to_weight_grad(g, n);
    double rhs = 0.0;
    for (std::size_t e = 0; e < adj.size(); ++e) rhs += adj[e] * dw.w[e];
    EXPECT_EQ(lhs, rhs);
}

TEST(LaplacianAdjoint, FiniteDifferencePairing) {
    // <G, (L(w + eps dw) - L(w))/eps> against <adjoint(G), dw>; the operator
    // is linear so agreement is limited only by rounding.
    const std::size_t n = 6;
    Rng rng(37);
    const Matrix g = testutil::random_symmetric(n, rng);
    const UpperTriWeights w = testutil::random_weights(n, rng);
    UpperTriWeights dw{n, std::vector<double>(num_edge_slots(n))};
    for (double& v : dw.w) v = rng.uniform(-1.0, 1.0);

    const double eps = 1e-6;
    UpperTriWeights w_eps = w;
    for (std::size_t e = 0; e < w.w.size(); ++e) w_eps.w[e] += eps * dw.w[e];
    const Matrix diff = weights_to_laplacian(w_eps).m - weights_to_laplacian(w).m;
    double fd = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) fd += g(i, j) * diff(i, j) / eps;

    const std::vector<double> adj = laplacian_grad_to_weight_grad(g, n);
    double analytic = 0.0;
    for (std::size_t e = 0; e < adj.size(); ++e) analytic += adj[e] * dw.w[e];
    EXPECT_NEAR(analytic, fd, 1e-6 * std::max(1.0, std::abs(fd)));
}

TEST(WeightGradToLogitGrad, SigmoidChain) {
    const UpperTriWeights w{2, {0.5}};
    const std::vector<double> gw{1.0};
    EXPECT_EQ(weight_grad_to_logit_grad(gw, w)[0], 0.25);

    const UpperTriWeights saturated{2, {1.0 - 1e-12}};
    EXPECT_NEAR(weight_grad_to_logit_grad({{123.0}}, saturated)[0], 0.0, 1e-9);
}

TEST(WeightGradToLogitGrad, MatchesFiniteDifferences) {
    Rng rng(41);
    const std::size_t n = 5;
    EdgeLogits z{n, std::vector<double>(num_edge_slots(n))};
    for (double& v : z.z) v = rng.uniform(-2.0, 2.0);
    std::vector<double> gw(z.z.size());
    for (double& v : gw) v = rng.uniform(-1.0, 1.0);

    const UpperTriWeights w = logits_to_weights(z);
    const std::vector<double> analytic = weight_grad_to_logit_grad(gw, w);

    const auto objective = [&](const std::vector<double>& zz) {
        const UpperTriWeights ww = logits_to_weights({n, zz});
        double s = 0.0;
        for (std::size_t e = 0; e < ww.w.size(); ++e) s += gw[e] * ww.w[e];
        return s;
    };
    const std::vector<double> fd = oracles::fd_gradient(objective, z.z, 1e-6);
    EXPECT_LE(oracles::gradient_max_rel_error(analytic, fd, 1e-8), 1e-8);
}

TEST(Binarize, ThresholdAndTies) {
    const UpperTriWeights w{2, {0.49}};
    EXPECT_EQ(binarize(w, 0.5).w[0], 0.0);
    EXPECT_EQ(binarize({2, {0.51}}, 0.5).w[0], 1.0);
    EXPECT_EQ(binarize({2, {0.5}}, 0.5).w[0], 1.0);  // >= convention
    EXPECT_THROW(binarize(w, 0.0), validation_error);
    EXPECT_THROW(binarize(w, 1.0), validation_error);
}

TEST(ValidateLaplacian, AcceptsConstructedRejectsBroken) {
    Rng rng(43);
    validate_laplacian(weights_to_laplacian(testutil::random_weights(7, rng)).m);

    Matrix bad = Matrix::identity(2);  // row sums 1, positive everywhere
    EXPECT_THROW(validate_laplacian(bad), validation_error);
}

TEST(LaplacianToWeights, InvertsConstruction) {
    Rng rng(47);
    const UpperTriWeights w = testutil::random_weights(6, rng);
    const UpperTriWeights back = laplacian_to_weights(weights_to_laplacian(w));
    EXPECT_EQ(back.w, w.w);
}

}  // namespace
