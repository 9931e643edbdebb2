#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "figlearn/filter.hpp"
#include "oracles.hpp"

using namespace figlearn;

namespace {

FilterNetwork zeroed_head_network(std::uint64_t seed) {
    FilterNetwork net = FilterNetwork::init(seed);
    std::vector<double> flat = net.flatten();
    // Final layer is 30 weights + 1 bias at the tail of the flat vector.
    for (std::size_t i = flat.size() - 31; i < flat.size(); ++i) flat[i] = 0.0;
    net.assign(flat);
    return net;
}

TEST(FilterNetwork, ZeroHeadGivesLogTwo) {
    const FilterNetwork net = zeroed_head_network(1);
    for (double x : {-3.0, 0.0, 0.7, 25.0})
        EXPECT_NEAR(net.eval(x), std::log(2.0), 1e-14);
}

TEST(FilterNetwork, SoftplusAsymptoteNoOverflow) {
    FilterNetwork net = FilterNetwork::init(2);
    std::vector<double> flat(net.param_count(), 0.0);
    flat.back() = 30.0;  // f(x) = 30 for every x
    net.assign(flat);
    EXPECT_NEAR(net.eval(5.0), 30.0, 1e-12);

    flat.back() = 5000.0;
    net.assign(flat);
    EXPECT_EQ(net.eval(5.0), 5000.0);  // softplus must not overflow
    EXPECT_TRUE(std::isfinite(net.eval(-1e6)));
}

TEST(FilterNetwork, OutputStrictlyPositive) {
    const FilterNetwork net = FilterNetwork::init(3);
    for (double x : {-100.0, -1.0, 0.0, 0.5, 10.0, 300.0}) EXPECT_GT(net.eval(x), 0.0);
}

TEST(FilterNetwork, DefaultArchitecture) {
    const FilterNetwork net = FilterNetwork::init(4);
    EXPECT_EQ(net.layer_sizes(), (std::vector<std::size_t>{1, 30, 30, 30, 30, 30, 1}));
    EXPECT_EQ(net.param_count(), 30u + 30u + 4u * (900u + 30u) + 30u + 1u);
}

TEST(FilterNetwork, InitIsSeedDeterministic) {
    EXPECT_EQ(FilterNetwork::init(9).flatten(), FilterNetwork::init(9).flatten());
    EXPECT_NE(FilterNetwork::init(9).flatten(), FilterNetwork::init(10).flatten());
}

TEST(FilterNetwork, EvalPermutesWithInput) {
    const FilterNetwork net = FilterNetwork::init(5);
    const std::vector<double> xs{0.1, 2.0, -1.0, 7.5};
    const std::vector<double> permuted{7.5, 0.1, -1.0, 2.0};
    const std::vector<double> ys = net.eval(xs);
    const std::vector<double> yp = net.eval(permuted);
    EXPECT_EQ(yp[0], ys[3]);
    EXPECT_EQ(yp[1], ys[0]);
    EXPECT_EQ(yp[2], ys[2]);
    EXPECT_EQ(yp[3], ys[1]);
}

TEST(FilterNetwork, BackpropZeroUpstreamGivesZero) {
    const FilterNetwork net = FilterNetwork::init(6);
    const std::vector<double> xs{0.5, 1.5};
    const std::vector<double> grad = net.backprop_params(xs, std::vector<double>{0.0, 0.0});
    for (double g : grad) EXPECT_EQ(g, 0.0);
}

TEST(FilterNetwork, BackpropLinearInUpstream) {
    const FilterNetwork net = FilterNetwork::init(7);
    const std::vector<double> xs{0.3, 2.2, 4.0};
    const std::vector<double> up{0.7, -1.2, 0.4};
    std::vector<double> up2 = up;
    for (double& u : up2) u *= 2.0;
    const std::vector<double> g1 = net.backprop_params(xs, up);
    const std::vector<double> g2 = net.backprop_params(xs, up2);
    for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_EQ(g2[i], 2.0 * g1[i]);
}

TEST(FilterNetwork, BackpropMatchesFiniteDifferences) {
    // 20 randomly chosen parameters, central differences at step 1e-5.
    FilterNetwork net = FilterNetwork::init(8);
    const std::vector<double> xs{1.3};
    const std::vector<double> up{1.0};
    const std::vector<double> analytic = net.backprop_params(xs, up);

    std::vector<double> flat = net.flatten();
    Rng rng(99);
    const double step = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t idx = rng.next_u64() % flat.size();
        const double orig = flat[idx];
        flat[idx] = orig + step;
        net.assign(flat);
        const double fp = net.eval(xs[0]);
        flat[idx] = orig - step;
        net.assign(flat);
        const double fm = net.eval(xs[0]);
        flat[idx] = orig;
        net.assign(flat);
        const double fd = (fp - fm) / (2.0 * step);
        const double denom = std::max({std::abs(fd), std::abs(analytic[idx]), 1e-8});
        EXPECT_LE(std::abs(analytic[idx] - fd) / denom, 1e-5)
            << "parameter " << idx << ": analytic " << analytic[idx] << " vs fd " << fd;
    }
}

TEST(FilterNetwork, InputDerivativeMatchesFiniteDifferences) {
    const FilterNetwork net = FilterNetwork::init(11);
    const std::vector<double> xs{0.0, 0.8, 3.1, 9.4};
    const std::vector<double> analytic = net.derivative(xs);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double step = 1e-6;
        const double fd = (net.eval(xs[k] + step) - net.eval(xs[k] - step)) / (2.0 * step);
        EXPECT_LE(std::abs(analytic[k] - fd) / std::max({std::abs(fd), 1e-8}), 1e-6);
    }
}

TEST(FilterNetwork, ConstantNetworkHasZeroDerivative) {
    FilterNetwork net = FilterNetwork::init(12);
    net.assign(std::vector<double>(net.param_count(), 0.0));
    for (double d : net.derivative(std::vector<double>{0.0, 1.0, 5.0})) EXPECT_EQ(d, 0.0);
}

TEST(ReferenceFilter, ClosedFormValues) {
    EXPECT_EQ(ReferenceFilter::heat(0.1).eval(0.0), 1.0);
    EXPECT_EQ(ReferenceFilter::normal().eval(0.0), 0.0);
    EXPECT_NEAR(ReferenceFilter::normal().eval(4.0), 0.5, 1e-15);
    EXPECT_NEAR(ReferenceFilter::highpass(0.1).eval(10.0), 0.5, 1e-15);
    EXPECT_THROW(ReferenceFilter::normal().eval(-1.0), validation_error);
}

TEST(ReferenceFilter, HighpassApproachesOne) {
    const ReferenceFilter hp = ReferenceFilter::highpass(0.1);
    EXPECT_NEAR(hp.eval(1e9), 1.0, 1e-7);
}

TEST(ReferenceFilter, DerivativesMatchAnalyticAndFd) {
    EXPECT_NEAR(ReferenceFilter::heat(0.1).derivative(3.0), -0.1 * std::exp(-0.3), 1e-15);
    EXPECT_EQ(ReferenceFilter::normal().derivative(0.0), 0.0);

    for (const ReferenceFilter& f :
         {ReferenceFilter::heat(0.1), ReferenceFilter::normal(), ReferenceFilter::highpass(0.1)}) {
        for (double x : {0.5, 2.0, 11.0}) {
            const double step = 1e-6;
            const double fd = (f.eval(x + step) - f.eval(x - step)) / (2.0 * step);
            EXPECT_LE(std::abs(f.derivative(x) - fd) / std::max(std::abs(fd), 1e-8), 1e-6);
        }
    }
}

TEST(ParseFilterSpec, AcceptsAndRejects) {
    EXPECT_EQ(parse_filter_spec("heat:0.2").kind, FilterKind::heat);
    EXPECT_EQ(parse_filter_spec("heat:0.2").param, 0.2);
    EXPECT_EQ(parse_filter_spec("heat").param, 0.1);
    EXPECT_EQ(parse_filter_spec("normal").kind, FilterKind::normal);
    EXPECT_EQ(parse_filter_spec("highpass:0.5").param, 0.5);
    EXPECT_THROW(parse_filter_spec("normal:0.1"), validation_error);
    EXPECT_THROW(parse_filter_spec("lowpass"), validation_error);
    EXPECT_THROW(parse_filter_spec("heat:abc"), validation_error);
    EXPECT_THROW(parse_filter_spec("heat:-1"), validation_error);
}

TEST(ParseFilterSpec, RoundTripsSpecString) {
    for (const char* spec : {"heat:0.1", "normal", "highpass:0.25"}) {
        EXPECT_EQ(parse_filter_spec(spec).spec_string(), spec);
    }
}

}  // namespace
