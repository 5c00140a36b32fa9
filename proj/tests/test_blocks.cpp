#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sgnet/blocks.hpp"
#include "sgnet/error.hpp"

using namespace sgnet;

namespace {

void fill(ParamStore& store, const std::string& name, double v) {
    for (double& x : store.tensor(name).mutable_data()) x = v;
}

void zero_all(ParamStore& store) {
    for (const auto& [name, p] : store.entries()) fill(store, name, 0.0);
}

// Randomizes every parameter so biases and weights are generic.
void randomize(ParamStore& store, Rng& rng, double amplitude) {
    for (const auto& [name, p] : store.entries())
        for (double& x : store.tensor(name).mutable_data()) x = rng.uniform(-amplitude, amplitude);
}

double lrelu(double v) { return v >= 0.0 ? v : kLeakySlope * v; }

void expect_param_gradients_match(ParamStore& store, const std::function<Tensor()>& loss, double tol) {
    store.clear_grad();
    backward(loss());
    for (const auto& [name, p] : store.entries()) {
        Tensor w = p.tensor;
        const std::vector<double> analytic(w.grad().begin(), w.grad().end());
        auto numeric = oracle::numeric_gradient(
            [&] {
                NoGradGuard g;
                return loss().item();
            },
            w, 1e-6);
        for (size_t i = 0; i < analytic.size(); ++i) {
            const double diff = std::abs(analytic[i] - numeric[i]);
            if (diff > 1e-9) {
                EXPECT_LT(oracle::relative_error(analytic[i], numeric[i]), tol) << name << "[" << i << "]";
            }
        }
    }
}

}  // namespace

TEST(Conv2dBlock, NamingShapesAndInit) {
    ParamStore store;
    Rng rng(1);
    Conv2d conv(store, "c", 4, 6, 3, rng);
    EXPECT_EQ(store.at("c.weight").extents, (std::vector<uint32_t>{6, 4, 3, 3}));
    EXPECT_EQ(store.at("c.bias").extents, (std::vector<uint32_t>{6}));
    const double bound = 1.0 / std::sqrt(36.0);
    for (double v : store.at("c.weight").tensor.data()) EXPECT_LE(std::abs(v), bound);
    for (double v : store.at("c.bias").tensor.data()) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(Conv2d(store, "c", 4, 6, 3, rng), Error);
}

TEST(ResidualGroup, ZeroWeightsArePureSkip) {
    ParamStore store;
    Rng rng(2);
    ResidualGroup rg(store, "rg", 3, 2, rng);
    zero_all(store);
    Tensor x = oracle::random_tensor({2, 3, 5, 4}, rng);
    Tensor y = rg.forward(x);
    EXPECT_EQ(y.shape(), x.shape());
    EXPECT_EQ(oracle::max_abs_diff(y.data(), x.data()), 0.0);
}

TEST(ResidualGroup, ShapePreservedAndChannelMismatchRejected) {
    ParamStore store;
    Rng rng(3);
    ResidualGroup rg(store, "rg", 4, 2, rng);
    Tensor x = oracle::random_tensor({1, 4, 6, 7}, rng);
    EXPECT_EQ(rg.forward(x).shape(), x.shape());
    EXPECT_THROW(rg.forward(Tensor::zeros({1, 3, 6, 7})), ShapeError);
}

TEST(ResidualGroup, HandComputedSingleBlock) {
    ParamStore store;
    Rng rng(4);
    ResidualGroup rg(store, "rg", 1, 1, rng);
    zero_all(store);
    // Only the centre tap is set, so each 3x3 conv acts pointwise.
    store.tensor("rg.block0.conv0.weight").mutable_data()[4] = 2.0;
    store.tensor("rg.block0.conv0.bias").mutable_data()[0] = 0.1;
    store.tensor("rg.block0.conv1.weight").mutable_data()[4] = -0.5;
    store.tensor("rg.block0.conv1.bias").mutable_data()[0] = 0.3;
    const std::vector<double> in = {0.4, -0.7, 1.3, -0.05};
    Tensor y = rg.forward(Tensor::from_data({1, 1, 2, 2}, in));
    for (size_t i = 0; i < 4; ++i) {
        const double x = in[i];
        EXPECT_NEAR(y.data()[i], x + (-0.5 * lrelu(2.0 * x + 0.1) + 0.3), 1e-12);
    }
}

TEST(ChannelAttention, ZeroBottleneckGivesHalfGate) {
    ParamStore store;
    Rng rng(5);
    ChannelAttention ca(store, "ca", 8, 4, rng);
    zero_all(store);
    Tensor x = oracle::random_tensor({1, 8, 3, 3}, rng);
    Tensor y = ca.forward(x);
    for (size_t i = 0; i < x.data().size(); ++i) EXPECT_EQ(y.data()[i], 0.5 * x.data()[i]);
}

TEST(ChannelAttention, MatchesPoolMlpSigmoidOracle) {
    ParamStore store;
    Rng rng(6);
    const int64_t c = 8, r = 4, m = c / r;
    ChannelAttention ca(store, "ca", c, r, rng);
    randomize(store, rng, 0.8);
    Tensor x = oracle::random_tensor({2, c, 4, 5}, rng, -3, 3);
    Tensor y = ca.forward(x);
    auto w1 = store.at("ca.reduce.weight").tensor.data(), b1 = store.at("ca.reduce.bias").tensor.data();
    auto w2 = store.at("ca.expand.weight").tensor.data(), b2 = store.at("ca.expand.bias").tensor.data();
    auto mlp = [&](const std::vector<double>& v) {
        std::vector<double> hidden(static_cast<size_t>(m)), out(static_cast<size_t>(c));
        for (int64_t j = 0; j < m; ++j) {
            double a = b1[static_cast<size_t>(j)];
            for (int64_t i = 0; i < c; ++i) a += w1[static_cast<size_t>(j * c + i)] * v[static_cast<size_t>(i)];
            hidden[static_cast<size_t>(j)] = lrelu(a);
        }
        for (int64_t i = 0; i < c; ++i) {
            double a = b2[static_cast<size_t>(i)];
            for (int64_t j = 0; j < m; ++j) a += w2[static_cast<size_t>(i * m + j)] * hidden[static_cast<size_t>(j)];
            out[static_cast<size_t>(i)] = a;
        }
        return out;
    };
    for (int64_t n = 0; n < 2; ++n) {
        std::vector<double> avg(static_cast<size_t>(c), 0.0), mx(static_cast<size_t>(c), -INFINITY);
        for (int64_t i = 0; i < c; ++i)
            for (int64_t yy = 0; yy < 4; ++yy)
                for (int64_t xx = 0; xx < 5; ++xx) {
                    avg[static_cast<size_t>(i)] += x.at(n, i, yy, xx) / 20.0;
                    mx[static_cast<size_t>(i)] = std::max(mx[static_cast<size_t>(i)], x.at(n, i, yy, xx));
                }
        auto a = mlp(avg), b = mlp(mx);
        for (int64_t i = 0; i < c; ++i) {
            const double gate = 1.0 / (1.0 + std::exp(-(a[static_cast<size_t>(i)] + b[static_cast<size_t>(i)])));
            EXPECT_GT(gate, 0.0);
            EXPECT_LT(gate, 1.0);
            for (int64_t yy = 0; yy < 4; ++yy)
                for (int64_t xx = 0; xx < 5; ++xx) EXPECT_NEAR(y.at(n, i, yy, xx), gate * x.at(n, i, yy, xx), 1e-12);
        }
    }
}

TEST(ChannelAttention, GateStaysStrictlyInsideUnitInterval) {
    ParamStore store;
    Rng rng(7);
    ChannelAttention ca(store, "ca", 4, 2, rng);
    Tensor g = ca.gate(oracle::random_tensor({3, 4, 6, 6}, rng, -5, 5));
    for (double v : g.data()) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
}

TEST(ChannelAttention, RatioMustDivideChannels) {
    ParamStore store;
    Rng rng(8);
    EXPECT_THROW(ChannelAttention(store, "ca", 6, 4, rng), ConfigError);
}

TEST(Coupling, ZeroSubnetsAreIdentity) {
    ParamStore store;
    Rng rng(9);
    CouplingBlock cb(store, "cb", 3, rng);
    zero_all(store);
    Tensor x = oracle::random_tensor({1, 6, 4, 4}, rng);
    auto [y1, y2] = cb.forward(x);
    EXPECT_EQ(oracle::max_abs_diff(concat({y1, y2}).data(), x.data()), 0.0);
    EXPECT_EQ(oracle::max_abs_diff(cb.forward_merged(x).data(), x.data()), 0.0);
}

TEST(Coupling, InverseRecoversInput) {
    ParamStore store;
    Rng rng(10);
    CouplingBlock cb(store, "cb", 2, rng);
    randomize(store, rng, 0.5);
    Tensor x = oracle::random_tensor({2, 4, 5, 5}, rng, -2, 2);
    EXPECT_LT(oracle::max_abs_diff(cb.inverse(cb.forward_merged(x)).data(), x.data()), 1e-9);
}

TEST(Coupling, MergedEqualsConcatOfPair) {
    ParamStore store;
    Rng rng(11);
    CouplingBlock cb(store, "cb", 2, rng);
    randomize(store, rng, 0.5);
    Tensor x = oracle::random_tensor({1, 4, 3, 6}, rng);
    auto [y1, y2] = cb.forward(x);
    Tensor merged = cb.forward_merged(x);
    EXPECT_EQ(merged.shape(), x.shape());
    EXPECT_EQ(oracle::max_abs_diff(merged.data(), concat({y1, y2}).data()), 0.0);
}

TEST(Coupling, ClampKeepsLargeInputsFinite) {
    ParamStore store;
    Rng rng(12);
    CouplingBlock cb(store, "cb", 2, rng);
    randomize(store, rng, 1.0);
    Tensor x = scale(oracle::random_tensor({1, 4, 4, 4}, rng), 1e3);
    Tensor y = cb.forward_merged(x);
    for (double v : y.data()) EXPECT_TRUE(std::isfinite(v));
    EXPECT_LT(oracle::max_abs_diff(cb.inverse(y).data(), x.data()), 1e-9 * 1e3);
}

TEST(Coupling, OddOrMismatchedChannelsRejected) {
    ParamStore store;
    Rng rng(13);
    CouplingBlock cb(store, "cb", 2, rng);
    EXPECT_THROW(cb.forward(Tensor::zeros({1, 5, 3, 3})), ShapeError);
    EXPECT_THROW(cb.forward(Tensor::zeros({1, 6, 3, 3})), ShapeError);
}

TEST(ResampleConv, ExtentsFollowFactor) {
    ParamStore store;
    Rng rng(14);
    ResampleConv up(store, "up", 3, 5, ScaleFactor::up(4), rng);
    ResampleConv down(store, "down", 3, 2, ScaleFactor::down(2), rng);
    EXPECT_EQ(up.forward(Tensor::zeros({1, 3, 4, 6})).shape(), (Shape{1, 5, 16, 24}));
    EXPECT_EQ(down.forward(Tensor::zeros({1, 3, 4, 6})).shape(), (Shape{1, 2, 2, 3}));
    EXPECT_THROW(down.forward(Tensor::zeros({1, 3, 5, 6})), ShapeError);
}

TEST(ResampleConv, FactorOneIsPlainConv) {
    ParamStore a, b;
    Rng r1(15), r2(15);
    ResampleConv rc(a, "x", 2, 3, ScaleFactor{1, 1}, r1);
    Conv2d conv(b, "x.conv", 2, 3, 3, r2);
    Rng rng(16);
    Tensor x = oracle::random_tensor({1, 2, 5, 5}, rng);
    EXPECT_EQ(oracle::max_abs_diff(rc.forward(x).data(), conv.forward(x).data()), 0.0);
}

TEST(ResampleConv, IdentityConvAfterUpsampleEqualsBicubic) {
    ParamStore store;
    Rng rng(17);
    ResampleConv up(store, "up", 2, 2, ScaleFactor::up(2), rng);
    zero_all(store);
    auto w = store.tensor("up.conv.weight").mutable_data();
    w[0 * 9 + 4] = 1.0;         // out 0 <- in 0 centre
    w[(1 * 2 + 1) * 9 + 4] = 1.0;  // out 1 <- in 1 centre
    Tensor x = oracle::random_tensor({1, 2, 4, 5}, rng);
    EXPECT_LT(oracle::max_abs_diff(up.forward(x).data(), bicubic_resize(x, ScaleFactor::up(2)).data()), 1e-12);
}

TEST(Blocks, ParameterGradientsMatchFiniteDifferences) {
    ParamStore store;
    Rng rng(18);
    ResidualGroup rg(store, "rg", 2, 1, rng);
    ChannelAttention ca(store, "ca", 2, 2, rng);
    CouplingBlock cb(store, "cb", 2, rng);
    ResampleConv down(store, "down", 4, 2, ScaleFactor::down(2), rng);
    randomize(store, rng, 0.5);
    Tensor x = oracle::random_tensor({1, 2, 4, 4}, rng);
    Tensor probe = oracle::random_tensor({1, 2, 2, 2}, rng);
    auto loss = [&] {
        Tensor f = ca.forward(rg.forward(x));
        Tensor g = cb.forward_merged(concat({f, x}));
        return sum(mul(down.forward(g), probe));
    };
    expect_param_gradients_match(store, loss, 1e-5);
}
