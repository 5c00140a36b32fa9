#include "sgnet/blocks.hpp"

#include <cmath>

#include "sgnet/error.hpp"

namespace sgnet {

namespace {
int64_t reduced_width(int64_t channels, int ratio) {
    if (ratio < 1 || channels % ratio != 0)
        throw ConfigError("channel attention: " + std::to_string(channels) +
                          " channels not divisible by ratio " + std::to_string(ratio));
    return channels / ratio;
}
}  // namespace

Conv2d::Conv2d(ParamStore& store, const std::string& name, int64_t in_channels,
               int64_t out_channels, int kernel, Rng& rng)
    : in_(in_channels), out_(out_channels), kernel_(kernel) {
    if (in_channels < 1 || out_channels < 1) throw ConfigError("conv '" + name + "' needs channels");
    auto k = static_cast<uint32_t>(kernel);
    weight_ = store.add(name + ".weight", {static_cast<uint32_t>(out_channels),
                                           static_cast<uint32_t>(in_channels), k, k});
    bias_ = store.add(name + ".bias", {static_cast<uint32_t>(out_channels)});
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels * kernel * kernel));
    for (double& v : weight_.mutable_data()) v = rng.uniform(-bound, bound);
}

Tensor Conv2d::forward(const Tensor& x) const { return conv2d(x, weight_, bias_, 1, kernel_ / 2); }

ResidualGroup::ResidualGroup(ParamStore& store, const std::string& name, int64_t channels,
                             int blocks, Rng& rng)
    : channels_(channels) {
    if (blocks < 1) throw ConfigError("residual group needs at least one block");
    blocks_.reserve(static_cast<size_t>(blocks));
    for (int b = 0; b < blocks; ++b) {
        const std::string prefix = name + ".block" + std::to_string(b);
        Conv2d first(store, prefix + ".conv0", channels, channels, 3, rng);
        Conv2d second(store, prefix + ".conv1", channels, channels, 3, rng);
        blocks_.emplace_back(std::move(first), std::move(second));
    }
}

Tensor ResidualGroup::forward(const Tensor& x) const {
    if (x.shape().c != channels_)
        throw ShapeError("residual group expects " + std::to_string(channels_) + " channels, got " +
                         std::to_string(x.shape().c));
    // Chained identity skips telescope into the group skip: x + sum of block residuals.
    Tensor h = x;
    for (const auto& [first, second] : blocks_)
        h = add(h, second.forward(leaky_relu(first.forward(h), kLeakySlope)));
    return h;
}

ChannelAttention::ChannelAttention(ParamStore& store, const std::string& name, int64_t channels,
                                   int ratio, Rng& rng)
    : channels_(channels),
      reduce_(store, name + ".reduce", channels, reduced_width(channels, ratio), 1, rng),
      expand_(store, name + ".expand", channels / ratio, channels, 1, rng) {}

Tensor ChannelAttention::mlp(const Tensor& pooled) const {
    return expand_.forward(leaky_relu(reduce_.forward(pooled), kLeakySlope));
}

Tensor ChannelAttention::gate(const Tensor& x) const {
    if (x.shape().c != channels_) throw ShapeError("channel attention: channel mismatch");
    return sigmoid(add(mlp(global_pool(x, PoolMode::Mean)), mlp(global_pool(x, PoolMode::Max))));
}

Tensor ChannelAttention::forward(const Tensor& x) const { return mul_channels(x, gate(x)); }

CouplingBlock::CouplingBlock(ParamStore& store, const std::string& name, int64_t half_channels,
                             Rng& rng)
    : half_(half_channels),
      s0_(store, name + ".scale.conv0", half_channels, half_channels, 3, rng),
      s1_(store, name + ".scale.conv1", half_channels, half_channels, 3, rng),
      t0_(store, name + ".shift.conv0", half_channels, half_channels, 3, rng),
      t1_(store, name + ".shift.conv1", half_channels, half_channels, 3, rng) {}

void CouplingBlock::check(const Tensor& x) const {
    if (x.shape().c % 2 != 0) throw ShapeError("coupling block needs an even channel count");
    if (x.shape().c != 2 * half_)
        throw ShapeError("coupling block expects " + std::to_string(2 * half_) + " channels, got " +
                         std::to_string(x.shape().c));
}

Tensor CouplingBlock::log_scale(const Tensor& x1) const {
    Tensor raw = s1_.forward(leaky_relu(s0_.forward(x1), kLeakySlope));
    return scale(tanh(scale(raw, 1.0 / kCouplingClamp)), kCouplingClamp);
}

Tensor CouplingBlock::shift(const Tensor& x1) const {
    return t1_.forward(leaky_relu(t0_.forward(x1), kLeakySlope));
}

std::pair<Tensor, Tensor> CouplingBlock::forward(const Tensor& x) const {
    check(x);
    Tensor x1 = slice_channels(x, 0, half_);
    Tensor x2 = slice_channels(x, half_, half_);
    Tensor y2 = add(mul(x2, exp(log_scale(x1))), shift(x1));
    return {x1, y2};
}

Tensor CouplingBlock::forward_merged(const Tensor& x) const {
    auto [y1, y2] = forward(x);
    return concat({y1, y2});
}

Tensor CouplingBlock::inverse(const Tensor& y) const {
    check(y);
    Tensor y1 = slice_channels(y, 0, half_);
    Tensor y2 = slice_channels(y, half_, half_);
    Tensor x2 = mul(sub(y2, shift(y1)), exp(scale(log_scale(y1), -1.0)));
    return concat({y1, x2});
}

ResampleConv::ResampleConv(ParamStore& store, const std::string& name, int64_t in_channels,
                           int64_t out_channels, ScaleFactor factor, Rng& rng)
    : factor_(factor), conv_(store, name + ".conv", in_channels, out_channels, 3, rng) {
    bicubic_taps(factor.num * factor.den, factor);  // validates the factor
}

Tensor ResampleConv::forward(const Tensor& x) const {
    if (factor_.num == 1 && factor_.den == 1) return conv_.forward(x);
    return conv_.forward(bicubic_resize(x, factor_));
}

}  // namespace sgnet
