#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sgnet/ops.hpp"
#include "sgnet/params.hpp"

namespace sgnet {

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kCouplingClamp = 2.0;

/// Square-kernel convolution with "same" padding, registered as <name>.weight / <name>.bias.
/// Weights are uniform in +-1/sqrt(fan_in); biases start at zero.
class Conv2d {
public:
    Conv2d(ParamStore& store, const std::string& name, int64_t in_channels, int64_t out_channels,
           int kernel, Rng& rng);

    Tensor forward(const Tensor& x) const;

    int64_t in_channels() const { return in_; }
    int64_t out_channels() const { return out_; }
    int kernel() const { return kernel_; }
    const Tensor& weight() const { return weight_; }
    const Tensor& bias() const { return bias_; }

private:
    int64_t in_;
    int64_t out_;
    int kernel_;
    Tensor weight_;
    Tensor bias_;
};

/// B residual blocks (conv3x3 -> leaky_relu -> conv3x3, identity skip) under a group-level skip.
class ResidualGroup {
public:
    ResidualGroup(ParamStore& store, const std::string& name, int64_t channels, int blocks, Rng& rng);

    Tensor forward(const Tensor& x) const;
    int64_t channels() const { return channels_; }

private:
    int64_t channels_;
    std::vector<std::pair<Conv2d, Conv2d>> blocks_;
};

/// Channel gate sigmoid(mlp(avgpool x) + mlp(maxpool x)) with a shared C -> C/r -> C bottleneck.
class ChannelAttention {
public:
    ChannelAttention(ParamStore& store, const std::string& name, int64_t channels, int ratio, Rng& rng);

    Tensor gate(const Tensor& x) const;
    Tensor forward(const Tensor& x) const;

private:
    Tensor mlp(const Tensor& pooled) const;

    int64_t channels_;
    Conv2d reduce_;
    Conv2d expand_;
};

/// Affine coupling on a 2C-channel input split into halves (x1, x2):
///   y1 = x1,  y2 = x2 * exp(clamp(s(x1))) + t(x1),  clamp(v) = c * tanh(v / c).
class CouplingBlock {
public:
    CouplingBlock(ParamStore& store, const std::string& name, int64_t half_channels, Rng& rng);

    std::pair<Tensor, Tensor> forward(const Tensor& x) const;
    // Halves re-concatenated.
    Tensor forward_merged(const Tensor& x) const;
    Tensor inverse(const Tensor& y) const;

    int64_t half_channels() const { return half_; }

private:
    Tensor log_scale(const Tensor& x1) const;
    Tensor shift(const Tensor& x1) const;
    void check(const Tensor& x) const;

    int64_t half_;
    Conv2d s0_, s1_, t0_, t1_;
};

/// Bicubic resample by `factor` followed by a 3x3 convolution (f_up / f_ds).
class ResampleConv {
public:
    ResampleConv(ParamStore& store, const std::string& name, int64_t in_channels,
                 int64_t out_channels, ScaleFactor factor, Rng& rng);

    Tensor forward(const Tensor& x) const;
    const Conv2d& conv() const { return conv_; }

private:
    ScaleFactor factor_;
    Conv2d conv_;
};

}  // namespace sgnet
