#pragma once

#include "sgnet/blocks.hpp"

namespace sgnet {

// Edge-strength map: per channel sqrt((Z[y,x+1]-Z[y,x-1])^2 + (Z[y+1,x]-Z[y-1,x])^2) with
// replicate padding, averaged over channels into a single channel. Gradient is 0 where a
// channel's magnitude is below 1e-12.
Tensor gradient_map(const Tensor& z);

struct GcmOutput {
    Tensor f_ge;  // [N, C, h, w]
    Tensor g_sr;  // [N, 1, sh, sw]
};

/// Gradient calibration module: calibrates the blurry depth gradient with the RGB gradient
/// prior and produces the gradient-enhanced depth feature at LR resolution.
class Gcm {
public:
    Gcm(ParamStore& store, const std::string& name, int64_t channels, int scale, int res_blocks,
        int attention_ratio, Rng& rng);

    // d_lr_up must already be bicubic-upsampled to the RGB extents.
    GcmOutput forward(const Tensor& rgb, const Tensor& d_lr_up) const;

    // Calibrated gradient G_sr from the two gradient maps.
    Tensor calibrate(const Tensor& g_rgb, const Tensor& g_lr) const;

    int64_t channels() const { return channels_; }
    const Conv2d& gradient_head() const { return out_; }

private:
    int64_t channels_;
    // f_g
    Conv2d fuse_;
    ResidualGroup group0_;
    ResidualGroup group1_;
    ChannelAttention attention_;
    Conv2d out_;
    // the two f_r branches of F_ge
    Conv2d depth_lift_;
    ResidualGroup depth_group_;
    Conv2d grad_lift_;
    ResidualGroup grad_group_;
    ResampleConv down_;
};

}  // namespace sgnet
