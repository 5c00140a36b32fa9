#pragma once

#include <vector>

#include "sgnet/blocks.hpp"
#include "sgnet/spectral.hpp"

namespace sgnet {

/// Intermediate maps of one spectrum differencing block, kept for inspection.
struct SdbTrace {
    Tensor f_dg;            // fused, up-sampled depth feature [N,C,sh,sw]
    Tensor amplitude_dg;    // |dft2(f_dg)|
    Tensor amplitude_rgb;   // |dft2(f_rgb_prev)|
    Tensor amplitude_diff;  // |amplitude_rgb - amplitude_dg|
    Tensor phase_diff;      // |phase_rgb - phase_dg|
    Tensor f_f;             // spatial feature recovered from the fused spectrum
};

struct SdbOutput {
    Tensor f_rgb;  // [N,C,sh,sw]
    Tensor f_d;    // [N,C,h,w]
};

/// Two 1x1 convolutions with a leaky ReLU between them (f_c).
class SpectralStack {
public:
    SpectralStack(ParamStore& store, const std::string& name, int64_t channels, Rng& rng);
    Tensor forward(const Tensor& x) const;

private:
    Conv2d first_;
    Conv2d second_;
};

/// Spectrum differencing block.
class Sdb {
public:
    Sdb(ParamStore& store, const std::string& name, int64_t channels, int scale, Rng& rng);

    SdbOutput forward(const Tensor& f_rgb_prev, const Tensor& f_d_prev, const Tensor& f_ge,
                      SdbTrace* trace = nullptr) const;

    const CouplingBlock& input_coupling() const { return couple_in_; }
    const CouplingBlock& output_coupling() const { return couple_out_; }

private:
    int64_t channels_;
    int scale_;
    Conv2d fuse_;
    ResampleConv up_;
    SpectralStack amp_;
    SpectralStack amp_diff_;
    SpectralStack phase_;
    SpectralStack phase_diff_;
    Conv2d amp_fuse_;
    Conv2d phase_fuse_;
    CouplingBlock couple_in_;
    CouplingBlock couple_out_;
    Conv2d merge_;  // 2C -> C after the second coupling, so it can join the residual sum
    ResampleConv down_;
};

/// Frequency awareness module: encoders, n recursive SDBs, history aggregation and the
/// up-sampling head that yields the 1-channel residual D_fe.
class Fam {
public:
    Fam(ParamStore& store, const std::string& name, int64_t channels, int sdb_count, int scale,
        int res_blocks, Rng& rng);

    Tensor forward(const Tensor& rgb, const Tensor& d_lr, const Tensor& f_ge,
                   std::vector<SdbTrace>* traces = nullptr) const;

    int64_t channels() const { return channels_; }
    size_t sdb_count() const { return sdbs_.size(); }
    const Conv2d& head() const { return head_; }

private:
    int64_t channels_;
    int scale_;
    Conv2d rgb_lift_;
    ResidualGroup rgb_group_;
    Conv2d depth_lift_;
    ResidualGroup depth_group_;
    std::vector<Sdb> sdbs_;
    ResidualGroup aggregate_;
    ResampleConv up_;
    Conv2d head_;
};

}  // namespace sgnet
