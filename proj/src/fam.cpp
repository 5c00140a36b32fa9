#include "sgnet/fam.hpp"

#include "sgnet/error.hpp"

namespace sgnet {

SpectralStack::SpectralStack(ParamStore& store, const std::string& name, int64_t channels, Rng& rng)
    : first_(store, name + ".conv0", channels, channels, 1, rng),
      second_(store, name + ".conv1", channels, channels, 1, rng) {}

Tensor SpectralStack::forward(const Tensor& x) const {
    return second_.forward(leaky_relu(first_.forward(x), kLeakySlope));
}

Sdb::Sdb(ParamStore& store, const std::string& name, int64_t channels, int scale, Rng& rng)
    : channels_(channels),
      scale_(scale),
      fuse_(store, name + ".fuse", 2 * channels, channels, 3, rng),
      up_(store, name + ".up", channels, channels, ScaleFactor::up(scale), rng),
      amp_(store, name + ".spec.amp", channels, rng),
      amp_diff_(store, name + ".spec.amp_diff", channels, rng),
      phase_(store, name + ".spec.phase", channels, rng),
      phase_diff_(store, name + ".spec.phase_diff", channels, rng),
      amp_fuse_(store, name + ".spec.amp_fuse", 2 * channels, channels, 1, rng),
      phase_fuse_(store, name + ".spec.phase_fuse", 2 * channels, channels, 1, rng),
      couple_in_(store, name + ".couple_in", channels, rng),
      couple_out_(store, name + ".couple_out", channels, rng),
      merge_(store, name + ".merge", 2 * channels, channels, 1, rng),
      down_(store, name + ".down", channels, channels, ScaleFactor::down(scale), rng) {}

SdbOutput Sdb::forward(const Tensor& f_rgb_prev, const Tensor& f_d_prev, const Tensor& f_ge,
                       SdbTrace* trace) const {
    const Shape& hr = f_rgb_prev.shape();
    const Shape& lr = f_d_prev.shape();
    if (hr.c != channels_ || lr.c != channels_ || f_ge.shape().c != channels_)
        throw ShapeError("sdb: expected " + std::to_string(channels_) + " feature channels");
    if (f_ge.shape() != lr) throw ShapeError("sdb: f_ge " + f_ge.shape().str() + " vs f_d " + lr.str());
    if (hr.n != lr.n || hr.h != lr.h * scale_ || hr.w != lr.w * scale_)
        throw ShapeError("sdb: rgb feature " + hr.str() + " is not " + std::to_string(scale_) +
                         "x depth feature " + lr.str());

    Tensor f_dg = up_.forward(fuse_.forward(concat({f_ge, f_d_prev})));

    AmplitudePhase dg = decompose(dft2(f_dg));
    AmplitudePhase rgb = decompose(dft2(f_rgb_prev));
    Tensor amp_diff = abs(sub(rgb.amplitude, dg.amplitude));
    Tensor phase_diff = abs(sub(rgb.phase, dg.phase));
    Tensor amp_fused = amp_fuse_.forward(concat({amp_.forward(dg.amplitude), amp_diff_.forward(amp_diff)}));
    Tensor phase_fused =
        phase_fuse_.forward(concat({phase_.forward(dg.phase), phase_diff_.forward(phase_diff)}));
    Tensor f_f = idft2(compose({amp_fused, phase_fused}));

    auto [f_rgb, f_s] = couple_in_.forward(concat({f_rgb_prev, f_dg}));
    Tensor mixed = merge_.forward(couple_out_.forward_merged(concat({f_s, f_f})));
    Tensor f_d = down_.forward(add(f_dg, mixed));

    if (trace) {
        *trace = SdbTrace{f_dg, dg.amplitude, rgb.amplitude, amp_diff, phase_diff, f_f};
    }
    return {f_rgb, f_d};
}

Fam::Fam(ParamStore& store, const std::string& name, int64_t channels, int sdb_count, int scale,
         int res_blocks, Rng& rng)
    : channels_(channels),
      scale_(scale),
      rgb_lift_(store, name + ".rgb.lift", 3, channels, 3, rng),
      rgb_group_(store, name + ".rgb.group", channels, res_blocks, rng),
      depth_lift_(store, name + ".depth.lift", 1, channels, 3, rng),
      depth_group_(store, name + ".depth.group", channels, res_blocks, rng),
      aggregate_(store, name + ".aggregate", channels * sdb_count, res_blocks, rng),
      up_(store, name + ".up", channels * sdb_count, channels, ScaleFactor::up(scale), rng),
      head_(store, name + ".head", channels, 1, 3, rng) {
    sdbs_.reserve(static_cast<size_t>(sdb_count));
    for (int i = 0; i < sdb_count; ++i)
        sdbs_.emplace_back(store, name + ".sdb" + std::to_string(i), channels, scale, rng);
}

Tensor Fam::forward(const Tensor& rgb, const Tensor& d_lr, const Tensor& f_ge,
                    std::vector<SdbTrace>* traces) const {
    if (f_ge.shape().c != channels_)
        throw ConfigError("fam: f_ge has " + std::to_string(f_ge.shape().c) +
                          " channels but the module width is " + std::to_string(channels_));
    if (rgb.shape().c != 3 || d_lr.shape().c != 1) throw ShapeError("fam: expected RGB and 1-channel depth");
    Tensor f_rgb = rgb_group_.forward(rgb_lift_.forward(rgb));
    Tensor f_d = depth_group_.forward(depth_lift_.forward(d_lr));
    if (traces) traces->assign(sdbs_.size(), SdbTrace{});

    std::vector<Tensor> history;
    history.reserve(sdbs_.size());
    for (size_t i = 0; i < sdbs_.size(); ++i) {
        SdbOutput out = sdbs_[i].forward(f_rgb, f_d, f_ge, traces ? &(*traces)[i] : nullptr);
        f_rgb = out.f_rgb;
        f_d = out.f_d;
        history.push_back(f_d);
    }
    return head_.forward(up_.forward(aggregate_.forward(concat(history))));
}

}  // namespace sgnet
