#include "sgnet/model.hpp"

#include <cmath>

#include "sgnet/error.hpp"

namespace sgnet {

void ModelConfig::validate() const {
    if (channels < 2 || channels % 2 != 0)
        throw ConfigError("channels must be a positive even number, got " + std::to_string(channels));
    if (attention_ratio < 1 || channels % attention_ratio != 0)
        throw ConfigError("channels must be divisible by attention_ratio");
    if (sdb_count < 1) throw ConfigError("sdb_count must be at least 1");
    if (res_blocks < 1) throw ConfigError("res_blocks must be at least 1");
    if (scale != 2 && scale != 4 && scale != 8 && scale != 16)
        throw ConfigError("scale must be one of 2, 4, 8, 16, got " + std::to_string(scale));
    for (double v : {lambda1, lambda2, gamma1, gamma2}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("loss weights must be finite and >= 0");
    }
}

namespace {
const ModelConfig& validated(const ModelConfig& c) {
    c.validate();
    return c;
}
}  // namespace

Sgnet::Sgnet(const ModelConfig& config)
    : config_(validated(config)),
      init_rng_(config.seed),
      gcm_(store_, "gcm", config.channels, static_cast<int>(config.scale),
           static_cast<int>(config.res_blocks), static_cast<int>(config.attention_ratio), init_rng_),
      fam_(store_, "fam", config.channels, static_cast<int>(config.sdb_count),
           static_cast<int>(config.scale), static_cast<int>(config.res_blocks), init_rng_) {}

SgnetOutput Sgnet::forward(const Tensor& rgb, const Tensor& d_lr, std::vector<SdbTrace>* traces) const {
    const Shape& rs = rgb.shape();
    const Shape& ds = d_lr.shape();
    const auto s = static_cast<int64_t>(config_.scale);
    if (rs.c != 3 || ds.c != 1) throw ShapeError("sgnet: expected 3-channel RGB and 1-channel depth");
    if (rs.n != ds.n || rs.h != ds.h * s || rs.w != ds.w * s)
        throw ShapeError("sgnet: rgb " + rs.str() + " is not " + std::to_string(s) + "x depth " +
                         ds.str());
    Tensor d_bi = bicubic_resize(d_lr, ScaleFactor::up(static_cast<int>(s)));
    GcmOutput g = gcm_.forward(rgb, d_bi);
    Tensor d_fe = fam_.forward(rgb, d_lr, g.f_ge, traces);
    return {add(d_fe, d_bi), g.g_sr, d_fe, d_bi};
}

void Sgnet::zero_fam_head() {
    for (const char* suffix : {".weight", ".bias"}) {
        for (double& v : store_.tensor(std::string("fam.head") + suffix).mutable_data()) v = 0.0;
    }
}

LossBreakdown loss_total(const Tensor& d_sr, const Tensor& g_sr, const Tensor& d_hr,
                         const ModelConfig& config) {
    if (d_sr.shape() != d_hr.shape())
        throw ShapeError("loss: prediction " + d_sr.shape().str() + " vs ground truth " +
                         d_hr.shape().str());
    if (g_sr.shape() != d_hr.shape())
        throw ShapeError("loss: gradient prediction " + g_sr.shape().str() + " vs " +
                         d_hr.shape().str());
    Tensor l_spa = reduce_mean_abs(d_sr, d_hr);
    Tensor l_gra = reduce_mean_abs(g_sr, gradient_map(d_hr));
    AmplitudePhase sr = decompose(dft2(d_sr));
    AmplitudePhase hr = decompose(dft2(d_hr));
    Tensor l_amp = reduce_mean_abs(sr.amplitude, hr.amplitude);
    Tensor l_pha = reduce_mean_abs(sr.phase, hr.phase);
    Tensor l_fre = add(scale(l_amp, config.lambda1), scale(l_pha, config.lambda2));
    Tensor total = add(add(l_spa, scale(l_gra, config.gamma1)), scale(l_fre, config.gamma2));
    return {l_spa.item(), l_gra.item(), l_amp.item(), l_pha.item(), l_fre.item(), total.item(), total};
}

double rmse(const Tensor& d_sr, const Tensor& d_hr, double unit_scale) {
    if (d_sr.shape() != d_hr.shape())
        throw ShapeError("rmse: shape mismatch " + d_sr.shape().str() + " vs " + d_hr.shape().str());
    if (!(unit_scale > 0.0)) throw ConfigError("rmse: unit_scale must be positive");
    auto a = d_sr.data(), b = d_hr.data();
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return unit_scale * std::sqrt(acc / static_cast<double>(a.size()));
}

}  // namespace sgnet
