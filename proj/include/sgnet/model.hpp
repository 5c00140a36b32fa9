#pragma once

#include <cstdint>
#include <vector>

#include "sgnet/fam.hpp"
#include "sgnet/gcm.hpp"

namespace sgnet {

/// Architecture and loss hyper-parameters.
struct ModelConfig {
    uint32_t channels = 8;
    uint32_t sdb_count = 3;
    uint32_t scale = 4;
    uint32_t res_blocks = 2;
    uint32_t attention_ratio = 4;
    uint64_t seed = 1;
    double lambda1 = 0.5;  // amplitude weight inside the frequency loss
    double lambda2 = 0.5;  // phase weight inside the frequency loss
    double gamma1 = 0.001; // gradient loss weight
    double gamma2 = 0.002; // frequency loss weight

    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

struct SgnetOutput {
    Tensor d_sr;  // [N,1,sh,sw]
    Tensor g_sr;  // [N,1,sh,sw]
    Tensor d_fe;  // residual predicted on top of the bicubic baseline
    Tensor d_bi;  // bicubic up-sampling of the LR depth
};

/// Full network: D_sr = FAM(I_rgb, D_lr, GCM(I_rgb, up(D_lr))) + up(D_lr).
class Sgnet {
public:
    explicit Sgnet(const ModelConfig& config);
    Sgnet(const Sgnet&) = delete;
    Sgnet& operator=(const Sgnet&) = delete;
    Sgnet(Sgnet&&) = default;
    Sgnet& operator=(Sgnet&&) = default;

    SgnetOutput forward(const Tensor& rgb, const Tensor& d_lr,
                        std::vector<SdbTrace>* traces = nullptr) const;

    const ModelConfig& config() const { return config_; }
    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }

    // Zeroes the FAM head so the network reduces to bicubic up-sampling.
    void zero_fam_head();

private:
    ModelConfig config_;
    ParamStore store_;
    Rng init_rng_;
    Gcm gcm_;
    Fam fam_;
};

struct LossBreakdown {
    double l_spa = 0.0;
    double l_gra = 0.0;
    double l_amp = 0.0;
    double l_pha = 0.0;
    double l_fre = 0.0;
    double l_total = 0.0;
    Tensor total;  // differentiable l_total
};

// Spatial L1 + gamma1 * gradient L1 + gamma2 * (lambda1 * amplitude L1 + lambda2 * phase L1).
// All terms are means over every element of the batch.
LossBreakdown loss_total(const Tensor& d_sr, const Tensor& g_sr, const Tensor& d_hr,
                         const ModelConfig& config);

// unit_scale * sqrt(mean((d_sr - d_hr)^2)); with depths in meters, unit_scale = 100 gives cm.
double rmse(const Tensor& d_sr, const Tensor& d_hr, double unit_scale);

inline constexpr double kCentimetersPerMeter = 100.0;

}  // namespace sgnet
