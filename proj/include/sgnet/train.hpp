#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sgnet/model.hpp"
#include "sgnet/scene.hpp"

namespace sgnet {

struct TrainConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    uint32_t steps = 100;
    uint32_t batch = 1;
    uint32_t crop = 32;
    uint32_t eval_interval = 50;
    uint32_t train_scenes = 64;
    uint32_t val_scenes = 16;
    // Scene template for both pools; its scale and seed are overridden.
    SceneSpec scene;
    uint64_t seed = 1;
    std::string checkpoint;  // best-val checkpoint; empty disables saving
    std::string log;         // TSV metrics; empty disables logging

    // Throws ConfigError unless counts are >= 1 and crop/scene extents fit the scale.
    void validate(uint32_t scale) const;
};

struct OptimState {
    struct Moments {
        std::vector<double> m;
        std::vector<double> v;
    };
    std::map<std::string, Moments> moments;
    uint64_t step = 0;
};

// Bias-corrected Adam over every parameter; clears the gradients afterwards.
void adam_step(ParamStore& store, OptimState& state, const TrainConfig& cfg);

// Crop of rgb/depth_hr at an offset aligned to the sample's scale; depth_lr is re-degraded.
DepthSample random_crop(const DepthSample& sample, uint32_t crop, Rng& rng);

// Stacks equally-sized samples along the batch axis.
DepthSample stack_samples(const std::vector<DepthSample>& samples);

PoolSpec train_pool_spec(const TrainConfig& cfg, uint32_t scale);
PoolSpec val_pool_spec(const TrainConfig& cfg, uint32_t scale);

struct EvalRow {
    uint64_t seed = 0;
    double rmse_cm = 0.0;
    double baseline_cm = 0.0;  // bicubic up-sampling of the same LR input
};

struct EvalReport {
    std::vector<EvalRow> rows;
    double mean_rmse_cm = 0.0;
    double mean_baseline_cm = 0.0;
};

// Full-image RMSE per sample; throws ConfigError when a sample's scale differs from the model's.
EvalReport evaluate(const Sgnet& model, const std::vector<DepthSample>& pool);
void write_eval_table(std::ostream& out, const EvalReport& report);

struct TrainResult {
    Sgnet model;               // carries the best-val weights (the ones checkpointed)
    LossBreakdown initial;     // probe-batch losses before the first update
    LossBreakdown final;       // probe-batch losses after the last update
    double best_val_rmse_cm = 0.0;
    uint32_t best_step = 0;
    double final_val_rmse_cm = 0.0;  // weights after the last step
    double baseline_rmse_cm = 0.0;
};

// sample -> crop -> forward -> loss -> backward -> adam, with validation every eval_interval
// steps (and at steps 0 and `steps`). progress, when given, receives the TSV lines too.
TrainResult train(const TrainConfig& cfg, const ModelConfig& mcfg, std::ostream* progress = nullptr);

// Keeps freed heap blocks in the process instead of returning them to the OS. Every step allocates
// and frees the same multi-megabyte buffers; without this glibc maps and unmaps them each time.
// No-op off glibc. Call once at program start.
void retain_freed_memory();

inline constexpr const char* kTrainLogHeader = "step\tl_spa\tl_gra\tl_amp\tl_pha\tl_total\trmse_cm";

}  // namespace sgnet
