#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sgnet/model.hpp"
#include "sgnet/scene.hpp"

namespace sgnet {

struct GradcheckConfig {
    ModelConfig model{.channels = 8, .sdb_count = 2, .scale = 2, .res_blocks = 1};
    int64_t lr_height = 8;
    int64_t lr_width = 8;
    uint64_t sample_seed = 7;
    double step = 1e-5;       // central-difference step
    double rel_tol = 1e-5;
    double abs_floor = 1e-8;  // differences below this pass regardless of magnitude
    // Zero-initialized biases put leaky-ReLU inputs exactly on the kink wherever the feature is
    // exactly zero (e.g. the phase of a positive DC bin), so the check runs at init + U(-jitter, jitter).
    double jitter = 0.05;
    uint64_t jitter_seed = 11;
};

struct GradcheckEntry {
    std::string name;
    int64_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct GradcheckReport {
    int64_t checked = 0;
    int64_t failed = 0;
    double max_rel_error = 0.0;  // over entries whose difference exceeds abs_floor
    double max_abs_error = 0.0;
    // Entries whose stencil crossed a kink and missed at `step`; they are judged at step / 10 or
    // step / 100 instead, whichever first keeps both sides on the piece of the unperturbed point.
    int64_t restepped = 0;
    std::vector<GradcheckEntry> failures;  // at most kMaxRecordedFailures
    bool passed() const { return checked > 0 && failed == 0; }
};

inline constexpr size_t kMaxRecordedFailures = 32;

// |a - n| <= abs_floor, or |a - n| / max(|a|, |n|) < rel_tol.
bool gradient_matches(double analytic, double numeric, double rel_tol, double abs_floor);

// Checks d l_total / d theta for every scalar of every parameter against central differences.
// progress(done, total) is called after each parameter tensor.
GradcheckReport gradcheck_model(Sgnet& model, const DepthSample& sample, const GradcheckConfig& cfg,
                                 const std::function<void(int64_t, int64_t)>& progress = {});

// Builds the model and the synthetic sample described by cfg, then runs gradcheck_model.
GradcheckReport run_gradcheck(const GradcheckConfig& cfg,
                              const std::function<void(int64_t, int64_t)>& progress = {});

}  // namespace sgnet
