#pragma once

#include <cstdint>
#include <vector>

#include "sgnet/tensor.hpp"

namespace sgnet {

/// One training/evaluation triple. Depths are in meters.
struct DepthSample {
    Tensor rgb;       // [1,3,sh,sw] in [0,1]
    Tensor depth_hr;  // [1,1,sh,sw], > 0
    Tensor depth_lr;  // [1,1,h,w] = degrade(depth_hr, scale)
    uint32_t scale = 1;
    uint64_t seed = 0;
};

/// Parameters of a random piecewise-smooth scene.
struct SceneSpec {
    int64_t height = 64;
    int64_t width = 64;
    uint32_t scale = 4;
    uint32_t rectangles = 3;
    uint32_t circles = 2;
    uint32_t ramps = 1;
    uint32_t texture_patches = 3;  // RGB-only edges with no depth counterpart
    double z_min = 1.0;
    double z_max = 5.0;
    double noise = 0.02;  // amplitude of the deterministic RGB noise
    uint64_t seed = 0;

    void validate() const;
};

enum class PrimitiveKind { Rectangle, Circle, Ramp, Texture };

/// Axis-aligned rectangle [x0,x1) x [y0,y1) in pixels, or a circle of radius r at (cx, cy).
/// Ramps are rectangles whose depth varies linearly; textures only paint the RGB image.
struct Primitive {
    PrimitiveKind kind = PrimitiveKind::Rectangle;
    int64_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    double cx = 0.0, cy = 0.0, radius = 0.0;
    double depth = 1.0;
    double slope_x = 0.0, slope_y = 0.0;  // meters per pixel, ramps only
    double color[3] = {0.5, 0.5, 0.5};
};

struct SceneLayout {
    int64_t height = 0;
    int64_t width = 0;
    double background_depth = 1.0;
    double background_color[3] = {0.5, 0.5, 0.5};
    double z_min = 0.0;
    double z_max = 0.0;
    double noise = 0.0;
    uint64_t noise_seed = 0;
    std::vector<Primitive> primitives;  // painted in order
};

SceneLayout random_layout(const SceneSpec& spec);
// Rasterizes the layout and derives the LR depth with degrade().
DepthSample render_scene(const SceneLayout& layout, uint32_t scale, uint64_t seed = 0);
DepthSample synth_scene(const SceneSpec& spec);

// Bicubic down-sampling by s (the degradation protocol). s = 1 is the identity.
Tensor degrade(const Tensor& depth_hr, uint32_t scale);

/// A reproducible pool of scenes; scene i uses a seed derived from (seed, i).
struct PoolSpec {
    uint32_t count = 16;
    SceneSpec scene;
    uint64_t seed = 0;
};

std::vector<DepthSample> make_pool(const PoolSpec& spec);

uint64_t mix_seed(uint64_t seed, uint64_t index);

}  // namespace sgnet
