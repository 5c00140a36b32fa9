#include "sgnet/scene.hpp"

#include <algorithm>
#include <cmath>

#include "sgnet/error.hpp"
#include "sgnet/ops.hpp"
#include "sgnet/params.hpp"

namespace sgnet {

uint64_t mix_seed(uint64_t seed, uint64_t index) {
    // splitmix64 finalizer over the combined value
    uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void SceneSpec::validate() const {
    if (scale < 1) throw ConfigError("scene scale must be positive");
    if (height < 3 || width < 3) throw ConfigError("scene extents must be at least 3");
    if (height % scale != 0 || width % scale != 0)
        throw ConfigError("scene extents " + std::to_string(height) + "x" + std::to_string(width) +
                          " are not divisible by scale " + std::to_string(scale));
    if (!(z_min > 0.0) || !(z_max > z_min)) throw ConfigError("depth range must satisfy 0 < z_min < z_max");
    if (!(noise >= 0.0)) throw ConfigError("noise amplitude must be non-negative");
}

namespace {

void random_color(Rng& rng, double* rgb) {
    for (int k = 0; k < 3; ++k) rgb[k] = rng.uniform(0.1, 0.9);
}

Primitive random_box(Rng& rng, const SceneSpec& spec, PrimitiveKind kind) {
    Primitive p;
    p.kind = kind;
    const auto min_side = std::max<int64_t>(3, std::min(spec.height, spec.width) / 8);
    const int64_t w = min_side + static_cast<int64_t>(rng.below(static_cast<uint64_t>(spec.width / 2)));
    const int64_t h = min_side + static_cast<int64_t>(rng.below(static_cast<uint64_t>(spec.height / 2)));
    p.x0 = static_cast<int64_t>(rng.below(static_cast<uint64_t>(std::max<int64_t>(1, spec.width - w))));
    p.y0 = static_cast<int64_t>(rng.below(static_cast<uint64_t>(std::max<int64_t>(1, spec.height - h))));
    p.x1 = std::min(spec.width, p.x0 + w);
    p.y1 = std::min(spec.height, p.y0 + h);
    return p;
}

}  // namespace

SceneLayout random_layout(const SceneSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    SceneLayout layout;
    layout.height = spec.height;
    layout.width = spec.width;
    layout.z_min = spec.z_min;
    layout.z_max = spec.z_max;
    layout.noise = spec.noise;
    layout.noise_seed = mix_seed(spec.seed, 0xC0FFEE);
    // Background sits in the far half of the range; objects are placed in front of it.
    layout.background_depth = rng.uniform(spec.z_min + 0.5 * (spec.z_max - spec.z_min), spec.z_max);
    random_color(rng, layout.background_color);
    const double near_hi = layout.background_depth;

    for (uint32_t i = 0; i < spec.rectangles; ++i) {
        Primitive p = random_box(rng, spec, PrimitiveKind::Rectangle);
        p.depth = rng.uniform(spec.z_min, near_hi);
        random_color(rng, p.color);
        layout.primitives.push_back(p);
    }
    for (uint32_t i = 0; i < spec.ramps; ++i) {
        Primitive p = random_box(rng, spec, PrimitiveKind::Ramp);
        p.depth = rng.uniform(spec.z_min, near_hi);
        const double span = 0.5 * (spec.z_max - spec.z_min) / static_cast<double>(spec.width);
        p.slope_x = rng.uniform(-span, span);
        p.slope_y = rng.uniform(-span, span);
        random_color(rng, p.color);
        layout.primitives.push_back(p);
    }
    for (uint32_t i = 0; i < spec.circles; ++i) {
        Primitive p;
        p.kind = PrimitiveKind::Circle;
        const double extent = static_cast<double>(std::min(spec.height, spec.width));
        p.radius = rng.uniform(0.08 * extent, 0.25 * extent);
        p.cx = rng.uniform(0.0, static_cast<double>(spec.width));
        p.cy = rng.uniform(0.0, static_cast<double>(spec.height));
        p.depth = rng.uniform(spec.z_min, near_hi);
        random_color(rng, p.color);
        layout.primitives.push_back(p);
    }
    for (uint32_t i = 0; i < spec.texture_patches; ++i) {
        Primitive p = random_box(rng, spec, PrimitiveKind::Texture);
        random_color(rng, p.color);
        layout.primitives.push_back(p);
    }
    return layout;
}

namespace {

bool covers(const Primitive& p, int64_t x, int64_t y) {
    if (p.kind == PrimitiveKind::Circle) {
        const double dx = static_cast<double>(x) + 0.5 - p.cx;
        const double dy = static_cast<double>(y) + 0.5 - p.cy;
        return dx * dx + dy * dy <= p.radius * p.radius;
    }
    return x >= p.x0 && x < p.x1 && y >= p.y0 && y < p.y1;
}

}  // namespace

DepthSample render_scene(const SceneLayout& layout, uint32_t scale, uint64_t seed) {
    const int64_t h = layout.height, w = layout.width;
    if (h < 1 || w < 1) throw ConfigError("scene layout has empty extents");
    std::vector<double> depth(static_cast<size_t>(h * w), layout.background_depth);
    std::vector<double> rgb(static_cast<size_t>(3 * h * w));
    for (int k = 0; k < 3; ++k)
        std::fill_n(rgb.begin() + k * h * w, h * w, layout.background_color[k]);

    for (const Primitive& p : layout.primitives) {
        for (int64_t y = 0; y < h; ++y) {
            for (int64_t x = 0; x < w; ++x) {
                if (!covers(p, x, y)) continue;
                const size_t i = static_cast<size_t>(y * w + x);
                double shade = 1.0;
                if (p.kind != PrimitiveKind::Texture) {
                    double z = p.depth;
                    if (p.kind == PrimitiveKind::Ramp) {
                        z += p.slope_x * static_cast<double>(x - p.x0) +
                             p.slope_y * static_cast<double>(y - p.y0);
                        z = std::clamp(z, layout.z_min, layout.z_max);
                        // mild shading so the ramp is visible but edge-free in RGB
                        shade = 0.85 + 0.15 * (z - layout.z_min) / (layout.z_max - layout.z_min);
                    }
                    depth[i] = z;
                }
                for (int k = 0; k < 3; ++k) rgb[static_cast<size_t>(k * h * w) + i] = p.color[k] * shade;
            }
        }
    }
    if (layout.noise > 0.0) {
        Rng rng(layout.noise_seed);
        for (double& v : rgb) v = std::clamp(v + rng.uniform(-layout.noise, layout.noise), 0.0, 1.0);
    }

    DepthSample sample;
    sample.rgb = Tensor::from_data({1, 3, h, w}, std::move(rgb));
    sample.depth_hr = Tensor::from_data({1, 1, h, w}, std::move(depth));
    sample.depth_lr = degrade(sample.depth_hr, scale);
    sample.scale = scale;
    sample.seed = seed;
    for (double z : sample.depth_lr.data()) {
        if (!(z > 0.0)) throw NumericError("degraded depth is not strictly positive");
    }
    return sample;
}

DepthSample synth_scene(const SceneSpec& spec) {
    return render_scene(random_layout(spec), spec.scale, spec.seed);
}

Tensor degrade(const Tensor& depth_hr, uint32_t scale) {
    if (scale == 1) return depth_hr.detach();
    const Shape& s = depth_hr.shape();
    if (s.h % scale != 0 || s.w % scale != 0)
        throw ShapeError("degrade: extents " + s.str() + " not divisible by " + std::to_string(scale));
    NoGradGuard no_grad;
    return bicubic_resize(depth_hr, ScaleFactor::down(static_cast<int>(scale)));
}

std::vector<DepthSample> make_pool(const PoolSpec& spec) {
    std::vector<DepthSample> pool;
    pool.reserve(spec.count);
    for (uint32_t i = 0; i < spec.count; ++i) {
        SceneSpec scene = spec.scene;
        scene.seed = mix_seed(spec.seed, i);
        pool.push_back(synth_scene(scene));
    }
    return pool;
}

}  // namespace sgnet
