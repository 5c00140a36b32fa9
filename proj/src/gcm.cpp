#include "sgnet/gcm.hpp"

#include <algorithm>
#include <cmath>

#include "sgnet/error.hpp"

namespace sgnet {

namespace {
constexpr double kMagnitudeFloor = 1e-12;
}

Tensor gradient_map(const Tensor& z) {
    const Shape s = z.shape();
    if (s.h < 3 || s.w < 3) throw ShapeError("gradient_map needs extents >= 3, got " + s.str());
    const double inv_c = 1.0 / static_cast<double>(s.c);
    auto d = z.data();
    Shape os{s.n, 1, s.h, s.w};
    std::vector<double> out(static_cast<size_t>(os.numel()), 0.0);
    for (int64_t n = 0; n < s.n; ++n) {
        double* o = out.data() + n * s.plane();
        for (int64_t c = 0; c < s.c; ++c) {
            const double* p = d.data() + (n * s.c + c) * s.plane();
            for (int64_t y = 0; y < s.h; ++y) {
                const int64_t yu = std::max<int64_t>(y - 1, 0), yd = std::min(y + 1, s.h - 1);
                for (int64_t x = 0; x < s.w; ++x) {
                    const int64_t xl = std::max<int64_t>(x - 1, 0), xr = std::min(x + 1, s.w - 1);
                    const double gx = p[y * s.w + xr] - p[y * s.w + xl];
                    const double gy = p[yd * s.w + x] - p[yu * s.w + x];
                    o[y * s.w + x] += std::sqrt(gx * gx + gy * gy);
                }
            }
        }
        for (int64_t i = 0; i < s.plane(); ++i) o[i] *= inv_c;
    }
    return Tensor::make_result(os, std::move(out), {z}, [s, inv_c](detail::Node& self) {
        auto& parent = self.parents[0];
        if (!parent->requires_grad) return;
        double* g = parent->grad.data();
        const double* d = parent->data.data();
        for (int64_t n = 0; n < s.n; ++n) {
            const double* go = self.grad.data() + n * s.plane();
            for (int64_t c = 0; c < s.c; ++c) {
                const double* p = d + (n * s.c + c) * s.plane();
                double* gp = g + (n * s.c + c) * s.plane();
                for (int64_t y = 0; y < s.h; ++y) {
                    const int64_t yu = std::max<int64_t>(y - 1, 0), yd = std::min(y + 1, s.h - 1);
                    for (int64_t x = 0; x < s.w; ++x) {
                        const int64_t xl = std::max<int64_t>(x - 1, 0), xr = std::min(x + 1, s.w - 1);
                        const double gx = p[y * s.w + xr] - p[y * s.w + xl];
                        const double gy = p[yd * s.w + x] - p[yu * s.w + x];
                        const double m = std::sqrt(gx * gx + gy * gy);
                        if (m < kMagnitudeFloor) continue;
                        const double k = go[y * s.w + x] * inv_c / m;
                        gp[y * s.w + xr] += k * gx;
                        gp[y * s.w + xl] -= k * gx;
                        gp[yd * s.w + x] += k * gy;
                        gp[yu * s.w + x] -= k * gy;
                    }
                }
            }
        }
    });
}

Gcm::Gcm(ParamStore& store, const std::string& name, int64_t channels, int scale, int res_blocks,
         int attention_ratio, Rng& rng)
    : channels_(channels),
      fuse_(store, name + ".calib.fuse", 2, channels, 1, rng),
      group0_(store, name + ".calib.group0", channels, res_blocks, rng),
      group1_(store, name + ".calib.group1", channels, res_blocks, rng),
      attention_(store, name + ".calib.attention", channels, attention_ratio, rng),
      out_(store, name + ".calib.out", channels, 1, 3, rng),
      depth_lift_(store, name + ".depth.lift", 1, channels, 3, rng),
      depth_group_(store, name + ".depth.group", channels, res_blocks, rng),
      grad_lift_(store, name + ".grad.lift", 1, channels, 3, rng),
      grad_group_(store, name + ".grad.group", channels, res_blocks, rng),
      down_(store, name + ".down", channels, channels, ScaleFactor::down(scale), rng) {}

Tensor Gcm::calibrate(const Tensor& g_rgb, const Tensor& g_lr) const {
    Tensor h = fuse_.forward(concat({g_rgb, g_lr}));
    h = attention_.forward(group1_.forward(group0_.forward(h)));
    return out_.forward(h);
}

GcmOutput Gcm::forward(const Tensor& rgb, const Tensor& d_lr_up) const {
    const Shape& rs = rgb.shape();
    const Shape& ds = d_lr_up.shape();
    if (rs.n != ds.n || rs.h != ds.h || rs.w != ds.w)
        throw ShapeError("gcm: rgb " + rs.str() + " and upsampled depth " + ds.str() +
                         " disagree spatially");
    if (ds.c != 1) throw ShapeError("gcm: depth must have one channel");
    Tensor g_sr = calibrate(gradient_map(rgb), gradient_map(d_lr_up));
    Tensor depth_feat = depth_group_.forward(depth_lift_.forward(d_lr_up));
    Tensor grad_feat = grad_group_.forward(grad_lift_.forward(g_sr));
    return {down_.forward(add(depth_feat, grad_feat)), g_sr};
}

}  // namespace sgnet
