#include "sgnet/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <span>

#include "sgnet/error.hpp"

namespace sgnet {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

struct ProbeState {
    bool active = false;
    uint64_t hash = 0;
};
thread_local ProbeState g_probe;
constexpr uint64_t kFnvOffset = 14695981039346656037ull, kFnvPrime = 1099511628211ull;

void note_signs(std::span<const double> x) {
    if (!g_probe.active) return;
    for (double v : x) detail::note_branch(v < 0.0);
}

RowMat aligned_copy(const double* p, int64_t rows, int64_t cols) { return ConstMapMat(p, rows, cols); }

// Gradient buffer of parent i, or nullptr when that parent does not need one.
double* parent_grad(detail::Node& self, size_t i) {
    auto& p = self.parents[i];
    return p->requires_grad ? p->grad.data() : nullptr;
}

const double* parent_data(detail::Node& self, size_t i) { return self.parents[i]->data.data(); }

void require_same(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                         b.shape().str());
}

// Unary pointwise op given value and derivative-from-(input, output) functions.
template <class F, class D>
Tensor unary(const Tensor& a, F f, D dfdx) {
    auto in = a.data();
    std::vector<double> out(in.size());
    for (size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
    return Tensor::make_result(a.shape(), std::move(out), {a}, [dfdx](detail::Node& self) {
        double* ga = parent_grad(self, 0);
        if (!ga) return;
        const double* x = parent_data(self, 0);
        for (size_t i = 0; i < self.data.size(); ++i)
            ga[i] += self.grad[i] * dfdx(x[i], self.data[i]);
    });
}

// Row r of the column matrix starts at cols + r * ld.
void im2col(const double* x, int64_t cin, int64_t h, int64_t w, int64_t kh, int64_t kw,
            int stride, int pad, int64_t ho, int64_t wo, double* cols, int64_t ld) {
    for (int64_t c = 0; c < cin; ++c) {
        for (int64_t ky = 0; ky < kh; ++ky) {
            for (int64_t kx = 0; kx < kw; ++kx) {
                double* row = cols + ((c * kh + ky) * kw + kx) * ld;
                for (int64_t oy = 0; oy < ho; ++oy) {
                    const int64_t iy = oy * stride - pad + ky;
                    double* dst = row + oy * wo;
                    if (iy < 0 || iy >= h) {
                        std::fill(dst, dst + wo, 0.0);
                        continue;
                    }
                    const double* src = x + (c * h + iy) * w;
                    for (int64_t ox = 0; ox < wo; ++ox) {
                        const int64_t ix = ox * stride - pad + kx;
                        dst[ox] = (ix < 0 || ix >= w) ? 0.0 : src[ix];
                    }
                }
            }
        }
    }
}

void col2im(const double* cols, int64_t cin, int64_t h, int64_t w, int64_t kh, int64_t kw,
            int stride, int pad, int64_t ho, int64_t wo, double* dx, int64_t ld) {
    for (int64_t c = 0; c < cin; ++c) {
        for (int64_t ky = 0; ky < kh; ++ky) {
            for (int64_t kx = 0; kx < kw; ++kx) {
                const double* row = cols + ((c * kh + ky) * kw + kx) * ld;
                for (int64_t oy = 0; oy < ho; ++oy) {
                    const int64_t iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    double* dst = dx + (c * h + iy) * w;
                    const double* src = row + oy * wo;
                    for (int64_t ox = 0; ox < wo; ++ox) {
                        const int64_t ix = ox * stride - pad + kx;
                        if (ix >= 0 && ix < w) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

}  // namespace

BranchProbe::BranchProbe() {
    if (g_probe.active) throw Error("BranchProbe: probes do not nest");
    g_probe = {true, kFnvOffset};
}
BranchProbe::~BranchProbe() { g_probe.active = false; }
uint64_t BranchProbe::signature() const { return g_probe.hash; }

bool detail::branch_probe_active() { return g_probe.active; }
void detail::note_branch(uint64_t piece) { g_probe.hash = (g_probe.hash ^ piece) * kFnvPrime; }

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int padding) {
    const Shape& xs = input.shape();
    const Shape& ws = weight.shape();
    const int64_t cout = ws.n, cin = ws.c, kh = ws.h, kw = ws.w;
    if (xs.c != cin)
        throw ShapeError("conv2d: input has " + std::to_string(xs.c) + " channels, weight expects " +
                         std::to_string(cin));
    if (bias.numel() != cout) throw ShapeError("conv2d: bias size does not match output channels");
    if (stride < 1 || padding < 0) throw ShapeError("conv2d: invalid stride or padding");
    if (kh % 2 == 0 || kw % 2 == 0) throw ShapeError("conv2d: kernel extents must be odd");
    const int64_t hp = xs.h + 2 * padding, wp = xs.w + 2 * padding;
    if (hp < kh || wp < kw) throw ShapeError("conv2d: padded input smaller than kernel");
    if ((hp - kh) % stride != 0 || (wp - kw) % stride != 0)
        throw ShapeError("conv2d: output extent is not integral");
    const int64_t ho = (hp - kh) / stride + 1, wo = (wp - kw) / stride + 1;
    const int64_t k = cin * kh * kw, p = ho * wo;
    const int64_t np = xs.n * p;

    Shape os{xs.n, cout, ho, wo};
    std::vector<double> out(static_cast<size_t>(os.numel()));
    // One GEMM for the whole batch: samples sit side by side along the columns. The column matrix is
    // kept for the weight gradient. Operands live in Eigen-owned (aligned) storage because with wide
    // SIMD the summation order of Eigen's kernels follows the buffer address, and tensor buffers are
    // only malloc-aligned.
    auto cols = std::make_shared<RowMat>(k, np);
    for (int64_t n = 0; n < xs.n; ++n)
        im2col(input.data().data() + n * cin * xs.plane(), cin, xs.h, xs.w, kh, kw, stride, padding, ho, wo,
               cols->data() + n * p, np);
    const RowMat wm = ConstMapMat(weight.data().data(), cout, k);
    const RowMat prod = wm * *cols;
    const double* bptr = bias.data().data();
    for (int64_t n = 0; n < xs.n; ++n)
        for (int64_t o = 0; o < cout; ++o) {
            const double* src = prod.data() + o * np + n * p;
            double* dst = out.data() + (n * cout + o) * p;
            for (int64_t i = 0; i < p; ++i) dst[i] = src[i] + bptr[o];
        }
    if (!grad_mode_enabled()) cols.reset();

    return Tensor::make_result(
        os, std::move(out), {input, weight, bias},
        [=](detail::Node& self) {
            double* gx = parent_grad(self, 0);
            double* gw = parent_grad(self, 1);
            double* gb = parent_grad(self, 2);
            RowMat gy(cout, np);
            for (int64_t n = 0; n < xs.n; ++n)
                for (int64_t o = 0; o < cout; ++o)
                    std::copy_n(self.grad.data() + (n * cout + o) * p, p, gy.data() + o * np + n * p);
            if (gw) {
                const RowMat dw = gy * cols->transpose();
                MapMat(gw, cout, k) += dw;
            }
            if (gb) {
                for (int64_t o = 0; o < cout; ++o) gb[o] += gy.row(o).sum();
            }
            if (gx) {
                const RowMat dcols = aligned_copy(parent_data(self, 1), cout, k).transpose() * gy;
                for (int64_t n = 0; n < xs.n; ++n)
                    col2im(dcols.data() + n * p, cin, xs.h, xs.w, kh, kw, stride, padding, ho, wo,
                           gx + n * cin * xs.plane(), np);
            }
        });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same(a, b, "add");
    auto x = a.data(), y = b.data();
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
    return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
        for (size_t j = 0; j < 2; ++j) {
            if (double* g = parent_grad(self, j))
                for (size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same(a, b, "sub");
    auto x = a.data(), y = b.data();
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
    return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
        if (double* g = parent_grad(self, 0))
            for (size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
        if (double* g = parent_grad(self, 1))
            for (size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same(a, b, "mul");
    auto x = a.data(), y = b.data();
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
    return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
        const double* xa = parent_data(self, 0);
        const double* xb = parent_data(self, 1);
        if (double* g = parent_grad(self, 0))
            for (size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * xb[i];
        if (double* g = parent_grad(self, 1))
            for (size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * xa[i];
    });
}

Tensor abs(const Tensor& a) {
    note_signs(a.data());
    return unary(
        a, [](double x) { return std::abs(x); },
        [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor leaky_relu(const Tensor& a, double slope) {
    note_signs(a.data());
    return unary(
        a, [slope](double x) { return x > 0.0 ? x : slope * x; },
        [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Tensor sigmoid(const Tensor& a) {
    return unary(
        a,
        [](double x) {
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            const double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
    return unary(
        a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& a) {
    return unary(
        a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor scale(const Tensor& a, double factor) {
    return unary(
        a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double value) {
    return unary(
        a, [value](double x) { return x + value; }, [](double, double) { return 1.0; });
}

Tensor mul_channels(const Tensor& x, const Tensor& gate) {
    const Shape& s = x.shape();
    const Shape& gs = gate.shape();
    if (gs.n != s.n || gs.c != s.c || gs.h != 1 || gs.w != 1)
        throw ShapeError("mul_channels: gate " + gs.str() + " does not broadcast to " + s.str());
    const int64_t plane = s.plane(), planes = s.n * s.c;
    auto xd = x.data(), gd = gate.data();
    std::vector<double> out(xd.size());
    for (int64_t q = 0; q < planes; ++q)
        for (int64_t i = 0; i < plane; ++i) out[q * plane + i] = xd[q * plane + i] * gd[q];
    return Tensor::make_result(s, std::move(out), {x, gate}, [=](detail::Node& self) {
        const double* xv = parent_data(self, 0);
        const double* gv = parent_data(self, 1);
        double* gx = parent_grad(self, 0);
        double* gg = parent_grad(self, 1);
        for (int64_t q = 0; q < planes; ++q) {
            const double* go = self.grad.data() + q * plane;
            if (gx)
                for (int64_t i = 0; i < plane; ++i) gx[q * plane + i] += go[i] * gv[q];
            if (gg) {
                double acc = 0.0;
                for (int64_t i = 0; i < plane; ++i) acc += go[i] * xv[q * plane + i];
                gg[q] += acc;
            }
        }
    });
}

Tensor concat(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat: empty part list");
    const Shape& s0 = parts.front().shape();
    int64_t channels = 0;
    std::vector<int64_t> offsets;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        if (s.n != s0.n || s.h != s0.h || s.w != s0.w)
            throw ShapeError("concat: mismatched extents " + s.str() + " vs " + s0.str());
        offsets.push_back(channels);
        channels += s.c;
    }
    Shape os{s0.n, channels, s0.h, s0.w};
    const int64_t plane = s0.plane();
    std::vector<double> out(static_cast<size_t>(os.numel()));
    for (size_t j = 0; j < parts.size(); ++j) {
        const int64_t c = parts[j].shape().c;
        auto d = parts[j].data();
        for (int64_t n = 0; n < s0.n; ++n)
            std::copy_n(d.begin() + n * c * plane, c * plane,
                        out.begin() + (n * channels + offsets[j]) * plane);
    }
    return Tensor::make_result(os, std::move(out), parts, [=](detail::Node& self) {
        for (size_t j = 0; j < self.parents.size(); ++j) {
            double* g = parent_grad(self, j);
            if (!g) continue;
            const int64_t c = self.parents[j]->shape.c;
            for (int64_t n = 0; n < os.n; ++n) {
                const double* src = self.grad.data() + (n * channels + offsets[j]) * plane;
                double* dst = g + n * c * plane;
                for (int64_t i = 0; i < c * plane; ++i) dst[i] += src[i];
            }
        }
    });
}

Tensor slice_channels(const Tensor& t, int64_t begin, int64_t count) {
    const Shape& s = t.shape();
    if (begin < 0 || count < 1 || begin + count > s.c)
        throw ShapeError("slice_channels: range out of bounds for " + s.str());
    Shape os{s.n, count, s.h, s.w};
    const int64_t plane = s.plane();
    auto d = t.data();
    std::vector<double> out(static_cast<size_t>(os.numel()));
    for (int64_t n = 0; n < s.n; ++n)
        std::copy_n(d.begin() + (n * s.c + begin) * plane, count * plane,
                    out.begin() + n * count * plane);
    return Tensor::make_result(os, std::move(out), {t}, [=](detail::Node& self) {
        double* g = parent_grad(self, 0);
        if (!g) return;
        for (int64_t n = 0; n < s.n; ++n) {
            const double* src = self.grad.data() + n * count * plane;
            double* dst = g + (n * s.c + begin) * plane;
            for (int64_t i = 0; i < count * plane; ++i) dst[i] += src[i];
        }
    });
}

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v;
    return Tensor::make_result({1, 1, 1, 1}, {acc}, {a}, [](detail::Node& self) {
        double* g = parent_grad(self, 0);
        if (!g) return;
        const double go = self.grad[0];
        for (size_t i = 0; i < self.parents[0]->data.size(); ++i) g[i] += go;
    });
}

Tensor mean(const Tensor& a) {
    const double inv = 1.0 / static_cast<double>(a.numel());
    double acc = 0.0;
    for (double v : a.data()) acc += v;
    return Tensor::make_result({1, 1, 1, 1}, {acc * inv}, {a}, [inv](detail::Node& self) {
        double* g = parent_grad(self, 0);
        if (!g) return;
        const double go = self.grad[0] * inv;
        for (size_t i = 0; i < self.parents[0]->data.size(); ++i) g[i] += go;
    });
}

Tensor reduce_mean_abs(const Tensor& a, const Tensor& b) {
    require_same(a, b, "reduce_mean_abs");
    auto x = a.data(), y = b.data();
    const double inv = 1.0 / static_cast<double>(x.size());
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] - y[i]);
    if (detail::branch_probe_active())
        for (size_t i = 0; i < x.size(); ++i) detail::note_branch(x[i] < y[i]);
    return Tensor::make_result({1, 1, 1, 1}, {acc * inv}, {a, b}, [inv](detail::Node& self) {
        const double* xa = parent_data(self, 0);
        const double* xb = parent_data(self, 1);
        double* ga = parent_grad(self, 0);
        double* gb = parent_grad(self, 1);
        const double go = self.grad[0] * inv;
        const size_t count = self.parents[0]->data.size();
        for (size_t i = 0; i < count; ++i) {
            const double d = xa[i] - xb[i];
            const double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            if (ga) ga[i] += go * sgn;
            if (gb) gb[i] -= go * sgn;
        }
    });
}

Tensor global_pool(const Tensor& t, PoolMode mode) {
    const Shape& s = t.shape();
    const int64_t plane = s.plane(), planes = s.n * s.c;
    auto d = t.data();
    std::vector<double> out(static_cast<size_t>(planes));
    std::vector<int64_t> argmax(mode == PoolMode::Max ? planes : 0);
    for (int64_t q = 0; q < planes; ++q) {
        const double* p = d.data() + q * plane;
        if (mode == PoolMode::Mean) {
            double acc = 0.0;
            for (int64_t i = 0; i < plane; ++i) acc += p[i];
            out[q] = acc / static_cast<double>(plane);
        } else {
            int64_t best = 0;
            for (int64_t i = 1; i < plane; ++i)
                if (p[i] > p[best]) best = i;
            argmax[q] = best;
            if (detail::branch_probe_active()) detail::note_branch(static_cast<uint64_t>(best));
            out[q] = p[best];
        }
    }
    return Tensor::make_result(
        {s.n, s.c, 1, 1}, std::move(out), {t},
        [=, argmax = std::move(argmax)](detail::Node& self) {
            double* g = parent_grad(self, 0);
            if (!g) return;
            for (int64_t q = 0; q < planes; ++q) {
                const double go = self.grad[q];
                if (mode == PoolMode::Mean) {
                    const double share = go / static_cast<double>(plane);
                    for (int64_t i = 0; i < plane; ++i) g[q * plane + i] += share;
                } else {
                    g[q * plane + argmax[q]] += go;
                }
            }
        });
}

double cubic_kernel(double x) {
    constexpr double a = -0.5;
    const double ax = std::abs(x);
    if (ax <= 1.0) return ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0;
    if (ax < 2.0) return ((a * ax - 5.0 * a) * ax + 8.0 * a) * ax - 4.0 * a;
    return 0.0;
}

namespace {
bool supported_factor(int v) { return v == 1 || v == 2 || v == 4 || v == 8 || v == 16; }
}  // namespace

std::vector<std::vector<ResampleTap>> bicubic_taps(int64_t in_len, ScaleFactor factor) {
    if (!(factor.num == 1 || factor.den == 1) || !supported_factor(factor.num) ||
        !supported_factor(factor.den))
        throw ShapeError("bicubic_resize: unsupported factor " + std::to_string(factor.num) + "/" +
                         std::to_string(factor.den));
    if ((in_len * factor.num) % factor.den != 0)
        throw ShapeError("bicubic_resize: extent " + std::to_string(in_len) +
                         " is not divisible by " + std::to_string(factor.den));
    const int64_t out_len = in_len * factor.num / factor.den;
    const double ratio = static_cast<double>(factor.num) / static_cast<double>(factor.den);
    // Down-scaling stretches the kernel over 1/ratio input pixels.
    const double stretch = ratio < 1.0 ? ratio : 1.0;
    const double support = 2.0 / stretch;

    std::vector<std::vector<ResampleTap>> taps(static_cast<size_t>(out_len));
    for (int64_t o = 0; o < out_len; ++o) {
        const double center = (static_cast<double>(o) + 0.5) / ratio - 0.5;
        const auto first = static_cast<int64_t>(std::floor(center - support)) + 1;
        const auto last = static_cast<int64_t>(std::floor(center + support));
        auto& row = taps[static_cast<size_t>(o)];
        double total = 0.0;
        for (int64_t j = first; j <= last; ++j) {
            const double wgt = cubic_kernel((center - static_cast<double>(j)) * stretch);
            if (wgt == 0.0) continue;
            row.push_back({std::clamp<int64_t>(j, 0, in_len - 1), wgt});
            total += wgt;
        }
        for (auto& tap : row) tap.weight /= total;
    }
    return taps;
}

namespace {

using Taps = std::vector<std::vector<ResampleTap>>;

// Applies taps along W (horizontal) for every row of every plane.
void resample_rows(const double* in, int64_t rows, int64_t in_w, const Taps& taps, double* out) {
    const auto out_w = static_cast<int64_t>(taps.size());
    for (int64_t r = 0; r < rows; ++r) {
        const double* src = in + r * in_w;
        double* dst = out + r * out_w;
        for (int64_t o = 0; o < out_w; ++o) {
            double acc = 0.0;
            for (const auto& t : taps[o]) acc += t.weight * src[t.index];
            dst[o] = acc;
        }
    }
}

void resample_rows_adjoint(const double* gout, int64_t rows, int64_t in_w, const Taps& taps,
                           double* gin) {
    const auto out_w = static_cast<int64_t>(taps.size());
    for (int64_t r = 0; r < rows; ++r) {
        const double* src = gout + r * out_w;
        double* dst = gin + r * in_w;
        for (int64_t o = 0; o < out_w; ++o)
            for (const auto& t : taps[o]) dst[t.index] += t.weight * src[o];
    }
}

// Applies taps along H for each plane.
void resample_cols(const double* in, int64_t planes, int64_t in_h, int64_t w, const Taps& taps,
                   double* out) {
    const auto out_h = static_cast<int64_t>(taps.size());
    for (int64_t q = 0; q < planes; ++q) {
        const double* src = in + q * in_h * w;
        double* dst = out + q * out_h * w;
        for (int64_t o = 0; o < out_h; ++o) {
            double* drow = dst + o * w;
            std::fill(drow, drow + w, 0.0);
            for (const auto& t : taps[o]) {
                const double* srow = src + t.index * w;
                for (int64_t x = 0; x < w; ++x) drow[x] += t.weight * srow[x];
            }
        }
    }
}

void resample_cols_adjoint(const double* gout, int64_t planes, int64_t in_h, int64_t w,
                           const Taps& taps, double* gin) {
    const auto out_h = static_cast<int64_t>(taps.size());
    for (int64_t q = 0; q < planes; ++q) {
        const double* src = gout + q * out_h * w;
        double* dst = gin + q * in_h * w;
        for (int64_t o = 0; o < out_h; ++o) {
            const double* srow = src + o * w;
            for (const auto& t : taps[o]) {
                double* drow = dst + t.index * w;
                for (int64_t x = 0; x < w; ++x) drow[x] += t.weight * srow[x];
            }
        }
    }
}

}  // namespace

Tensor bicubic_resize(const Tensor& t, ScaleFactor factor) {
    const Shape& s = t.shape();
    auto taps_w = std::make_shared<Taps>(bicubic_taps(s.w, factor));
    auto taps_h = std::make_shared<Taps>(bicubic_taps(s.h, factor));
    const auto ow = static_cast<int64_t>(taps_w->size());
    const auto oh = static_cast<int64_t>(taps_h->size());
    const int64_t planes = s.n * s.c;
    Shape os{s.n, s.c, oh, ow};

    std::vector<double> tmp(static_cast<size_t>(planes * s.h * ow));
    resample_rows(t.data().data(), planes * s.h, s.w, *taps_w, tmp.data());
    std::vector<double> out(static_cast<size_t>(os.numel()));
    resample_cols(tmp.data(), planes, s.h, ow, *taps_h, out.data());

    return Tensor::make_result(os, std::move(out), {t}, [=](detail::Node& self) {
        double* g = parent_grad(self, 0);
        if (!g) return;
        std::vector<double> gtmp(static_cast<size_t>(planes * s.h * ow), 0.0);
        resample_cols_adjoint(self.grad.data(), planes, s.h, ow, *taps_h, gtmp.data());
        resample_rows_adjoint(gtmp.data(), planes * s.h, s.w, *taps_w, g);
    });
}

}  // namespace sgnet
