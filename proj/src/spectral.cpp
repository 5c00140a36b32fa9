#include "sgnet/spectral.hpp"

#include <cmath>
#include <numbers>

#include "sgnet/error.hpp"
#include "sgnet/ops.hpp"

namespace sgnet {

using cplx = std::complex<double>;

namespace {
constexpr int64_t kMaxDirectRadix = 16;

// Plain complex product; std::complex's operator* goes through the Annex G NaN/Inf fix-ups.
inline cplx cmul(const cplx& a, const cplx& b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
}  // namespace

Fft1d::Fft1d(int64_t n) : n_(n) {
    if (n < 1) throw ShapeError("fft length must be positive");
    int64_t rest = n;
    for (int64_t p = 2; p * p <= rest; ++p) {
        while (rest % p == 0) {
            factors_.push_back(p);
            rest /= p;
        }
    }
    if (rest > 1) factors_.push_back(rest);
    twiddles_.resize(static_cast<size_t>(n));
    for (int64_t j = 0; j < n; ++j) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        twiddles_[static_cast<size_t>(j)] = {std::cos(angle), std::sin(angle)};
    }
}

void Fft1d::transform(const cplx* in, int64_t stride, cplx* out, bool inverse) const {
    recurse(in, stride, n_, out, 0, 1, inverse);
}

void Fft1d::recurse(const cplx* in, int64_t stride, int64_t len, cplx* out, size_t factor_index,
                    int64_t twiddle_step, bool inverse) const {
    if (len == 1) {
        out[0] = in[0];
        return;
    }
    if (len == 2) {
        out[0] = in[0] + in[stride];
        out[1] = in[0] - in[stride];
        return;
    }
    const int64_t p = factors_[factor_index];
    const int64_t m = len / p;
    for (int64_t r = 0; r < p; ++r)
        recurse(in + r * stride, stride * p, m, out + r * m, factor_index + 1, twiddle_step * p,
                inverse);

    // out holds p interleaved sub-transforms Y_r of length m; combine into X[k + q m].
    const auto twiddle = [&](int64_t j) {
        const cplx& tw = twiddles_[static_cast<size_t>(j * twiddle_step)];
        return inverse ? std::conj(tw) : tw;
    };
    if (p == 2) {
        for (int64_t k = 0; k < m; ++k) {
            const cplx a = out[k];
            const cplx b = cmul(out[m + k], twiddle(k));
            out[k] = a + b;
            out[m + k] = a - b;
        }
        return;
    }
    cplx y[kMaxDirectRadix];
    std::vector<cplx> heap;
    cplx* ys = y;
    if (p > kMaxDirectRadix) {
        heap.resize(static_cast<size_t>(p));
        ys = heap.data();
    }
    for (int64_t k = 0; k < m; ++k) {
        for (int64_t r = 0; r < p; ++r) ys[r] = out[r * m + k];
        for (int64_t q = 0; q < p; ++q) {
            const int64_t idx = k + q * m;
            cplx acc = ys[0];
            for (int64_t r = 1; r < p; ++r) acc += cmul(ys[r], twiddle(r * idx % len));
            out[idx] = acc;
        }
    }
}

namespace {

void fft2_with(std::span<cplx> plane, const Fft1d& rows, const Fft1d& cols, bool inverse,
               std::vector<cplx>& buf) {
    const int64_t h = cols.size(), w = rows.size();
    for (int64_t y = 0; y < h; ++y) {
        rows.transform(plane.data() + y * w, 1, buf.data(), inverse);
        std::copy_n(buf.begin(), w, plane.begin() + y * w);
    }
    for (int64_t x = 0; x < w; ++x) {
        cols.transform(plane.data() + x, w, buf.data(), inverse);
        for (int64_t y = 0; y < h; ++y) plane[y * w + x] = buf[y];
    }
}

}  // namespace

void fft2_plane(std::span<cplx> plane, int64_t h, int64_t w, bool inverse) {
    if (static_cast<int64_t>(plane.size()) != h * w) throw ShapeError("fft2_plane: size mismatch");
    Fft1d rows(w), cols(h);
    std::vector<cplx> buf(static_cast<size_t>(std::max(h, w)));
    fft2_with(plane, rows, cols, inverse, buf);
}

namespace {

bool self_conjugate(int64_t u, int64_t len) { return u == 0 || 2 * u == len; }

// Applies fft2_plane to every plane of (re, im) and returns the complex planes.
std::vector<cplx> transform_planes(const Shape& s, std::span<const double> re,
                                   std::span<const double> im, bool inverse) {
    std::vector<cplx> buf(static_cast<size_t>(s.numel()));
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = {re[i], im.empty() ? 0.0 : im[i]};
    const int64_t plane = s.plane();
    const Fft1d rows(s.w), cols(s.h);
    std::vector<cplx> scratch(static_cast<size_t>(std::max(s.h, s.w)));
    for (int64_t q = 0; q < s.n * s.c; ++q)
        fft2_with(std::span<cplx>(buf.data() + q * plane, static_cast<size_t>(plane)), rows, cols,
                  inverse, scratch);
    return buf;
}

double* parent_grad(detail::Node& self, size_t i) {
    auto& p = self.parents[i];
    return p->requires_grad ? p->grad.data() : nullptr;
}

void require_pair(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": component shapes differ " + a.shape().str() + " vs " +
                         b.shape().str());
}

}  // namespace

ComplexSpectrum dft2(const Tensor& t) {
    const Shape s = t.shape();
    auto spec = transform_planes(s, t.data(), {}, false);
    std::vector<double> re(spec.size()), im(spec.size());
    for (size_t i = 0; i < spec.size(); ++i) {
        re[i] = spec[i].real();
        im[i] = spec[i].imag();
    }
    for (int64_t q = 0; q < s.n * s.c; ++q)
        for (int64_t u = 0; u < s.h; ++u)
            for (int64_t v = 0; v < s.w; ++v)
                if (self_conjugate(u, s.h) && self_conjugate(v, s.w)) im[(q * s.h + u) * s.w + v] = 0.0;

    // The transform is linear, so each output component back-propagates on its own:
    // d/dx of <g, Re F x> is Re(F^H g), and of <g, Im F x> is Re(F^H (i g)).
    auto back = [s](bool imag_part) {
        return [s, imag_part](detail::Node& self) {
            double* g = parent_grad(self, 0);
            if (!g) return;
            std::vector<double> zeros(self.grad.size(), 0.0);
            auto adj = imag_part ? transform_planes(s, zeros, self.grad, true)
                                 : transform_planes(s, self.grad, {}, true);
            for (size_t i = 0; i < adj.size(); ++i) g[i] += adj[i].real();
        };
    };
    ComplexSpectrum out;
    out.real = Tensor::make_result(s, std::move(re), {t}, back(false));
    out.imag = Tensor::make_result(s, std::move(im), {t}, back(true));
    return out;
}

Tensor idft2(const ComplexSpectrum& spec) {
    require_pair(spec.real, spec.imag, "idft2");
    const Shape s = spec.real.shape();
    const double inv = 1.0 / static_cast<double>(s.plane());
    auto planes = transform_planes(s, spec.real.data(), spec.imag.data(), true);
    std::vector<double> out(planes.size());
    for (size_t i = 0; i < planes.size(); ++i) out[i] = planes[i].real() * inv;
    return Tensor::make_result(s, std::move(out), {spec.real, spec.imag}, [s, inv](detail::Node& self) {
        double* gr = parent_grad(self, 0);
        double* gi = parent_grad(self, 1);
        auto fwd = transform_planes(s, self.grad, {}, false);
        for (size_t i = 0; i < fwd.size(); ++i) {
            if (gr) gr[i] += fwd[i].real() * inv;
            if (gi) gi[i] += fwd[i].imag() * inv;
        }
    });
}

AmplitudePhase decompose(const ComplexSpectrum& spec) {
    require_pair(spec.real, spec.imag, "decompose");
    const Shape s = spec.real.shape();
    auto re = spec.real.data(), im = spec.imag.data();
    std::vector<double> amp(re.size()), pha(re.size());
    for (size_t i = 0; i < re.size(); ++i) {
        amp[i] = std::hypot(re[i], im[i]);
        double p = std::atan2(im[i], re[i]);
        if (p == -std::numbers::pi) p = std::numbers::pi;
        pha[i] = p;
        if (detail::branch_probe_active()) detail::note_branch(re[i] < 0.0 && im[i] < 0.0);
    }
    AmplitudePhase out;
    out.amplitude = Tensor::make_result(s, std::move(amp), {spec.real, spec.imag}, [](detail::Node& self) {
        double* gr = parent_grad(self, 0);
        double* gi = parent_grad(self, 1);
        const double* r = self.parents[0]->data.data();
        const double* m = self.parents[1]->data.data();
        for (size_t i = 0; i < self.data.size(); ++i) {
            const double a = self.data[i];
            if (a < kAmplitudeEpsilon) continue;
            if (gr) gr[i] += self.grad[i] * r[i] / a;
            if (gi) gi[i] += self.grad[i] * m[i] / a;
        }
    });
    out.phase = Tensor::make_result(s, std::move(pha), {spec.real, spec.imag}, [](detail::Node& self) {
        double* gr = parent_grad(self, 0);
        double* gi = parent_grad(self, 1);
        const double* r = self.parents[0]->data.data();
        const double* m = self.parents[1]->data.data();
        for (size_t i = 0; i < self.data.size(); ++i) {
            const double a = std::hypot(r[i], m[i]);
            if (a < kAmplitudeEpsilon) continue;
            const double a2 = a * a;
            if (gr) gr[i] -= self.grad[i] * m[i] / a2;
            if (gi) gi[i] += self.grad[i] * r[i] / a2;
        }
    });
    return out;
}

ComplexSpectrum compose(const AmplitudePhase& ap) {
    require_pair(ap.amplitude, ap.phase, "compose");
    const Shape s = ap.amplitude.shape();
    auto a = ap.amplitude.data(), p = ap.phase.data();
    std::vector<double> re(a.size()), im(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        re[i] = a[i] * std::cos(p[i]);
        im[i] = a[i] * std::sin(p[i]);
    }
    ComplexSpectrum out;
    out.real = Tensor::make_result(s, std::move(re), {ap.amplitude, ap.phase}, [](detail::Node& self) {
        double* ga = parent_grad(self, 0);
        double* gp = parent_grad(self, 1);
        const double* amp = self.parents[0]->data.data();
        const double* pha = self.parents[1]->data.data();
        for (size_t i = 0; i < self.data.size(); ++i) {
            if (ga) ga[i] += self.grad[i] * std::cos(pha[i]);
            if (gp) gp[i] -= self.grad[i] * amp[i] * std::sin(pha[i]);
        }
    });
    out.imag = Tensor::make_result(s, std::move(im), {ap.amplitude, ap.phase}, [](detail::Node& self) {
        double* ga = parent_grad(self, 0);
        double* gp = parent_grad(self, 1);
        const double* amp = self.parents[0]->data.data();
        const double* pha = self.parents[1]->data.data();
        for (size_t i = 0; i < self.data.size(); ++i) {
            if (ga) ga[i] += self.grad[i] * std::sin(pha[i]);
            if (gp) gp[i] += self.grad[i] * amp[i] * std::cos(pha[i]);
        }
    });
    return out;
}

}  // namespace sgnet
