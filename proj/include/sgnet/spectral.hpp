#pragma once

#include <complex>
#include <span>
#include <vector>

#include "sgnet/tensor.hpp"

namespace sgnet {

struct ComplexSpectrum {
    Tensor real;
    Tensor imag;
};

struct AmplitudePhase {
    Tensor amplitude;  // >= 0
    Tensor phase;      // in (-pi, pi]
};

// Below this amplitude, decompose() passes no gradient (atan2 is singular at the origin).
inline constexpr double kAmplitudeEpsilon = 1e-8;

// Unnormalized forward 2D DFT of every (n, c) plane:
//   S[u,v] = sum_{x,y} t[x,y] exp(-2 pi i (u x / H + v y / W)).
// Self-conjugate bins (DC and Nyquist rows/columns) get an exact +0 imaginary part.
ComplexSpectrum dft2(const Tensor& t);

// 1/(H W)-normalized inverse; the imaginary residue is discarded.
Tensor idft2(const ComplexSpectrum& s);

AmplitudePhase decompose(const ComplexSpectrum& s);
ComplexSpectrum compose(const AmplitudePhase& ap);

/// Mixed-radix FFT for a fixed length. Prime factors fall back to a direct O(p^2) butterfly.
class Fft1d {
public:
    explicit Fft1d(int64_t n);

    int64_t size() const { return n_; }
    // Unnormalized; inverse uses the conjugate twiddles. `in` is read with the given stride.
    void transform(const std::complex<double>* in, int64_t stride, std::complex<double>* out,
                   bool inverse) const;

private:
    void recurse(const std::complex<double>* in, int64_t stride, int64_t len,
                 std::complex<double>* out, size_t factor_index, int64_t twiddle_step,
                 bool inverse) const;

    int64_t n_;
    std::vector<int64_t> factors_;
    std::vector<std::complex<double>> twiddles_;  // exp(-2 pi i j / n)
};

// In-place unnormalized 2D transform of a row-major h x w plane.
void fft2_plane(std::span<std::complex<double>> plane, int64_t h, int64_t w, bool inverse);

}  // namespace sgnet
