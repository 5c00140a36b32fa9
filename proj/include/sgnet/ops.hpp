#pragma once

#include <cstdint>
#include <vector>

#include "sgnet/tensor.hpp"

namespace sgnet {

// While alive, records which piece of each piecewise op (abs, leaky ReLU, max pooling, the phase
// branch cut) forward passes land on. Equal signatures mean two evaluations took the same smooth
// piece everywhere. Probes do not nest.
class BranchProbe {
public:
    BranchProbe();
    ~BranchProbe();
    BranchProbe(const BranchProbe&) = delete;
    BranchProbe& operator=(const BranchProbe&) = delete;
    uint64_t signature() const;
};

namespace detail {
bool branch_probe_active();
void note_branch(uint64_t piece);
}  // namespace detail

// Cross-correlation (no kernel flip). weight is [Cout, Cin, kh, kw]; bias holds Cout values
// in any layout.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride = 1,
              int padding = 0);

// Elementwise; operand shapes must match exactly.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor abs(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);

// x[N,C,H,W] * gate[N,C,1,1], broadcast over H and W.
Tensor mul_channels(const Tensor& x, const Tensor& gate);

// Channel-axis concatenation and its inverse.
Tensor concat(const std::vector<Tensor>& parts);
Tensor slice_channels(const Tensor& t, int64_t begin, int64_t count);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// mean(|a - b|) over every element.
Tensor reduce_mean_abs(const Tensor& a, const Tensor& b);

enum class PoolMode { Mean, Max };
// Per-channel pooling to [N,C,1,1]. Max routes gradient to the first arg-max in row-major order.
Tensor global_pool(const Tensor& t, PoolMode mode);

/// Resampling factor num/den; one side must be 1.
struct ScaleFactor {
    int num = 1;
    int den = 1;

    static ScaleFactor up(int s) { return {s, 1}; }
    static ScaleFactor down(int s) { return {1, s}; }
    bool operator==(const ScaleFactor&) const = default;
};

// Catmull-Rom (a = -0.5) bicubic resize with half-pixel centers and clamped edges.
// Down-scaling widens the kernel by the factor (antialiased, weights renormalized).
Tensor bicubic_resize(const Tensor& t, ScaleFactor factor);

// One-dimensional resampling taps used by bicubic_resize; exposed for tests and tools.
struct ResampleTap {
    int64_t index;
    double weight;
};
std::vector<std::vector<ResampleTap>> bicubic_taps(int64_t in_len, ScaleFactor factor);
double cubic_kernel(double x);

}  // namespace sgnet
