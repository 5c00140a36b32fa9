#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sgnet {

/// Extents of a dense N-C-H-W array.
struct Shape {
    int64_t n = 1;
    int64_t c = 1;
    int64_t h = 1;
    int64_t w = 1;

    int64_t numel() const { return n * c * h * w; }
    int64_t plane() const { return h * w; }
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

namespace detail {

struct Node;
using BackwardFn = std::function<void(Node&)>;

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until populated by backward
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    BackwardFn backward;

    bool is_leaf() const { return !backward; }
    std::vector<double>& ensure_grad();
};

}  // namespace detail

/// Handle to a node of the autodiff graph. Copies share the node.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    int64_t numel() const { return shape().numel(); }

    std::span<const double> data() const;
    // Leaves only; op outputs are immutable once created.
    std::span<double> mutable_data();

    double item() const;
    double at(int64_t n, int64_t c, int64_t h, int64_t w) const;

    bool requires_grad() const;
    bool is_leaf() const;
    bool has_grad() const;
    std::span<const double> grad() const;
    // Allocates a zero gradient if none is present.
    std::span<double> mutable_grad();
    void zero_grad();
    void clear_grad();

    // New leaf holding a copy of the values.
    Tensor detach(bool requires_grad = false) const;

    detail::Node& node() const;
    const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

    // Used by ops: builds an output node, records the graph edge when grad mode is on
    // and some input requires grad. Throws NumericError on non-finite values.
    static Tensor make_result(Shape shape, std::vector<double> data,
                              const std::vector<Tensor>& inputs, detail::BackwardFn fn);

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
    std::shared_ptr<detail::Node> node_;
};

/// Reverse-mode sweep from a scalar loss. Leaf gradients accumulate across calls.
void backward(const Tensor& loss);

bool grad_mode_enabled();

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

}  // namespace sgnet
