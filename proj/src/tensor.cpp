#include "sgnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "sgnet/error.hpp"

namespace sgnet {

namespace {
thread_local bool g_grad_enabled = true;
}

std::string Shape::str() const {
    std::ostringstream os;
    os << "[" << n << "," << c << "," << h << "," << w << "]";
    return os.str();
}

std::vector<double>& detail::Node::ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(shape, 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    return from_data(shape, std::vector<double>(static_cast<size_t>(shape.numel()), value),
                     requires_grad);
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
    if (shape.n < 1 || shape.c < 1 || shape.h < 1 || shape.w < 1)
        throw ShapeError("tensor extents must be positive, got " + shape.str());
    if (static_cast<int64_t>(data.size()) != shape.numel())
        throw ShapeError("data length " + std::to_string(data.size()) + " does not match shape " +
                         shape.str());
    auto node = std::make_shared<detail::Node>();
    node->shape = shape;
    node->data = std::move(data);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1, 1, 1, 1}, {value}, requires_grad);
}

detail::Node& Tensor::node() const {
    if (!node_) throw Error("access to undefined tensor");
    return *node_;
}

const Shape& Tensor::shape() const { return node().shape; }

std::span<const double> Tensor::data() const { return node().data; }

std::span<double> Tensor::mutable_data() {
    auto& nd = node();
    if (!nd.is_leaf()) throw Error("mutable_data on a non-leaf tensor");
    return nd.data;
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape().str());
    return node().data[0];
}

double Tensor::at(int64_t n, int64_t c, int64_t h, int64_t w) const {
    const Shape& s = shape();
    if (n < 0 || n >= s.n || c < 0 || c >= s.c || h < 0 || h >= s.h || w < 0 || w >= s.w)
        throw ShapeError("index out of range for " + s.str());
    return node().data[static_cast<size_t>(((n * s.c + c) * s.h + h) * s.w + w)];
}

bool Tensor::requires_grad() const { return node().requires_grad; }
bool Tensor::is_leaf() const { return node().is_leaf(); }
bool Tensor::has_grad() const { return !node().grad.empty(); }
std::span<const double> Tensor::grad() const { return node().grad; }
std::span<double> Tensor::mutable_grad() { return node().ensure_grad(); }

void Tensor::zero_grad() {
    auto& g = node().grad;
    std::fill(g.begin(), g.end(), 0.0);
}

void Tensor::clear_grad() {
    node().grad.clear();
    node().grad.shrink_to_fit();
}

Tensor Tensor::detach(bool requires_grad) const {
    return from_data(shape(), node().data, requires_grad);
}

Tensor Tensor::make_result(Shape shape, std::vector<double> data, const std::vector<Tensor>& inputs,
                           detail::BackwardFn fn) {
    for (double v : data) {
        if (!std::isfinite(v)) throw NumericError("non-finite value in op output " + shape.str());
    }
    Tensor out = from_data(shape, std::move(data), false);
    if (!g_grad_enabled) return out;
    bool any = false;
    for (const auto& t : inputs) any = any || t.requires_grad();
    if (!any) return out;
    auto& nd = out.node();
    nd.requires_grad = true;
    nd.parents.reserve(inputs.size());
    for (const auto& t : inputs) nd.parents.push_back(t.node_);
    nd.backward = std::move(fn);
    return out;
}

void backward(const Tensor& loss) {
    if (!loss.defined()) throw Error("backward on undefined tensor");
    if (loss.numel() != 1) throw ShapeError("backward requires a scalar loss, got " + loss.shape().str());
    detail::Node* root = &loss.node();
    if (!root->requires_grad) return;

    // Iterative post-order DFS gives a topological order (parents before children).
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> visited;
    std::vector<std::pair<detail::Node*, size_t>> stack;
    stack.emplace_back(root, 0);
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            detail::Node* p = node->parents[next++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    // Interior gradients restart on every sweep; leaves keep accumulating.
    for (auto* nd : order) {
        if (!nd->is_leaf()) nd->grad.assign(nd->data.size(), 0.0);
    }
    root->ensure_grad()[0] += 1.0;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* nd = *it;
        if (nd->is_leaf()) continue;
        for (auto& p : nd->parents) {
            if (p->requires_grad) p->ensure_grad();
        }
        nd->backward(*nd);
    }
}

bool grad_mode_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

}  // namespace sgnet
