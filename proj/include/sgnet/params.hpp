#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sgnet/tensor.hpp"

namespace sgnet {

/// A learnable tensor together with its logical extents (rank 1..4).
struct Parameter {
    std::vector<uint32_t> extents;
    Tensor tensor;
};

/// Named learnable tensors, iterated in lexicographic name order.
class ParamStore {
public:
    // Creates a zero-filled parameter. Extents are left-padded with 1s into N,C,H,W.
    Tensor& add(const std::string& name, std::vector<uint32_t> extents);
    // Inserts an existing tensor (e.g. when loading a checkpoint).
    void insert(const std::string& name, std::vector<uint32_t> extents, Tensor tensor);

    bool contains(const std::string& name) const { return params_.count(name) != 0; }
    const Parameter& at(const std::string& name) const;
    Tensor& tensor(const std::string& name);

    const std::map<std::string, Parameter>& entries() const { return params_; }
    size_t size() const { return params_.size(); }
    int64_t total_scalars() const;

    // Copies values from a store with the same names and extents.
    void assign_from(const ParamStore& other);

    void zero_grad();
    void clear_grad();

private:
    std::map<std::string, Parameter> params_;
};

Shape shape_from_extents(const std::vector<uint32_t>& extents);

/// Deterministic 64-bit generator used for initialization, scenes and crops.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}
    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return n == 0 ? 0 : engine_() % n; }
    uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace sgnet
