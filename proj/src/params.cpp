#include "sgnet/params.hpp"

#include <algorithm>

#include "sgnet/error.hpp"

namespace sgnet {

Shape shape_from_extents(const std::vector<uint32_t>& extents) {
    if (extents.empty() || extents.size() > 4)
        throw ShapeError("parameter rank must be between 1 and 4");
    int64_t dims[4] = {1, 1, 1, 1};
    const size_t offset = 4 - extents.size();
    for (size_t i = 0; i < extents.size(); ++i) {
        if (extents[i] == 0) throw ShapeError("parameter extent must be positive");
        dims[offset + i] = extents[i];
    }
    return {dims[0], dims[1], dims[2], dims[3]};
}

Tensor& ParamStore::add(const std::string& name, std::vector<uint32_t> extents) {
    Shape s = shape_from_extents(extents);
    insert(name, std::move(extents), Tensor::zeros(s, true));
    return params_.at(name).tensor;
}

void ParamStore::insert(const std::string& name, std::vector<uint32_t> extents, Tensor tensor) {
    if (name.empty()) throw ConfigError("parameter name must not be empty");
    if (params_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
    if (shape_from_extents(extents) != tensor.shape())
        throw ShapeError("parameter '" + name + "' extents do not match tensor shape");
    params_.emplace(name, Parameter{std::move(extents), std::move(tensor)});
}

const Parameter& ParamStore::at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return it->second;
}

Tensor& ParamStore::tensor(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return it->second.tensor;
}

int64_t ParamStore::total_scalars() const {
    int64_t total = 0;
    for (const auto& [name, p] : params_) total += p.tensor.numel();
    return total;
}

void ParamStore::assign_from(const ParamStore& other) {
    if (other.size() != size())
        throw ConfigError("parameter count mismatch: " + std::to_string(other.size()) + " vs " +
                          std::to_string(size()));
    for (auto& [name, p] : params_) {
        const Parameter& src = other.at(name);
        if (src.extents != p.extents) throw ShapeError("extent mismatch for parameter '" + name + "'");
        auto d = p.tensor.mutable_data();
        std::copy(src.tensor.data().begin(), src.tensor.data().end(), d.begin());
    }
}

void ParamStore::zero_grad() {
    for (auto& [name, p] : params_) p.tensor.zero_grad();
}

void ParamStore::clear_grad() {
    for (auto& [name, p] : params_) p.tensor.clear_grad();
}

}  // namespace sgnet
