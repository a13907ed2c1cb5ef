#include "multishot/nn/params.hpp"

#include "multishot/errors.hpp"

namespace multishot::nn {

Param& ParamStore::create(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    auto [it, inserted] = params_.try_emplace(name);
    if (!inserted) throw IncompatibleCheckpoint("duplicate parameter name " + name);
    Param& p = it->second;
    p.name = name;
    p.value = Mat::Zero(rows, cols);
    p.grad = Mat::Zero(rows, cols);
    return p;
}

Param& ParamStore::at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw IncompatibleCheckpoint("missing parameter " + name);
    return it->second;
}

const Param& ParamStore::at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw IncompatibleCheckpoint("missing parameter " + name);
    return it->second;
}

void ParamStore::zero_all_grads() {
    for (auto& [name, p] : params_) p.zero_grad();
}

}  // namespace multishot::nn
