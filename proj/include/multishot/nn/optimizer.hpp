#pragma once

#include <map>
#include <set>
#include <string>

#include "multishot/nn/params.hpp"

namespace multishot::nn {

// SGD with classical momentum. Only parameters in the trainable set are ever
// touched; everything else stays bit-identical across steps.
class SgdMomentum {
public:
    SgdMomentum(double learning_rate, double momentum = 0.9)
        : lr_(learning_rate), momentum_(momentum) {}

    void step(ParamStore& store, const std::set<std::string>& trainable) {
        for (const auto& name : trainable) {
            Param& p = store.at(name);
            Mat& v = velocity_.try_emplace(name, Mat::Zero(p.value.rows(), p.value.cols()))
                         .first->second;
            v = momentum_ * v + p.grad;
            p.value -= lr_ * v;
        }
    }

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }

private:
    double lr_;
    double momentum_;
    std::map<std::string, Mat> velocity_;
};

}  // namespace multishot::nn
