#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>

namespace multishot::nn {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Param {
    std::string name;
    Mat value;
    Mat grad;  // same shape as value, accumulated across backward passes

    void zero_grad() { grad.setZero(); }
    double grad_norm() const { return grad.norm(); }
};

// Named parameter tensors, iterated in name order so every walk over the
// store is deterministic.
class ParamStore {
public:
    Param& create(const std::string& name, Eigen::Index rows, Eigen::Index cols);
    Param& at(const std::string& name);
    const Param& at(const std::string& name) const;
    bool contains(const std::string& name) const { return params_.count(name) != 0; }
    std::size_t size() const { return params_.size(); }

    void zero_all_grads();

    template <typename Fn>
    void for_each(Fn&& fn) {
        for (auto& [name, p] : params_) fn(p);
    }
    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& [name, p] : params_) fn(p);
    }

private:
    std::map<std::string, Param> params_;
};

// Deterministic gaussian init stream. One instance per model build, consumed
// in parameter creation order.
class InitRng {
public:
    explicit InitRng(std::uint64_t seed) : engine_(seed) {}

    void fill_normal(Mat& m, double stddev) {
        std::normal_distribution<double> dist(0.0, stddev);
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = dist(engine_);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace multishot::nn
