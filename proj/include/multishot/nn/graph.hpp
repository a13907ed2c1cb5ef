#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "multishot/nn/params.hpp"

namespace multishot::nn {

struct Node;
using NodeRef = std::shared_ptr<Node>;

struct Node {
    Mat value;
    Mat grad;                // allocated lazily during backward
    bool needs_grad = false;
    std::size_t id = 0;      // creation order, doubles as topological order
    std::vector<NodeRef> parents;
    std::function<void(Node&)> backprop;  // reads this->grad, accumulates into parents
    Param* param = nullptr;  // set on parameter leaves

    void ensure_grad() {
        if (grad.size() == 0) grad = Mat::Zero(value.rows(), value.cols());
    }
};

// Dynamic reverse-mode tape over row-major double matrices. One Graph per
// forward pass; creation order is a valid topological order because every op
// is built from already-existing nodes.
class Graph {
public:
    NodeRef constant(Mat v);
    NodeRef leaf(Param& p);

    NodeRef matmul(const NodeRef& a, const NodeRef& b);     // A * B
    NodeRef matmul_nt(const NodeRef& a, const NodeRef& b);  // A * B^T
    NodeRef add(const NodeRef& a, const NodeRef& b);
    NodeRef sub(const NodeRef& a, const NodeRef& b);
    NodeRef hadamard(const NodeRef& a, const NodeRef& b);
    NodeRef scale(const NodeRef& a, double s);
    NodeRef add_rowvec(const NodeRef& a, const NodeRef& row);  // row is 1 x C
    NodeRef gelu(const NodeRef& a);

    // Per-row softmax with an optional additive mask (use -inf to forbid).
    NodeRef softmax_rows(const NodeRef& a, const Mat* additive_mask = nullptr);

    // Per-row layer norm with learned gain/bias nodes of shape 1 x C.
    NodeRef layer_norm(const NodeRef& a, const NodeRef& gain, const NodeRef& bias,
                       double eps = 1e-5);

    NodeRef slice_rows(const NodeRef& a, Eigen::Index start, Eigen::Index count);
    NodeRef slice_cols(const NodeRef& a, Eigen::Index start, Eigen::Index count);
    NodeRef concat_rows(const std::vector<NodeRef>& parts);
    NodeRef concat_cols(const std::vector<NodeRef>& parts);

    // Embedding lookup: selects rows of `table` by index, duplicates allowed.
    NodeRef gather_rows(const NodeRef& table, const std::vector<int>& ids);

    NodeRef mean_all(const NodeRef& a);                     // 1x1
    NodeRef mse(const NodeRef& a, const NodeRef& b);        // 1x1 mean squared diff

    // Seeds root.grad with 1 and accumulates into every reachable Param.grad.
    void backward(const NodeRef& root);

private:
    NodeRef make(Mat value, std::vector<NodeRef> parents,
                 std::function<void(Node&)> backprop);

    std::vector<NodeRef> nodes_;
};

}  // namespace multishot::nn
