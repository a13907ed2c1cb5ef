#include "multishot/nn/graph.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

#include "multishot/errors.hpp"

namespace multishot::nn {

namespace {

void check_same_shape(const NodeRef& a, const NodeRef& b, const char* op) {
    if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols()) {
        throw ShapeMismatch(std::string(op) + ": " + std::to_string(a->value.rows()) + "x" +
                            std::to_string(a->value.cols()) + " vs " +
                            std::to_string(b->value.rows()) + "x" +
                            std::to_string(b->value.cols()));
    }
}

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

}  // namespace

NodeRef Graph::make(Mat value, std::vector<NodeRef> parents,
                    std::function<void(Node&)> backprop) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    n->id = nodes_.size();
    for (const auto& p : n->parents) {
        if (p->needs_grad) {
            n->needs_grad = true;
            break;
        }
    }
    if (n->needs_grad) n->backprop = std::move(backprop);
    nodes_.push_back(n);
    return n;
}

NodeRef Graph::constant(Mat v) {
    return make(std::move(v), {}, nullptr);
}

NodeRef Graph::leaf(Param& p) {
    auto n = std::make_shared<Node>();
    n->value = p.value;
    n->needs_grad = true;
    n->param = &p;
    n->id = nodes_.size();
    n->backprop = [](Node& self) { self.param->grad += self.grad; };
    nodes_.push_back(n);
    return n;
}

NodeRef Graph::matmul(const NodeRef& a, const NodeRef& b) {
    if (a->value.cols() != b->value.rows()) {
        throw ShapeMismatch("matmul: inner dims " + std::to_string(a->value.cols()) + " vs " +
                            std::to_string(b->value.rows()));
    }
    return make(a->value * b->value, {a, b}, [](Node& self) {
        auto& a = *self.parents[0];
        auto& b = *self.parents[1];
        if (a.needs_grad) {
            a.ensure_grad();
            a.grad.noalias() += self.grad * b.value.transpose();
        }
        if (b.needs_grad) {
            b.ensure_grad();
            b.grad.noalias() += a.value.transpose() * self.grad;
        }
    });
}

NodeRef Graph::matmul_nt(const NodeRef& a, const NodeRef& b) {
    if (a->value.cols() != b->value.cols()) {
        throw ShapeMismatch("matmul_nt: inner dims " + std::to_string(a->value.cols()) +
                            " vs " + std::to_string(b->value.cols()));
    }
    return make(a->value * b->value.transpose(), {a, b}, [](Node& self) {
        auto& a = *self.parents[0];
        auto& b = *self.parents[1];
        if (a.needs_grad) {
            a.ensure_grad();
            a.grad.noalias() += self.grad * b.value;
        }
        if (b.needs_grad) {
            b.ensure_grad();
            b.grad.noalias() += self.grad.transpose() * a.value;
        }
    });
}

NodeRef Graph::add(const NodeRef& a, const NodeRef& b) {
    check_same_shape(a, b, "add");
    return make(a->value + b->value, {a, b}, [](Node& self) {
        for (auto& p : self.parents) {
            if (p->needs_grad) {
                p->ensure_grad();
                p->grad += self.grad;
            }
        }
    });
}

NodeRef Graph::sub(const NodeRef& a, const NodeRef& b) {
    check_same_shape(a, b, "sub");
    return make(a->value - b->value, {a, b}, [](Node& self) {
        auto& a = *self.parents[0];
        auto& b = *self.parents[1];
        if (a.needs_grad) {
            a.ensure_grad();
            a.grad += self.grad;
        }
        if (b.needs_grad) {
            b.ensure_grad();
            b.grad -= self.grad;
        }
    });
}

NodeRef Graph::hadamard(const NodeRef& a, const NodeRef& b) {
    check_same_shape(a, b, "hadamard");
    return make(a->value.cwiseProduct(b->value), {a, b}, [](Node& self) {
        auto& a = *self.parents[0];
        auto& b = *self.parents[1];
        if (a.needs_grad) {
            a.ensure_grad();
            a.grad += self.grad.cwiseProduct(b.value);
        }
        if (b.needs_grad) {
            b.ensure_grad();
            b.grad += self.grad.cwiseProduct(a.value);
        }
    });
}

NodeRef Graph::scale(const NodeRef& a, double s) {
    return make(a->value * s, {a}, [s](Node& self) {
        auto& a = *self.parents[0];
        if (a.needs_grad) {
            a.ensure_grad();
            a.grad += self.grad * s;
        }
    });
}

NodeRef Graph::add_rowvec(const NodeRef& a, const NodeRef& row) {
    if (row->value.rows() != 1 || row->value.cols() != a->value.cols()) {
        throw ShapeMismatch("add_rowvec: row must be 1x" + std::to_string(a->value.cols()));
    }
    Mat out = a->value;
    out.rowwise() += row->value.row(0);
    return make(std::move(out), {a, row}, [](Node& self) {
        auto& a = *self.parents[0];
        auto& r = *self.parents[1];
        if (a.needs_grad) {
            a.ensure_grad();
            a.grad += self.grad;
        }
        if (r.needs_grad) {
            r.ensure_grad();
            r.grad += self.grad.colwise().sum();
        }
    });
}

NodeRef Graph::gelu(const NodeRef& a) {
    Mat out = a->value.unaryExpr(
        [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); });
    return make(std::move(out), {a}, [](Node& self) {
        auto& a = *self.parents[0];
        if (!a.needs_grad) return;
        a.ensure_grad();
        for (Eigen::Index i = 0; i < a.value.rows(); ++i) {
            for (Eigen::Index j = 0; j < a.value.cols(); ++j) {
                double x = a.value(i, j);
                double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
                double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
                a.grad(i, j) += self.grad(i, j) * (cdf + x * pdf);
            }
        }
    });
}

NodeRef Graph::softmax_rows(const NodeRef& a, const Mat* additive_mask) {
    if (additive_mask && (additive_mask->rows() != a->value.rows() ||
                          additive_mask->cols() != a->value.cols())) {
        throw ShapeMismatch("softmax_rows: mask shape");
    }
    Mat z = a->value;
    if (additive_mask) z += *additive_mask;
    Mat y(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < z.cols(); ++j) mx = std::max(mx, z(i, j));
        double sum = 0.0;
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
            double e = std::exp(z(i, j) - mx);
            y(i, j) = e;
            sum += e;
        }
        y.row(i) /= sum;
    }
    return make(std::move(y), {a}, [](Node& self) {
        auto& a = *self.parents[0];
        if (!a.needs_grad) return;
        a.ensure_grad();
        const Mat& y = self.value;
        for (Eigen::Index i = 0; i < y.rows(); ++i) {
            double dot = self.grad.row(i).cwiseProduct(y.row(i)).sum();
            Mat shifted = self.grad.row(i);
            shifted.array() -= dot;
            a.grad.row(i) += y.row(i).cwiseProduct(shifted);
        }
    });
}

NodeRef Graph::layer_norm(const NodeRef& a, const NodeRef& gain, const NodeRef& bias,
                          double eps) {
    Eigen::Index cols = a->value.cols();
    if (gain->value.rows() != 1 || gain->value.cols() != cols ||
        bias->value.rows() != 1 || bias->value.cols() != cols) {
        throw ShapeMismatch("layer_norm: gain/bias must be 1x" + std::to_string(cols));
    }
    Mat xhat(a->value.rows(), cols);
    std::vector<double> inv_std(static_cast<std::size_t>(a->value.rows()));
    for (Eigen::Index i = 0; i < a->value.rows(); ++i) {
        double mean = a->value.row(i).mean();
        double var = (a->value.row(i).array() - mean).square().mean();
        double is = 1.0 / std::sqrt(var + eps);
        inv_std[static_cast<std::size_t>(i)] = is;
        xhat.row(i) = (a->value.row(i).array() - mean).matrix() * is;
    }
    Mat out = xhat;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        out.row(i) = out.row(i).cwiseProduct(gain->value.row(0)) + bias->value.row(0);
    }
    return make(std::move(out), {a, gain, bias},
                [xhat, inv_std](Node& self) {
                    auto& a = *self.parents[0];
                    auto& g = *self.parents[1];
                    auto& b = *self.parents[2];
                    Eigen::Index cols = xhat.cols();
                    if (g.needs_grad) {
                        g.ensure_grad();
                        for (Eigen::Index i = 0; i < xhat.rows(); ++i)
                            g.grad.row(0) += self.grad.row(i).cwiseProduct(xhat.row(i));
                    }
                    if (b.needs_grad) {
                        b.ensure_grad();
                        b.grad.row(0) += self.grad.colwise().sum();
                    }
                    if (!a.needs_grad) return;
                    a.ensure_grad();
                    for (Eigen::Index i = 0; i < xhat.rows(); ++i) {
                        Mat dxhat = self.grad.row(i).cwiseProduct(g.value.row(0));
                        double m1 = dxhat.mean();
                        double m2 = dxhat.cwiseProduct(xhat.row(i)).mean();
                        a.grad.row(i) +=
                            inv_std[static_cast<std::size_t>(i)] *
                            (dxhat.array() - m1 - xhat.row(i).array() * m2).matrix();
                    }
                });
}

NodeRef Graph::slice_rows(const NodeRef& a, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > a->value.rows()) {
        throw ShapeMismatch("slice_rows: [" + std::to_string(start) + ", " +
                            std::to_string(start + count) + ") out of " +
                            std::to_string(a->value.rows()) + " rows");
    }
    return make(a->value.middleRows(start, count), {a}, [start, count](Node& self) {
        auto& a = *self.parents[0];
        if (!a.needs_grad) return;
        a.ensure_grad();
        a.grad.middleRows(start, count) += self.grad;
    });
}

NodeRef Graph::slice_cols(const NodeRef& a, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > a->value.cols()) {
        throw ShapeMismatch("slice_cols out of range");
    }
    return make(a->value.middleCols(start, count), {a}, [start, count](Node& self) {
        auto& a = *self.parents[0];
        if (!a.needs_grad) return;
        a.ensure_grad();
        a.grad.middleCols(start, count) += self.grad;
    });
}

NodeRef Graph::concat_rows(const std::vector<NodeRef>& parts) {
    if (parts.empty()) throw ShapeMismatch("concat_rows: no parts");
    Eigen::Index cols = parts[0]->value.cols();
    Eigen::Index rows = 0;
    for (const auto& p : parts) {
        if (p->value.cols() != cols) throw ShapeMismatch("concat_rows: column mismatch");
        rows += p->value.rows();
    }
    Mat out(rows, cols);
    Eigen::Index r = 0;
    for (const auto& p : parts) {
        out.middleRows(r, p->value.rows()) = p->value;
        r += p->value.rows();
    }
    return make(std::move(out), parts, [](Node& self) {
        Eigen::Index r = 0;
        for (auto& p : self.parents) {
            if (p->needs_grad) {
                p->ensure_grad();
                p->grad += self.grad.middleRows(r, p->value.rows());
            }
            r += p->value.rows();
        }
    });
}

NodeRef Graph::concat_cols(const std::vector<NodeRef>& parts) {
    if (parts.empty()) throw ShapeMismatch("concat_cols: no parts");
    Eigen::Index rows = parts[0]->value.rows();
    Eigen::Index cols = 0;
    for (const auto& p : parts) {
        if (p->value.rows() != rows) throw ShapeMismatch("concat_cols: row mismatch");
        cols += p->value.cols();
    }
    Mat out(rows, cols);
    Eigen::Index c = 0;
    for (const auto& p : parts) {
        out.middleCols(c, p->value.cols()) = p->value;
        c += p->value.cols();
    }
    return make(std::move(out), parts, [](Node& self) {
        Eigen::Index c = 0;
        for (auto& p : self.parents) {
            if (p->needs_grad) {
                p->ensure_grad();
                p->grad += self.grad.middleCols(c, p->value.cols());
            }
            c += p->value.cols();
        }
    });
}

NodeRef Graph::gather_rows(const NodeRef& table, const std::vector<int>& ids) {
    Mat out(static_cast<Eigen::Index>(ids.size()), table->value.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= table->value.rows()) {
            throw IndexError("gather_rows: id " + std::to_string(ids[i]) + " out of " +
                             std::to_string(table->value.rows()));
        }
        out.row(static_cast<Eigen::Index>(i)) = table->value.row(ids[i]);
    }
    return make(std::move(out), {table}, [ids](Node& self) {
        auto& t = *self.parents[0];
        if (!t.needs_grad) return;
        t.ensure_grad();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            t.grad.row(ids[i]) += self.grad.row(static_cast<Eigen::Index>(i));
        }
    });
}

NodeRef Graph::mean_all(const NodeRef& a) {
    Mat out(1, 1);
    out(0, 0) = a->value.mean();
    return make(std::move(out), {a}, [](Node& self) {
        auto& a = *self.parents[0];
        if (!a.needs_grad) return;
        a.ensure_grad();
        double g = self.grad(0, 0) / static_cast<double>(a.value.size());
        a.grad.array() += g;
    });
}

NodeRef Graph::mse(const NodeRef& a, const NodeRef& b) {
    check_same_shape(a, b, "mse");
    Mat out(1, 1);
    out(0, 0) = (a->value - b->value).squaredNorm() / static_cast<double>(a->value.size());
    return make(std::move(out), {a, b}, [](Node& self) {
        auto& a = *self.parents[0];
        auto& b = *self.parents[1];
        double g = 2.0 * self.grad(0, 0) / static_cast<double>(a.value.size());
        Mat diff = a.value - b.value;
        if (a.needs_grad) {
            a.ensure_grad();
            a.grad += g * diff;
        }
        if (b.needs_grad) {
            b.ensure_grad();
            b.grad -= g * diff;
        }
    });
}

void Graph::backward(const NodeRef& root) {
    if (root->value.rows() != 1 || root->value.cols() != 1) {
        throw ShapeMismatch("backward: root must be a scalar node");
    }
    // Mark ancestors of root; creation ids already give topological order.
    std::vector<char> reachable(nodes_.size(), 0);
    std::vector<Node*> stack{root.get()};
    reachable[root->id] = 1;
    while (!stack.empty()) {
        Node* n = stack.back();
        stack.pop_back();
        for (const auto& p : n->parents) {
            if (!reachable[p->id]) {
                reachable[p->id] = 1;
                stack.push_back(p.get());
            }
        }
    }
    root->ensure_grad();
    root->grad(0, 0) = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        Node& n = *nodes_[i];
        if (!reachable[n.id] || !n.needs_grad || !n.backprop) continue;
        n.ensure_grad();
        n.backprop(n);
    }
}

}  // namespace multishot::nn
