#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hybridreg/errors.hpp"

namespace hybridreg::ad {

using Shape = std::vector<int>;

class Tape;

/// Dense f64 tensor, row-major. A tensor is either a plain value or, when
/// created through a Tape, additionally carries its node id so reverse-mode
/// gradients can reach it. Every op validates shapes and rejects non-finite
/// results.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor scalar(double value);
    static Tensor from(Shape shape, std::vector<double> data);

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    int rows() const;
    int cols() const;

    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
    double& operator()(int i, int j);
    double operator()(int i, int j) const;
    /// Value of a one-element tensor.
    double value() const;

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool tracked() const { return tape_ != nullptr; }
    Tape* tape() const { return tape_; }
    int node() const { return node_; }
    /// Same values, no tape association.
    Tensor detached() const;

private:
    friend class Tape;
    Shape shape_;
    std::vector<double> data_;
    Tape* tape_ = nullptr;
    int node_ = -1;
};

/// Result of Tape::backward: per-node gradients, queryable by tensor.
class Gradients {
public:
    /// d(root)/d(t); zeros if the root does not depend on t.
    const Tensor& at(const Tensor& t) const;

private:
    friend class Tape;
    std::vector<Tensor> by_node_;
    std::vector<Tensor> zero_cache_;
};

/// Reverse-mode tape. Single-writer during forward construction; backward is
/// read-only over the recorded graph. Records are appended in topological
/// order by construction (parents always precede children).
class Tape {
public:
    using BackFn = std::function<void(const Tensor& grad_out, std::vector<Tensor>& grads)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Registers a leaf (trainable or input) tensor and returns the tracked copy.
    Tensor leaf(const Tensor& value);

    /// Gradient of a scalar root w.r.t. every node on the tape.
    Gradients backward(const Tensor& root) const;

    int node_count() const { return static_cast<int>(nodes_.size()); }

    /// For op implementations: appends a node and returns its id.
    /// Parent ids of -1 denote constant inputs.
    int record(const Shape& shape, std::vector<int> parents, BackFn back);

    /// Binds an op result to a freshly recorded node.
    void bind(Tensor& t, int node) {
        t.tape_ = this;
        t.node_ = node;
    }

    /// Materializes a zero gradient slot when absent; used by backward fns.
    static Tensor& slot(std::vector<Tensor>& grads, int node, const Shape& shape);

private:
    struct Node {
        Shape shape;
        std::vector<int> parents;
        BackFn back;
    };
    std::vector<Node> nodes_;
};

// ---- forward ops (all record on the tape when any input is tracked) ----

Tensor reshape(const Tensor& a, Shape shape);
Tensor transpose(const Tensor& a);
Tensor matmul(const Tensor& a, const Tensor& b);

/// Elementwise with row-vector [1 x m] / column-vector [n x 1] broadcast
/// against an [n x m] matrix; no other broadcasting.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, double c);
Tensor mul(const Tensor& a, double c);
Tensor neg(const Tensor& a);

Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor abs(const Tensor& a);
/// sqrt(a + eps); eps > 0 keeps the gradient finite at exact zeros.
Tensor sqrt(const Tensor& a, double eps = 0.0);
Tensor clamp_min(const Tensor& a, double floor);

Tensor softmax_rows(const Tensor& a);
Tensor logsumexp_rows(const Tensor& a);  // [n x m] -> [n x 1]
Tensor logsumexp(const Tensor& a);       // -> scalar, numerically stable
Tensor sum(const Tensor& a);             // -> scalar
Tensor mean(const Tensor& a);            // -> scalar
Tensor sum_rows(const Tensor& a);        // [n x m] -> [n x 1]
Tensor sum_cols(const Tensor& a);        // [n x m] -> [1 x m]

/// Pairwise squared L2 distances between rows: [n x d], [m x d] -> [n x m].
Tensor sqdist(const Tensor& a, const Tensor& b);

/// Geometric attention score term: q [n x d], rr [n*n x d] ->
/// out[i, j] = dot(q.row(i), rr.row(i*n + j)).
Tensor qr_scores(const Tensor& q, const Tensor& rr);

/// Rows scaled to unit L2 norm.
Tensor normalize_rows(const Tensor& a);

/// out[k] = a.flat[indices[k]]; backward scatter-adds.
Tensor gather(const Tensor& a, const std::vector<std::int64_t>& indices);

}  // namespace hybridreg::ad
