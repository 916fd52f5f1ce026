#include "hybridreg/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hybridreg::ad {

namespace {

std::int64_t shape_size(const Shape& s) {
    std::int64_t n = 1;
    for (int d : s) n *= d;
    return n;
}

void check_finite(const Tensor& t, const char* op) {
    for (double v : t.data())
        if (!std::isfinite(v)) throw NonFinite(std::string(op) + ": non-finite value produced");
}

Tape* result_tape(const Tensor& a, const Tensor& b) {
    if (a.tracked() && b.tracked() && a.tape() != b.tape())
        throw UsageError("operands live on different tapes");
    if (a.tracked()) return a.tape();
    if (b.tracked()) return b.tape();
    return nullptr;
}

// How an operand maps onto the [n x m] output of an elementwise op.
enum class Map { Same, Row, Col };

struct BroadcastPlan {
    Shape out;
    Map a = Map::Same, b = Map::Same;
    int n = 0, m = 0;
};

BroadcastPlan plan(const Tensor& a, const Tensor& b, const char* op) {
    BroadcastPlan p;
    if (a.shape() == b.shape()) {
        p.out = a.shape();
        if (a.rank() == 2) {
            p.n = a.rows();
            p.m = a.cols();
        } else {
            p.n = 1;
            p.m = static_cast<int>(a.size());
        }
        return p;
    }
    if (a.rank() == 2 && b.rank() == 2) {
        const int n = a.rows(), m = a.cols();
        if (b.rows() == 1 && b.cols() == m) {
            p = {a.shape(), Map::Same, Map::Row, n, m};
            return p;
        }
        if (b.rows() == n && b.cols() == 1) {
            p = {a.shape(), Map::Same, Map::Col, n, m};
            return p;
        }
        const int bn = b.rows(), bm = b.cols();
        if (a.rows() == 1 && a.cols() == bm) {
            p = {b.shape(), Map::Row, Map::Same, bn, bm};
            return p;
        }
        if (a.rows() == bn && a.cols() == 1) {
            p = {b.shape(), Map::Col, Map::Same, bn, bm};
            return p;
        }
    }
    throw ShapeMismatch(std::string(op) + ": incompatible shapes");
}

inline std::int64_t map_index(Map m, int i, int j, int cols) {
    switch (m) {
        case Map::Same: return static_cast<std::int64_t>(i) * cols + j;
        case Map::Row: return j;
        case Map::Col: return i;
    }
    return 0;
}

// Elementwise binary with broadcast; fa/fb give the partials at an element.
template <class F, class DA, class DB>
Tensor ew_binary(const Tensor& a, const Tensor& b, const char* op, F f, DA fa, DB fb) {
    const BroadcastPlan p = plan(a, b, op);
    Tensor out = Tensor::zeros(p.out);
    for (int i = 0; i < p.n; ++i)
        for (int j = 0; j < p.m; ++j) {
            const double av = a[map_index(p.a, i, j, p.m)];
            const double bv = b[map_index(p.b, i, j, p.m)];
            out[static_cast<std::int64_t>(i) * p.m + j] = f(av, bv);
        }
    check_finite(out, op);

    Tape* tp = result_tape(a, b);
    if (!tp) return out;
    const Tensor av = a.detached(), bv = b.detached();
    const int pa = a.tracked() ? a.node() : -1;
    const int pb = b.tracked() ? b.node() : -1;
    const int node = tp->record(p.out, {pa, pb},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            for (int i = 0; i < p.n; ++i)
                for (int j = 0; j < p.m; ++j) {
                    const double gv = g[static_cast<std::int64_t>(i) * p.m + j];
                    const double x = av[map_index(p.a, i, j, p.m)];
                    const double y = bv[map_index(p.b, i, j, p.m)];
                    if (pa >= 0)
                        Tape::slot(grads, pa, av.shape())[map_index(p.a, i, j, p.m)] +=
                            gv * fa(x, y);
                    if (pb >= 0)
                        Tape::slot(grads, pb, bv.shape())[map_index(p.b, i, j, p.m)] +=
                            gv * fb(x, y);
                }
        });
    tp->bind(out, node);
    return out;
}

// Elementwise unary; df receives (x, f(x)).
template <class F, class DF>
Tensor ew_unary(const Tensor& a, const char* op, F f, DF df) {
    Tensor out = Tensor::zeros(a.shape());
    for (std::int64_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    check_finite(out, op);
    if (!a.tracked()) return out;
    Tape* tp = a.tape();
    const Tensor av = a.detached(), ov = out.detached();
    const int pa = a.node();
    const int node = tp->record(a.shape(), {pa},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            Tensor& ga = Tape::slot(grads, pa, av.shape());
            for (std::int64_t i = 0; i < av.size(); ++i) ga[i] += g[i] * df(av[i], ov[i]);
        });
    tp->bind(out, node);
    return out;
}

}  // namespace

// ---- Tensor ----

Tensor Tensor::zeros(Shape shape) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_.assign(static_cast<std::size_t>(shape_size(t.shape_)), 0.0);
    return t;
}

Tensor Tensor::full(Shape shape, double value) {
    Tensor t = zeros(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

Tensor Tensor::scalar(double value) { return full({1}, value); }

Tensor Tensor::from(Shape shape, std::vector<double> data) {
    if (shape_size(shape) != static_cast<std::int64_t>(data.size()))
        throw ShapeMismatch("Tensor::from: data length does not match shape");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(data);
    return t;
}

int Tensor::rows() const {
    if (rank() != 2) throw ShapeMismatch("rows(): tensor is not rank 2");
    return shape_[0];
}

int Tensor::cols() const {
    if (rank() != 2) throw ShapeMismatch("cols(): tensor is not rank 2");
    return shape_[1];
}

double& Tensor::operator()(int i, int j) {
    return data_[static_cast<std::size_t>(i) * cols() + j];
}

double Tensor::operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * cols() + j];
}

double Tensor::value() const {
    if (size() != 1) throw ShapeMismatch("value(): tensor is not a scalar");
    return data_[0];
}

Tensor Tensor::detached() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = data_;
    return t;
}

// ---- Tape ----

Tensor Tape::leaf(const Tensor& value) {
    Tensor t = value.detached();
    const int node = record(t.shape(), {}, nullptr);
    bind(t, node);
    return t;
}

int Tape::record(const Shape& shape, std::vector<int> parents, BackFn back) {
    const int id = static_cast<int>(nodes_.size());
    for (int p : parents)
        if (p >= id) throw UsageError("tape: parent does not precede child");
    nodes_.push_back({shape, std::move(parents), std::move(back)});
    return id;
}

Tensor& Tape::slot(std::vector<Tensor>& grads, int node, const Shape& shape) {
    Tensor& g = grads[static_cast<std::size_t>(node)];
    if (g.size() == 0) g = Tensor::zeros(shape);
    return g;
}

Gradients Tape::backward(const Tensor& root) const {
    if (root.tape() != this) throw UsageError("backward: root is not on this tape");
    if (root.size() != 1) throw RootNotScalar("backward: root must be scalar");

    Gradients out;
    out.by_node_.resize(nodes_.size());
    slot(out.by_node_, root.node(), {1})[0] = 1.0;
    for (int i = root.node(); i >= 0; --i) {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        const Tensor& g = out.by_node_[static_cast<std::size_t>(i)];
        if (g.size() == 0 || !n.back) continue;
        n.back(g, out.by_node_);
    }
    // Nodes the root never touched report zero gradients.
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (out.by_node_[i].size() == 0) out.by_node_[i] = Tensor::zeros(nodes_[i].shape);
    return out;
}

const Tensor& Gradients::at(const Tensor& t) const {
    if (!t.tracked()) throw UsageError("Gradients::at: tensor is not tracked");
    return by_node_[static_cast<std::size_t>(t.node())];
}

// ---- ops ----

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_size(shape) != a.size()) throw ShapeMismatch("reshape: element count changes");
    Tensor out = Tensor::from(shape, a.data());
    if (!a.tracked()) return out;
    Tape* tp = a.tape();
    const int pa = a.node();
    const Shape old = a.shape();
    const int node = tp->record(shape, {pa},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            Tensor& ga = Tape::slot(grads, pa, old);
            for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        });
    tp->bind(out, node);
    return out;
}

Tensor transpose(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    Tensor out = Tensor::zeros({m, n});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out(j, i) = a(i, j);
    if (!a.tracked()) return out;
    Tape* tp = a.tape();
    const int pa = a.node();
    const int node = tp->record(out.shape(), {pa},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            Tensor& ga = Tape::slot(grads, pa, {n, m});
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) ga(i, j) += g(j, i);
        });
    tp->bind(out, node);
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows())
        throw ShapeMismatch("matmul: inner dimensions disagree");
    const int n = a.rows(), k = a.cols(), m = b.cols();
    Tensor out = Tensor::zeros({n, m});
    for (int i = 0; i < n; ++i)
        for (int p = 0; p < k; ++p) {
            const double av = a(i, p);
            if (av == 0.0) continue;
            for (int j = 0; j < m; ++j) out(i, j) += av * b(p, j);
        }
    check_finite(out, "matmul");

    Tape* tp = result_tape(a, b);
    if (!tp) return out;
    const Tensor av = a.detached(), bv = b.detached();
    const int pa = a.tracked() ? a.node() : -1;
    const int pb = b.tracked() ? b.node() : -1;
    const int node = tp->record(out.shape(), {pa, pb},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            if (pa >= 0) {  // dA = g . B^T
                Tensor& ga = Tape::slot(grads, pa, {n, k});
                for (int i = 0; i < n; ++i)
                    for (int p = 0; p < k; ++p) {
                        double acc = 0.0;
                        for (int j = 0; j < m; ++j) acc += g(i, j) * bv(p, j);
                        ga(i, p) += acc;
                    }
            }
            if (pb >= 0) {  // dB = A^T . g
                Tensor& gb = Tape::slot(grads, pb, {k, m});
                for (int p = 0; p < k; ++p)
                    for (int i = 0; i < n; ++i) {
                        const double apv = av(i, p);
                        if (apv == 0.0) continue;
                        for (int j = 0; j < m; ++j) gb(p, j) += apv * g(i, j);
                    }
            }
        });
    tp->bind(out, node);
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    return ew_binary(a, b, "add", [](double x, double y) { return x + y; },
                     [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return ew_binary(a, b, "sub", [](double x, double y) { return x - y; },
                     [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return ew_binary(a, b, "mul", [](double x, double y) { return x * y; },
                     [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return ew_binary(a, b, "div", [](double x, double y) { return x / y; },
                     [](double, double y) { return 1.0 / y; },
                     [](double x, double y) { return -x / (y * y); });
}

Tensor add(const Tensor& a, double c) {
    return ew_unary(a, "add_const", [=](double x) { return x + c; },
                    [](double, double) { return 1.0; });
}

Tensor mul(const Tensor& a, double c) {
    return ew_unary(a, "scale", [=](double x) { return x * c; },
                    [=](double, double) { return c; });
}

Tensor neg(const Tensor& a) { return mul(a, -1.0); }

Tensor exp(const Tensor& a) {
    return ew_unary(a, "exp", [](double x) { return std::exp(x); },
                    [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
    return ew_unary(a, "log", [](double x) { return std::log(x); },
                    [](double x, double) { return 1.0 / x; });
}

Tensor sigmoid(const Tensor& a) {
    return ew_unary(a, "sigmoid",
                    [](double x) {
                        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                        : std::exp(x) / (1.0 + std::exp(x));
                    },
                    [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
    return ew_unary(a, "tanh", [](double x) { return std::tanh(x); },
                    [](double, double y) { return 1.0 - y * y; });
}

Tensor abs(const Tensor& a) {
    return ew_unary(a, "abs", [](double x) { return std::abs(x); },
                    [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor sqrt(const Tensor& a, double eps) {
    return ew_unary(a, "sqrt", [=](double x) { return std::sqrt(x + eps); },
                    [](double, double y) { return 0.5 / y; });
}

Tensor clamp_min(const Tensor& a, double floor) {
    return ew_unary(a, "clamp_min", [=](double x) { return x < floor ? floor : x; },
                    [=](double x, double) { return x < floor ? 0.0 : 1.0; });
}

Tensor softmax_rows(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    Tensor out = Tensor::zeros({n, m});
    for (int i = 0; i < n; ++i) {
        double mx = a(i, 0);
        for (int j = 1; j < m; ++j) mx = std::max(mx, a(i, j));
        double denom = 0.0;
        for (int j = 0; j < m; ++j) denom += std::exp(a(i, j) - mx);
        for (int j = 0; j < m; ++j) out(i, j) = std::exp(a(i, j) - mx) / denom;
    }
    check_finite(out, "softmax_rows");
    if (!a.tracked()) return out;
    Tape* tp = a.tape();
    const Tensor ov = out.detached();
    const int pa = a.node();
    const int node = tp->record(out.shape(), {pa},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            Tensor& ga = Tape::slot(grads, pa, {n, m});
            for (int i = 0; i < n; ++i) {
                double dot = 0.0;
                for (int j = 0; j < m; ++j) dot += g(i, j) * ov(i, j);
                for (int j = 0; j < m; ++j) ga(i, j) += ov(i, j) * (g(i, j) - dot);
            }
        });
    tp->bind(out, node);
    return out;
}

Tensor logsumexp_rows(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    Tensor out = Tensor::zeros({n, 1});
    for (int i = 0; i < n; ++i) {
        double mx = a(i, 0);
        for (int j = 1; j < m; ++j) mx = std::max(mx, a(i, j));
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += std::exp(a(i, j) - mx);
        out[i] = mx + std::log(acc);
    }
    check_finite(out, "logsumexp_rows");
    if (!a.tracked()) return out;
    Tape* tp = a.tape();
    const Tensor av = a.detached(), ov = out.detached();
    const int pa = a.node();
    const int node = tp->record(out.shape(), {pa},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            Tensor& ga = Tape::slot(grads, pa, {n, m});
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) ga(i, j) += g[i] * std::exp(av(i, j) - ov[i]);
        });
    tp->bind(out, node);
    return out;
}

Tensor logsumexp(const Tensor& a) {
    double mx = a[0];
    for (std::int64_t i = 1; i < a.size(); ++i) mx = std::max(mx, a[i]);
    double acc = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) acc += std::exp(a[i] - mx);
    Tensor out = Tensor::scalar(mx + std::log(acc));
    check_finite(out, "logsumexp");
    if (!a.tracked()) return out;
    Tape* tp = a.tape();
    const Tensor av = a.detached();
    const double lse = out[0];
    const int pa = a.node();
    const int node = tp->record({1}, {pa},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            Tensor& ga = Tape::slot(grads, pa, av.shape());
            for (std::int64_t i = 0; i < av.size(); ++i)
                ga[i] += g[0] * std::exp(av[i] - lse);
        });
    tp->bind(out, node);
    return out;
}

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) acc += a[i];
    Tensor out = Tensor::scalar(acc);
    check_finite(out, "sum");
    if (!a.tracked()) return out;
    Tape* tp = a.tape();
    const Shape as = a.shape();
    const int pa = a.node();
    const int node = tp->record({1}, {pa},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            Tensor& ga = Tape::slot(grads, pa, as);
            for (std::int64_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
        });
    tp->bind(out, node);
    return out;
}

Tensor mean(const Tensor& a) { return mul(sum(a), 1.0 / static_cast<double>(a.size())); }

Tensor sum_rows(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    Tensor out = Tensor::zeros({n, 1});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out[i] += a(i, j);
    check_finite(out, "sum_rows");
    if (!a.tracked()) return out;
    Tape* tp = a.tape();
    const int pa = a.node();
    const int node = tp->record(out.shape(), {pa},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            Tensor& ga = Tape::slot(grads, pa, {n, m});
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) ga(i, j) += g[i];
        });
    tp->bind(out, node);
    return out;
}

Tensor sum_cols(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    Tensor out = Tensor::zeros({1, m});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out[j] += a(i, j);
    check_finite(out, "sum_cols");
    if (!a.tracked()) return out;
    Tape* tp = a.tape();
    const int pa = a.node();
    const int node = tp->record(out.shape(), {pa},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            Tensor& ga = Tape::slot(grads, pa, {n, m});
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) ga(i, j) += g[j];
        });
    tp->bind(out, node);
    return out;
}

Tensor sqdist(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.cols())
        throw ShapeMismatch("sqdist: operands need matching feature width");
    const int n = a.rows(), m = b.rows(), d = a.cols();
    Tensor out = Tensor::zeros({n, m});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k) {
                const double diff = a(i, k) - b(j, k);
                acc += diff * diff;
            }
            out(i, j) = acc;
        }
    check_finite(out, "sqdist");

    Tape* tp = result_tape(a, b);
    if (!tp) return out;
    const Tensor av = a.detached(), bv = b.detached();
    const int pa = a.tracked() ? a.node() : -1;
    const int pb = b.tracked() ? b.node() : -1;
    const int node = tp->record(out.shape(), {pa, pb},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    const double gv = g(i, j);
                    if (gv == 0.0) continue;
                    for (int k = 0; k < d; ++k) {
                        const double diff = av(i, k) - bv(j, k);
                        if (pa >= 0) Tape::slot(grads, pa, {n, d})(i, k) += gv * 2.0 * diff;
                        if (pb >= 0) Tape::slot(grads, pb, {m, d})(j, k) -= gv * 2.0 * diff;
                    }
                }
        });
    tp->bind(out, node);
    return out;
}

Tensor qr_scores(const Tensor& q, const Tensor& rr) {
    if (q.rank() != 2 || rr.rank() != 2 || q.cols() != rr.cols())
        throw ShapeMismatch("qr_scores: feature widths disagree");
    const int n = q.rows(), d = q.cols();
    if (rr.rows() != n * n) throw ShapeMismatch("qr_scores: rr must have n*n rows");
    Tensor out = Tensor::zeros({n, n});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k) acc += q(i, k) * rr(i * n + j, k);
            out(i, j) = acc;
        }
    check_finite(out, "qr_scores");

    Tape* tp = result_tape(q, rr);
    if (!tp) return out;
    const Tensor qv = q.detached(), rv = rr.detached();
    const int pq = q.tracked() ? q.node() : -1;
    const int pr = rr.tracked() ? rr.node() : -1;
    const int node = tp->record(out.shape(), {pq, pr},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double gv = g(i, j);
                    if (gv == 0.0) continue;
                    for (int k = 0; k < d; ++k) {
                        if (pq >= 0)
                            Tape::slot(grads, pq, {n, d})(i, k) += gv * rv(i * n + j, k);
                        if (pr >= 0)
                            Tape::slot(grads, pr, {n * n, d})(i * n + j, k) += gv * qv(i, k);
                    }
                }
        });
    tp->bind(out, node);
    return out;
}

Tensor normalize_rows(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    Tensor out = Tensor::zeros({n, m});
    std::vector<double> norms(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += a(i, j) * a(i, j);
        const double r = std::sqrt(acc);
        if (r == 0.0) throw NonFinite("normalize_rows: zero row");
        norms[static_cast<std::size_t>(i)] = r;
        for (int j = 0; j < m; ++j) out(i, j) = a(i, j) / r;
    }
    check_finite(out, "normalize_rows");
    if (!a.tracked()) return out;
    Tape* tp = a.tape();
    const Tensor ov = out.detached();
    const int pa = a.node();
    const int node = tp->record(out.shape(), {pa},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            Tensor& ga = Tape::slot(grads, pa, {n, m});
            for (int i = 0; i < n; ++i) {
                double dot = 0.0;
                for (int j = 0; j < m; ++j) dot += g(i, j) * ov(i, j);
                const double r = norms[static_cast<std::size_t>(i)];
                for (int j = 0; j < m; ++j) ga(i, j) += (g(i, j) - ov(i, j) * dot) / r;
            }
        });
    tp->bind(out, node);
    return out;
}

Tensor gather(const Tensor& a, const std::vector<std::int64_t>& indices) {
    Tensor out = Tensor::zeros({static_cast<int>(indices.size())});
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] < 0 || indices[k] >= a.size())
            throw ShapeMismatch("gather: index out of range");
        out[static_cast<std::int64_t>(k)] = a[indices[k]];
    }
    if (!a.tracked()) return out;
    Tape* tp = a.tape();
    const Shape as = a.shape();
    const int pa = a.node();
    const std::vector<std::int64_t> idx = indices;
    const int node = tp->record(out.shape(), {pa},
        [=](const Tensor& g, std::vector<Tensor>& grads) {
            Tensor& ga = Tape::slot(grads, pa, as);
            for (std::size_t k = 0; k < idx.size(); ++k)
                ga[idx[k]] += g[static_cast<std::int64_t>(k)];
        });
    tp->bind(out, node);
    return out;
}

}  // namespace hybridreg::ad
