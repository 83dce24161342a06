#include "gegcn/tape.hpp"

#include <algorithm>
#include <cmath>

#include "gegcn/errors.hpp"

namespace gegcn {

Parameter Parameter::glorot(int rows, int cols, Rng& rng) {
    Tensor t(rows, cols);
    const double limit = std::sqrt(6.0 / (rows + cols));
    for (auto& x : t.raw()) x = rng.uniform(-limit, limit);
    return Parameter(std::move(t));
}

CsrMatrix CsrMatrix::from_coo(int rows, int cols, const std::vector<int>& r, const std::vector<int>& c,
                              const std::vector<double>& v) {
    if (r.size() != c.size() || r.size() != v.size()) throw DimensionError("csr: COO arrays differ in length");
    CsrMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.indptr.assign(static_cast<std::size_t>(rows) + 1, 0);
    for (int row : r) {
        if (row < 0 || row >= rows) throw DimensionError("csr: row index out of range");
        m.indptr[static_cast<std::size_t>(row) + 1]++;
    }
    for (int i = 0; i < rows; ++i) m.indptr[static_cast<std::size_t>(i) + 1] += m.indptr[static_cast<std::size_t>(i)];
    m.indices.resize(r.size());
    m.values.resize(r.size());
    std::vector<int> cursor(m.indptr.begin(), m.indptr.end() - 1);
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (c[k] < 0 || c[k] >= cols) throw DimensionError("csr: col index out of range");
        const int slot = cursor[static_cast<std::size_t>(r[k])]++;
        m.indices[static_cast<std::size_t>(slot)] = c[k];
        m.values[static_cast<std::size_t>(slot)] = v[k];
    }
    return m;
}

CsrMatrix CsrMatrix::transposed() const {
    std::vector<int> r, c;
    std::vector<double> v;
    r.reserve(values.size());
    c.reserve(values.size());
    v.reserve(values.size());
    for (int i = 0; i < rows; ++i) {
        for (int k = indptr[static_cast<std::size_t>(i)]; k < indptr[static_cast<std::size_t>(i) + 1]; ++k) {
            r.push_back(indices[static_cast<std::size_t>(k)]);
            c.push_back(i);
            v.push_back(values[static_cast<std::size_t>(k)]);
        }
    }
    return from_coo(cols, rows, r, c, v);
}

namespace {

void spmm_forward(const CsrMatrix& a, const Tensor& b, Tensor& out) {
    if (a.cols != b.rows()) {
        throw DimensionError("spmm: sparse [" + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                             "] incompatible with dense " + b.shape_str());
    }
    const int c = b.cols();
    for (int i = 0; i < a.rows; ++i) {
        double* out_row = out.data() + static_cast<std::size_t>(i) * c;
        for (int k = a.indptr[static_cast<std::size_t>(i)]; k < a.indptr[static_cast<std::size_t>(i) + 1]; ++k) {
            const double w = a.values[static_cast<std::size_t>(k)];
            const double* src = b.data() + static_cast<std::size_t>(a.indices[static_cast<std::size_t>(k)]) * c;
            for (int j = 0; j < c; ++j) out_row[j] += w * src[j];
        }
    }
}

}  // namespace

Tape::Node& Tape::node(Var v) {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) throw StateError("tape: invalid var handle");
    return nodes_[static_cast<std::size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) throw StateError("tape: invalid var handle");
    return nodes_[static_cast<std::size_t>(v.id)];
}

const Tensor& Tape::grad(Var v) const {
    const Node& n = node(v);
    if (!n.requires_grad) throw StateError("tape: node does not require gradients");
    return n.grad;
}

Var Tape::push(Tensor value, bool requires_grad, Parameter* bound) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.bound = bound;
    if (requires_grad) n.grad = Tensor(n.value.rows(), n.value.cols());
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::add_grad(Var v, const Tensor& g) {
    Node& n = node(v);
    if (!n.requires_grad) return;
    require_same_shape(n.grad, g, "grad accumulate");
    double* dst = n.grad.data();
    const double* src = g.data();
    for (std::size_t i = 0; i < n.grad.size(); ++i) dst[i] += src[i];
}

Var Tape::constant(Tensor t) { return push(std::move(t), false); }

Var Tape::param(Parameter& p) { return push(p.value, true, &p); }

Var Tape::matmul(Var a, Var b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (av.cols() != bv.rows()) {
        throw DimensionError("matmul: " + av.shape_str() + " * " + bv.shape_str());
    }
    Tensor out(av.rows(), bv.cols());
    matmul_into(av, bv, out);
    Var y = push(std::move(out), requires_grad(a) || requires_grad(b));
    node(y).backprop = [a, b, y](Tape& t) {
        const Tensor& g = t.node(y).grad;
        if (t.requires_grad(a)) matmul_a_bt_add_into(g, t.value(b), t.node(a).grad);
        if (t.requires_grad(b)) matmul_at_b_add_into(t.value(a), g, t.node(b).grad);
    };
    return y;
}

Var Tape::add(Var a, Var b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    require_same_shape(av, bv, "add");
    Tensor out = av;
    const double* src = bv.data();
    for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] += src[i];
    Var y = push(std::move(out), requires_grad(a) || requires_grad(b));
    node(y).backprop = [a, b, y](Tape& t) {
        const Tensor& g = t.node(y).grad;
        t.add_grad(a, g);
        t.add_grad(b, g);
    };
    return y;
}

Var Tape::add_rowvec(Var a, Var b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (bv.rows() != 1 || bv.cols() != av.cols()) {
        throw DimensionError("add_rowvec: " + av.shape_str() + " + " + bv.shape_str());
    }
    Tensor out = av;
    for (int i = 0; i < out.rows(); ++i) {
        double* row = out.data() + static_cast<std::size_t>(i) * out.cols();
        for (int j = 0; j < out.cols(); ++j) row[j] += bv.data()[j];
    }
    Var y = push(std::move(out), requires_grad(a) || requires_grad(b));
    node(y).backprop = [a, b, y](Tape& t) {
        const Tensor& g = t.node(y).grad;
        t.add_grad(a, g);
        if (t.requires_grad(b)) {
            Tensor row_sum(1, g.cols());
            for (int i = 0; i < g.rows(); ++i) {
                const double* row = g.data() + static_cast<std::size_t>(i) * g.cols();
                for (int j = 0; j < g.cols(); ++j) row_sum.raw()[static_cast<std::size_t>(j)] += row[j];
            }
            t.add_grad(b, row_sum);
        }
    };
    return y;
}

Var Tape::mul(Var a, Var b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    require_same_shape(av, bv, "mul");
    Tensor out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] *= bv.data()[i];
    Var y = push(std::move(out), requires_grad(a) || requires_grad(b));
    node(y).backprop = [a, b, y](Tape& t) {
        const Tensor& g = t.node(y).grad;
        if (t.requires_grad(a)) {
            Tensor da = g;
            for (std::size_t i = 0; i < da.size(); ++i) da.raw()[i] *= t.value(b).data()[i];
            t.add_grad(a, da);
        }
        if (t.requires_grad(b)) {
            Tensor db = g;
            for (std::size_t i = 0; i < db.size(); ++i) db.raw()[i] *= t.value(a).data()[i];
            t.add_grad(b, db);
        }
    };
    return y;
}

Var Tape::sigmoid(Var a) {
    Tensor out = value(a);
    for (auto& x : out.raw()) x = 1.0 / (1.0 + std::exp(-x));
    Var y = push(std::move(out), requires_grad(a));
    node(y).backprop = [a, y](Tape& t) {
        if (!t.requires_grad(a)) return;
        const Tensor& g = t.node(y).grad;
        const Tensor& yv = t.value(y);
        Tensor da = g;
        for (std::size_t i = 0; i < da.size(); ++i) {
            const double s = yv.data()[i];
            da.raw()[i] *= s * (1.0 - s);
        }
        t.add_grad(a, da);
    };
    return y;
}

Var Tape::tanh(Var a) {
    Tensor out = value(a);
    for (auto& x : out.raw()) x = std::tanh(x);
    Var y = push(std::move(out), requires_grad(a));
    node(y).backprop = [a, y](Tape& t) {
        if (!t.requires_grad(a)) return;
        const Tensor& g = t.node(y).grad;
        const Tensor& yv = t.value(y);
        Tensor da = g;
        for (std::size_t i = 0; i < da.size(); ++i) da.raw()[i] *= 1.0 - yv.data()[i] * yv.data()[i];
        t.add_grad(a, da);
    };
    return y;
}

Var Tape::relu(Var a) {
    Tensor out = value(a);
    for (auto& x : out.raw()) x = x > 0.0 ? x : 0.0;
    Var y = push(std::move(out), requires_grad(a));
    node(y).backprop = [a, y](Tape& t) {
        if (!t.requires_grad(a)) return;
        const Tensor& g = t.node(y).grad;
        const Tensor& av = t.value(a);
        Tensor da = g;
        for (std::size_t i = 0; i < da.size(); ++i) {
            if (av.data()[i] <= 0.0) da.raw()[i] = 0.0;
        }
        t.add_grad(a, da);
    };
    return y;
}

Var Tape::rsqrt(Var a) {
    Tensor out = value(a);
    for (auto& x : out.raw()) {
        if (!(x > 0.0)) throw ValidationError("rsqrt: inputs must be strictly positive");
        x = 1.0 / std::sqrt(x);
    }
    Var y = push(std::move(out), requires_grad(a));
    node(y).backprop = [a, y](Tape& t) {
        if (!t.requires_grad(a)) return;
        const Tensor& g = t.node(y).grad;
        const Tensor& yv = t.value(y);
        Tensor da = g;
        // d/dx x^-1/2 = -1/2 x^-3/2 = -y^3 / 2
        for (std::size_t i = 0; i < da.size(); ++i) {
            const double yy = yv.data()[i];
            da.raw()[i] *= -0.5 * yy * yy * yy;
        }
        t.add_grad(a, da);
    };
    return y;
}

Var Tape::concat_cols(Var a, Var b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (av.rows() != bv.rows()) {
        throw DimensionError("concat_cols: " + av.shape_str() + " | " + bv.shape_str());
    }
    Tensor out(av.rows(), av.cols() + bv.cols());
    for (int i = 0; i < av.rows(); ++i) {
        for (int j = 0; j < av.cols(); ++j) out.at(i, j) = av.at(i, j);
        for (int j = 0; j < bv.cols(); ++j) out.at(i, av.cols() + j) = bv.at(i, j);
    }
    Var y = push(std::move(out), requires_grad(a) || requires_grad(b));
    const int ca = av.cols(), cb = bv.cols();
    node(y).backprop = [a, b, y, ca, cb](Tape& t) {
        const Tensor& g = t.node(y).grad;
        if (t.requires_grad(a)) {
            Tensor da(g.rows(), ca);
            for (int i = 0; i < g.rows(); ++i) {
                for (int j = 0; j < ca; ++j) da.at(i, j) = g.at(i, j);
            }
            t.add_grad(a, da);
        }
        if (t.requires_grad(b)) {
            Tensor db(g.rows(), cb);
            for (int i = 0; i < g.rows(); ++i) {
                for (int j = 0; j < cb; ++j) db.at(i, j) = g.at(i, ca + j);
            }
            t.add_grad(b, db);
        }
    };
    return y;
}

Var Tape::slice(Var a, int r0, int r1, int c0, int c1) {
    const Tensor& av = value(a);
    if (r0 < 0 || c0 < 0 || r1 > av.rows() || c1 > av.cols() || r0 >= r1 || c0 >= c1) {
        throw DimensionError("slice: bad range on " + av.shape_str());
    }
    Tensor out(r1 - r0, c1 - c0);
    for (int i = r0; i < r1; ++i) {
        for (int j = c0; j < c1; ++j) out.at(i - r0, j - c0) = av.at(i, j);
    }
    Var y = push(std::move(out), requires_grad(a));
    node(y).backprop = [a, y, r0, r1, c0, c1](Tape& t) {
        if (!t.requires_grad(a)) return;
        const Tensor& g = t.node(y).grad;
        Tensor da(t.value(a).rows(), t.value(a).cols());
        for (int i = r0; i < r1; ++i) {
            for (int j = c0; j < c1; ++j) da.at(i, j) = g.at(i - r0, j - c0);
        }
        t.add_grad(a, da);
    };
    return y;
}

Var Tape::gather_rows(Var a, std::shared_ptr<const std::vector<int>> idx) {
    const Tensor& av = value(a);
    Tensor out(static_cast<int>(idx->size()), av.cols());
    for (std::size_t k = 0; k < idx->size(); ++k) {
        const int r = (*idx)[k];
        if (r < 0 || r >= av.rows()) throw DimensionError("gather_rows: index out of range");
        for (int j = 0; j < av.cols(); ++j) out.at(static_cast<int>(k), j) = av.at(r, j);
    }
    Var y = push(std::move(out), requires_grad(a));
    node(y).backprop = [a, y, idx](Tape& t) {
        if (!t.requires_grad(a)) return;
        const Tensor& g = t.node(y).grad;
        Tensor da(t.value(a).rows(), t.value(a).cols());
        for (std::size_t k = 0; k < idx->size(); ++k) {
            const int r = (*idx)[k];
            for (int j = 0; j < g.cols(); ++j) da.at(r, j) += g.at(static_cast<int>(k), j);
        }
        t.add_grad(a, da);
    };
    return y;
}

Var Tape::spmm(std::shared_ptr<const CsrMatrix> a, Var dense) {
    const Tensor& bv = value(dense);
    Tensor out(a->rows, bv.cols());
    spmm_forward(*a, bv, out);
    Var y = push(std::move(out), requires_grad(dense));
    auto at = std::make_shared<CsrMatrix>(a->transposed());
    node(y).backprop = [dense, y, at](Tape& t) {
        if (!t.requires_grad(dense)) return;
        const Tensor& g = t.node(y).grad;
        Tensor db(t.value(dense).rows(), t.value(dense).cols());
        spmm_forward(*at, g, db);
        t.add_grad(dense, db);
    };
    return y;
}

Var Tape::spmm_coo(std::shared_ptr<const std::vector<int>> rows, std::shared_ptr<const std::vector<int>> cols,
                   int out_rows, Var values, Var dense) {
    const Tensor& vv = value(values);
    const Tensor& dv = value(dense);
    if (vv.cols() != 1 || vv.rows() != static_cast<int>(rows->size()) || rows->size() != cols->size()) {
        throw DimensionError("spmm_coo: values must be [nnz x 1] matching the index arrays, got " + vv.shape_str());
    }
    const int c = dv.cols();
    Tensor out(out_rows, c);
    for (std::size_t k = 0; k < rows->size(); ++k) {
        const int r = (*rows)[k];
        const int s = (*cols)[k];
        if (r < 0 || r >= out_rows || s < 0 || s >= dv.rows()) throw DimensionError("spmm_coo: index out of range");
        const double w = vv.data()[k];
        double* dst = out.data() + static_cast<std::size_t>(r) * c;
        const double* src = dv.data() + static_cast<std::size_t>(s) * c;
        for (int j = 0; j < c; ++j) dst[j] += w * src[j];
    }
    Var y = push(std::move(out), requires_grad(values) || requires_grad(dense));
    node(y).backprop = [rows, cols, values, dense, y](Tape& t) {
        const Tensor& g = t.node(y).grad;
        const Tensor& vv2 = t.value(values);
        const Tensor& dv2 = t.value(dense);
        const int c2 = dv2.cols();
        if (t.requires_grad(values)) {
            Tensor dvals(vv2.rows(), 1);
            for (std::size_t k = 0; k < rows->size(); ++k) {
                const double* grow = g.data() + static_cast<std::size_t>((*rows)[k]) * c2;
                const double* drow = dv2.data() + static_cast<std::size_t>((*cols)[k]) * c2;
                double acc = 0.0;
                for (int j = 0; j < c2; ++j) acc += grow[j] * drow[j];
                dvals.raw()[k] = acc;
            }
            t.add_grad(values, dvals);
        }
        if (t.requires_grad(dense)) {
            Tensor dd(dv2.rows(), c2);
            for (std::size_t k = 0; k < rows->size(); ++k) {
                const double w = vv2.data()[k];
                const double* grow = g.data() + static_cast<std::size_t>((*rows)[k]) * c2;
                double* dst = dd.data() + static_cast<std::size_t>((*cols)[k]) * c2;
                for (int j = 0; j < c2; ++j) dst[j] += w * grow[j];
            }
            t.add_grad(dense, dd);
        }
    };
    return y;
}

Var Tape::dropout(Var a, double p, Rng& rng) {
    if (p < 0.0 || p >= 1.0) throw ValidationError("dropout: p must lie in [0, 1)");
    if (p == 0.0) return a;
    const Tensor& av = value(a);
    auto mask = std::make_shared<Tensor>(av.rows(), av.cols());
    const double scale = 1.0 / (1.0 - p);
    for (auto& m : mask->raw()) m = rng.bernoulli(p) ? 0.0 : scale;
    Tensor out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] *= mask->data()[i];
    Var y = push(std::move(out), requires_grad(a));
    node(y).backprop = [a, y, mask](Tape& t) {
        if (!t.requires_grad(a)) return;
        const Tensor& g = t.node(y).grad;
        Tensor da = g;
        for (std::size_t i = 0; i < da.size(); ++i) da.raw()[i] *= mask->data()[i];
        t.add_grad(a, da);
    };
    return y;
}

Var Tape::softmax_cross_entropy(Var logits, std::shared_ptr<const std::vector<int>> labels,
                                std::shared_ptr<const std::vector<int>> mask_rows) {
    const Tensor& lv = value(logits);
    const int m = lv.cols();
    if (static_cast<int>(labels->size()) != lv.rows()) {
        throw DimensionError("cross_entropy: labels length " + std::to_string(labels->size()) +
                             " does not match logits " + lv.shape_str());
    }
    if (mask_rows->empty()) throw ValidationError("cross_entropy: empty mask");

    auto probs = std::make_shared<Tensor>(static_cast<int>(mask_rows->size()), m);
    double loss = 0.0;
    for (std::size_t k = 0; k < mask_rows->size(); ++k) {
        const int i = (*mask_rows)[k];
        if (i < 0 || i >= lv.rows()) throw DimensionError("cross_entropy: mask row out of range");
        const int y = (*labels)[static_cast<std::size_t>(i)];
        if (y < 0 || y >= m) throw ValidationError("cross_entropy: label out of range");
        const double* row = lv.data() + static_cast<std::size_t>(i) * m;
        double mx = row[0];
        for (int j = 1; j < m; ++j) mx = std::max(mx, row[j]);
        double z = 0.0;
        for (int j = 0; j < m; ++j) z += std::exp(row[j] - mx);
        const double log_z = mx + std::log(z);
        loss -= row[y] - log_z;
        for (int j = 0; j < m; ++j) probs->at(static_cast<int>(k), j) = std::exp(row[j] - log_z);
    }
    loss /= static_cast<double>(mask_rows->size());

    Var out = push(Tensor::scalar(loss), requires_grad(logits));
    node(out).backprop = [logits, out, labels, mask_rows, probs](Tape& t) {
        if (!t.requires_grad(logits)) return;
        const double gscale = t.node(out).grad.item() / static_cast<double>(mask_rows->size());
        Tensor dl(t.value(logits).rows(), t.value(logits).cols());
        const int m2 = dl.cols();
        for (std::size_t k = 0; k < mask_rows->size(); ++k) {
            const int i = (*mask_rows)[k];
            const int y = (*labels)[static_cast<std::size_t>(i)];
            for (int j = 0; j < m2; ++j) {
                dl.at(i, j) = gscale * (probs->at(static_cast<int>(k), j) - (j == y ? 1.0 : 0.0));
            }
        }
        t.add_grad(logits, dl);
    };
    return out;
}

Var Tape::sum_all(Var a) {
    const Tensor& av = value(a);
    double s = 0.0;
    for (double x : av.raw()) s += x;
    Var y = push(Tensor::scalar(s), requires_grad(a));
    node(y).backprop = [a, y](Tape& t) {
        if (!t.requires_grad(a)) return;
        const double g = t.node(y).grad.item();
        Tensor da(t.value(a).rows(), t.value(a).cols());
        da.fill(g);
        t.add_grad(a, da);
    };
    return y;
}

void Tape::backward(Var loss) {
    if (backward_done_) throw StateError("tape: backward() called twice without reset()");
    Node& top = node(loss);
    if (top.value.rows() != 1 || top.value.cols() != 1) {
        throw DimensionError("backward: loss must be scalar, got " + top.value.shape_str());
    }
    if (!top.requires_grad) throw StateError("backward: loss does not depend on any parameter");
    backward_done_ = true;
    top.grad.raw()[0] = 1.0;

    for (std::size_t i = nodes_.size(); i-- > 0;) {
        Node& n = nodes_[i];
        if (n.requires_grad && n.backprop) n.backprop(*this);
    }
    for (Node& n : nodes_) {
        if (n.bound) {
            double* dst = n.bound->grad.data();
            const double* src = n.grad.data();
            for (std::size_t i = 0; i < n.grad.size(); ++i) dst[i] += src[i];
        }
    }
}

void Tape::reset() {
    nodes_.clear();
    backward_done_ = false;
}

void adam_step(const std::vector<Parameter*>& params, const AdamConfig& cfg) {
    for (Parameter* p : params) {
        p->step += 1;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->step));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->step));
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double g = p->grad.data()[i];
            p->m.raw()[i] = cfg.beta1 * p->m.raw()[i] + (1.0 - cfg.beta1) * g;
            p->v.raw()[i] = cfg.beta2 * p->v.raw()[i] + (1.0 - cfg.beta2) * g * g;
            const double mhat = p->m.raw()[i] / bc1;
            const double vhat = p->v.raw()[i] / bc2;
            double x = p->value.raw()[i];
            x -= cfg.lr * cfg.weight_decay * x;  // decoupled decay
            x -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
            p->value.raw()[i] = x;
        }
    }
}

void zero_grads(const std::vector<Parameter*>& params) {
    for (Parameter* p : params) p->zero_grad();
}

}  // namespace gegcn
