#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "gegcn/rng.hpp"
#include "gegcn/tensor.hpp"

namespace gegcn {

// Trainable tensor with accumulated gradient and Adam moments.
struct Parameter {
    Tensor value;
    Tensor grad;
    Tensor m;
    Tensor v;
    std::int64_t step = 0;

    Parameter() = default;
    explicit Parameter(Tensor init)
        : value(std::move(init)),
          grad(value.rows(), value.cols()),
          m(value.rows(), value.cols()),
          v(value.rows(), value.cols()) {}

    static Parameter glorot(int rows, int cols, Rng& rng);
    static Parameter zeros(int rows, int cols) { return Parameter(Tensor(rows, cols)); }
    static Parameter constant(int rows, int cols, double x) { return Parameter(Tensor::full(rows, cols, x)); }

    void zero_grad() { grad.fill(0.0); }
};

// Constant CSR matrix for fixed propagation structure.
struct CsrMatrix {
    int rows = 0, cols = 0;
    std::vector<int> indptr;   // rows + 1
    std::vector<int> indices;  // column per entry
    std::vector<double> values;

    static CsrMatrix from_coo(int rows, int cols, const std::vector<int>& r, const std::vector<int>& c,
                              const std::vector<double>& v);
    CsrMatrix transposed() const;
};

// Handle into a Tape.
struct Var {
    int id = -1;
    bool valid() const noexcept { return id >= 0; }
};

// Reverse-mode tape over dense tensors. Nodes are appended in construction
// order (already topological); backward() replays them once in reverse and
// accumulates gradients additively at fan-out. A tape is confined to one
// thread and rebuilt per training step.
class Tape {
public:
    Var constant(Tensor t);
    // leaf bound to an external parameter; backward() adds into p.grad
    Var param(Parameter& p);

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var add_rowvec(Var a, Var b);  // [N x d] + [1 x d], row broadcast
    Var mul(Var a, Var b);
    Var sigmoid(Var a);
    Var tanh(Var a);
    Var relu(Var a);
    Var rsqrt(Var a);  // elementwise x^-1/2, requires x > 0
    Var concat_cols(Var a, Var b);
    Var slice(Var a, int r0, int r1, int c0, int c1);  // half-open ranges
    Var gather_rows(Var a, std::shared_ptr<const std::vector<int>> idx);
    // constant sparse (CSR) times dense
    Var spmm(std::shared_ptr<const CsrMatrix> a, Var dense);
    // sparse matrix with VARIABLE values in fixed COO layout, times dense:
    // out[rows[k], :] += values[k] * dense[cols[k], :]
    Var spmm_coo(std::shared_ptr<const std::vector<int>> rows, std::shared_ptr<const std::vector<int>> cols,
                 int out_rows, Var values, Var dense);
    // inverted dropout: keeps entries with probability 1-p scaled by 1/(1-p);
    // p = 0 is the identity
    Var dropout(Var a, double p, Rng& rng);
    // mean negative log-softmax over the masked rows only
    Var softmax_cross_entropy(Var logits, std::shared_ptr<const std::vector<int>> labels,
                              std::shared_ptr<const std::vector<int>> mask_rows);
    Var sum_all(Var a);

    const Tensor& value(Var v) const { return node(v).value; }
    const Tensor& grad(Var v) const;
    bool requires_grad(Var v) const { return node(v).requires_grad; }

    // Seeds d(loss)/d(loss) = 1 and replays the tape; flushes into bound
    // parameters. Throws StateError when called twice without reset().
    void backward(Var loss);
    void reset();
    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;  // allocated only when requires_grad
        bool requires_grad = false;
        Parameter* bound = nullptr;
        std::function<void(Tape&)> backprop;
    };

    Node& node(Var v);
    const Node& node(Var v) const;
    Var push(Tensor value, bool requires_grad, Parameter* bound = nullptr);
    void add_grad(Var v, const Tensor& g);

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled
};

// AdamW step over all listed parameters using their accumulated gradients.
void adam_step(const std::vector<Parameter*>& params, const AdamConfig& cfg);

void zero_grads(const std::vector<Parameter*>& params);

}  // namespace gegcn
