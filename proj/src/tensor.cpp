#include "gegcn/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <utility>

namespace gegcn {

namespace {

using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapT = Eigen::Map<EigenRowMajor>;
using ConstMapT = Eigen::Map<const EigenRowMajor>;

ConstMapT map_of(const Tensor& t) { return ConstMapT(t.data(), t.rows(), t.cols()); }
MapT map_of(Tensor& t) { return MapT(t.data(), t.rows(), t.cols()); }

}  // namespace

Tensor::Tensor(int rows, int cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(rows) * cols) {
        throw DimensionError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                             shape_str());
    }
}

Tensor Tensor::full(int rows, int cols, double value) {
    Tensor t(rows, cols);
    t.fill(value);
    return t;
}

Tensor Tensor::identity(int n) {
    Tensor t(n, n);
    for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

Tensor Tensor::row(std::vector<double> values) {
    const int n = static_cast<int>(values.size());
    return Tensor(1, n, std::move(values));
}

Tensor Tensor::column(std::vector<double> values) {
    const int n = static_cast<int>(values.size());
    return Tensor(n, 1, std::move(values));
}

std::string Tensor::shape_str() const {
    return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

void Tensor::fill(double v) {
    for (auto& x : data_) x = v;
}

bool Tensor::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double Tensor::item() const {
    if (rows_ != 1 || cols_ != 1) throw DimensionError("item() requires a 1x1 tensor, got " + shape_str());
    return data_[0];
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    }
}

namespace {

void require_matmul_shapes(const Tensor& a, const Tensor& b, const Tensor& out, const char* op) {
    if (a.cols() != b.rows() || out.rows() != a.rows() || out.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": incompatible shapes " + a.shape_str() + " * " + b.shape_str() +
                             " -> " + out.shape_str());
    }
}

}  // namespace

void matmul_into(const Tensor& a, const Tensor& b, Tensor& out) {
    require_matmul_shapes(a, b, out, "matmul");
    map_of(out).noalias() = map_of(a) * map_of(b);
}

void matmul_add_into(const Tensor& a, const Tensor& b, Tensor& out) {
    require_matmul_shapes(a, b, out, "matmul_add");
    map_of(out).noalias() += map_of(a) * map_of(b);
}

void matmul_at_b_add_into(const Tensor& a, const Tensor& b, Tensor& out) {
    if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols()) {
        throw DimensionError(std::string("matmul_at_b: incompatible shapes ") + a.shape_str() + "^T * " +
                             b.shape_str() + " -> " + out.shape_str());
    }
    map_of(out).noalias() += map_of(a).transpose() * map_of(b);
}

void matmul_a_bt_add_into(const Tensor& a, const Tensor& b, Tensor& out) {
    if (a.cols() != b.cols() || out.rows() != a.rows() || out.cols() != b.rows()) {
        throw DimensionError(std::string("matmul_a_bt: incompatible shapes ") + a.shape_str() + " * " +
                             b.shape_str() + "^T -> " + out.shape_str());
    }
    map_of(out).noalias() += map_of(a) * map_of(b).transpose();
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    Tensor out(a.rows(), b.cols());
    matmul_into(a, b, out);
    return out;
}

}  // namespace gegcn
