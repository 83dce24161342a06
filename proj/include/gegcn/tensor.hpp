#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gegcn/errors.hpp"

namespace gegcn {

// Dense 2-D double-precision matrix, row-major. Everything in the training
// stack (features, hidden states, gradients) is one of these; 1xN / Nx1
// shapes double as vectors and 1x1 as scalars.
class Tensor {
public:
    Tensor() = default;
    Tensor(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}
    Tensor(int rows, int cols, std::vector<double> data);

    static Tensor zeros(int rows, int cols) { return Tensor(rows, cols); }
    static Tensor full(int rows, int cols, double value);
    static Tensor identity(int n);
    static Tensor scalar(double value) { return full(1, 1, value); }
    static Tensor row(std::vector<double> values);
    static Tensor column(std::vector<double> values);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool same_shape(const Tensor& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }
    std::string shape_str() const;

    double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::vector<double>& raw() noexcept { return data_; }
    const std::vector<double>& raw() const noexcept { return data_; }

    void fill(double v);
    bool all_finite() const;
    double item() const;  // requires 1x1

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// out = a * b  (shapes checked; Eigen-backed)
void matmul_into(const Tensor& a, const Tensor& b, Tensor& out);
// out += a * b
void matmul_add_into(const Tensor& a, const Tensor& b, Tensor& out);
// out += a^T * b
void matmul_at_b_add_into(const Tensor& a, const Tensor& b, Tensor& out);
// out += a * b^T
void matmul_a_bt_add_into(const Tensor& a, const Tensor& b, Tensor& out);

Tensor matmul(const Tensor& a, const Tensor& b);

void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace gegcn
