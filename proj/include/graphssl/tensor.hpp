#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace graphssl {

// Dense row-major matrix of 64-bit reals. Rank is at most 2; scalars are
// represented as 1x1, row vectors as 1xd.
class Tensor {
 public:
  Tensor() = default;

  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.data_[0] = v;
    return t;
  }

  static Tensor row(const std::vector<double>& v) {
    Tensor t(1, v.size());
    t.data_ = v;
    return t;
  }

  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Tensor t(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
      if (r.size() != t.cols_) throw std::invalid_argument("Tensor::from_rows: ragged rows");
      std::size_t j = 0;
      for (double v : r) t(i, j++) = v;
      ++i;
    }
    return t;
  }

  static Tensor identity(std::size_t n) {
    Tensor t(n, n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const double& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t k) { return data_[k]; }
  const double& operator[](std::size_t k) const { return data_[k]; }

  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  bool operator==(const Tensor& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

  // Value of a 1x1 tensor.
  double item() const {
    if (size() != 1) throw std::logic_error("Tensor::item: not a scalar");
    return data_[0];
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double max_abs_diff(const Tensor& o) const {
    if (!same_shape(o)) throw std::invalid_argument("Tensor::max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < data_.size(); ++k)
      m = std::max(m, std::abs(data_[k] - o.data_[k]));
    return m;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace graphssl
