#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace frontierlab {

// Raised when a computation produces NaN/Inf or otherwise leaves the numeric
// domain (e.g. a diverging rollout). Distinct from std::invalid_argument so
// callers can tell "bad input" from "numerics blew up".
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major array of doubles. A scalar is 1x1, a vector is n x 1.
class NumArray {
 public:
  NumArray() = default;
  NumArray(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  NumArray(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw std::invalid_argument("NumArray: data length does not match shape");
  }

  static NumArray scalar(double v) { return NumArray(1, 1, {v}); }
  static NumArray vector(std::initializer_list<double> values) {
    return NumArray(values.size(), 1, std::vector<double>(values));
  }
  static NumArray vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return NumArray(n, 1, std::move(values));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool is_scalar() const { return rows_ == 1 && cols_ == 1; }
  bool is_vector() const { return cols_ == 1; }
  bool same_shape(const NumArray& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double value() const {
    if (!is_scalar()) throw std::invalid_argument("NumArray: not a scalar");
    return data_[0];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  void fill(double v) { data_.assign(data_.size(), v); }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const NumArray& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline std::string shape_string(const NumArray& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

}  // namespace frontierlab
