#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "comrl/common.hpp"

namespace comrl {

// Dense row-major tensor of doubles. Rank is usually 1 (vectors, biases) or
// 2 (batches of rows); the weight file format allows arbitrary rank so the
// shape is kept general.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(numel_of(shape_)), 0.0);
  }

  Tensor(std::vector<int> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    COMRL_CHECK(static_cast<int64_t>(data_.size()) == numel_of(shape_),
                "tensor data size does not match shape");
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  static Tensor row(std::span<const double> v) {
    return Tensor({1, static_cast<int>(v.size())},
                  std::vector<double>(v.begin(), v.end()));
  }

  static Tensor matrix(int rows, int cols) { return Tensor({rows, cols}); }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }

  // Rows/cols of a rank-2 tensor; a rank-1 tensor of length n is treated as a
  // single row so bias vectors and row vectors interoperate.
  int rows() const { return rank() == 2 ? shape_[0] : 1; }
  int cols() const {
    return rank() == 2 ? shape_[1] : static_cast<int>(numel());
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  double& at(int r, int c) { return data_[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const {
    return data_[static_cast<size_t>(r) * cols() + c];
  }

  std::span<const double> row_span(int r) const {
    return {data_.data() + static_cast<size_t>(r) * cols(),
            static_cast<size_t>(cols())};
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  static int64_t numel_of(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int e : shape) {
      COMRL_CHECK(e >= 0, "negative tensor extent");
      n *= e;
    }
    return n;
  }

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

bool all_finite(const Tensor& t);

}  // namespace comrl
