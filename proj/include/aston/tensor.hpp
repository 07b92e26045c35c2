#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "aston/error.hpp"

namespace aston::nn {

/// Dense row-major array. Rank is 1 or 2 in practice (vectors and matrices);
/// shape is kept as a list so callers see the logical dimensions.
template <typename Real>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape)
      : shape_(std::move(shape)), data_(checked_size(shape_), Real(0)) {}

  Tensor(int rows, int cols) : Tensor(std::vector<int>{rows, cols}) {}

  static Tensor row(std::vector<Real> values) {
    Tensor t;
    t.shape_ = {1, static_cast<int>(values.size())};
    t.data_ = std::move(values);
    return t;
  }

  const std::vector<int>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  int rows() const { return shape_.empty() ? 0 : shape_[0]; }
  int cols() const {
    if (shape_.size() < 2) return shape_.size() == 1 ? shape_[0] : 0;
    return shape_[1];
  }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }

  Real& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  Real operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols() + c]; }

  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool all_finite() const {
    for (Real v : data_) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  static std::size_t checked_size(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d < 0) throw ShapeError("negative tensor dimension");
      n *= static_cast<std::size_t>(d);
    }
    return shape.empty() ? 0 : n;
  }

  std::vector<int> shape_;
  std::vector<Real> data_;
};

// ---------------------------------------------------------------------------
// Raw kernels. Both the autodiff tape and the no-grad inference path call
// these, so the two paths compute bit-identical forward values.
// ---------------------------------------------------------------------------

template <typename Real>
void require_shape(const Tensor<Real>& t, int rows, int cols, const char* what) {
  if (t.rows() != rows || t.cols() != cols) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                     std::to_string(cols) + ", got " + std::to_string(t.rows()) + "x" +
                     std::to_string(t.cols()));
  }
}

/// out = a @ b, accumulate optionally.
template <typename Real>
void matmul_into(const Tensor<Real>& a, const Tensor<Real>& b, Tensor<Real>& out,
                 bool accumulate = false) {
  const int m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) throw ShapeError("matmul: inner dimensions disagree");
  if (!accumulate) out.fill(Real(0));
  const Real* pa = a.data();
  const Real* pb = b.data();
  Real* po = out.data();
  for (int i = 0; i < m; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      const Real aik = pa[static_cast<std::size_t>(i) * k + kk];
      if (aik == Real(0)) continue;
      const Real* brow = pb + static_cast<std::size_t>(kk) * n;
      Real* orow = po + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
    }
  }
}

/// out = a @ b^T, accumulate optionally.
template <typename Real>
void matmul_transb_into(const Tensor<Real>& a, const Tensor<Real>& b, Tensor<Real>& out,
                        bool accumulate = false) {
  const int m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) throw ShapeError("matmul_transb: inner dimensions disagree");
  if (!accumulate) out.fill(Real(0));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      Real acc = accumulate ? out(i, j) : Real(0);
      const Real* arow = a.data() + static_cast<std::size_t>(i) * k;
      const Real* brow = b.data() + static_cast<std::size_t>(j) * k;
      for (int kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      out(i, j) = acc;
    }
  }
}

/// out = a^T @ b, accumulate optionally.
template <typename Real>
void matmul_transa_into(const Tensor<Real>& a, const Tensor<Real>& b, Tensor<Real>& out,
                        bool accumulate = false) {
  const int m = a.cols(), k = a.rows(), n = b.cols();
  if (b.rows() != k) throw ShapeError("matmul_transa: inner dimensions disagree");
  if (!accumulate) out.fill(Real(0));
  for (int kk = 0; kk < k; ++kk) {
    const Real* arow = a.data() + static_cast<std::size_t>(kk) * m;
    const Real* brow = b.data() + static_cast<std::size_t>(kk) * n;
    for (int i = 0; i < m; ++i) {
      const Real aki = arow[i];
      if (aki == Real(0)) continue;
      Real* orow = out.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) orow[j] += aki * brow[j];
    }
  }
}

template <typename Real>
Real sigmoid_scalar(Real x) {
  // Branch keeps exp() away from overflow for large |x|.
  if (x >= Real(0)) {
    const Real e = std::exp(-x);
    return Real(1) / (Real(1) + e);
  }
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

/// Row-wise softmax in place, stabilized by max subtraction. `mask`, when
/// given, is added to the inputs first (use large negatives to exclude).
template <typename Real>
void softmax_rows_inplace(Tensor<Real>& x, const Tensor<Real>* mask = nullptr) {
  for (int r = 0; r < x.rows(); ++r) {
    Real mx = x(r, 0) + (mask ? (*mask)(r, 0) : Real(0));
    for (int c = 0; c < x.cols(); ++c) {
      const Real z = x(r, c) + (mask ? (*mask)(r, c) : Real(0));
      x(r, c) = z;
      mx = std::max(mx, z);
    }
    Real sum = 0;
    for (int c = 0; c < x.cols(); ++c) {
      x(r, c) = std::exp(x(r, c) - mx);
      sum += x(r, c);
    }
    for (int c = 0; c < x.cols(); ++c) x(r, c) /= sum;
  }
}

/// Numerically stable log-softmax of one row; returns values in `out`.
template <typename Real>
void log_softmax_row(const Real* logits, int n, double* out) {
  double mx = logits[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, static_cast<double>(logits[i]));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::exp(static_cast<double>(logits[i]) - mx);
  const double lse = mx + std::log(sum);
  for (int i = 0; i < n; ++i) out[i] = static_cast<double>(logits[i]) - lse;
}

}  // namespace aston::nn
