#pragma once

// Dense 3-way tensors and the handful of matrix primitives the unmixing
// solver is built from.
//
// Tensor3 is stored band-sequential (channel-major): element (r, c, k) lives
// at offset k*rows*cols + r*cols + c. File I/O relies on this layout.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gqmu/error.hpp"

namespace gqmu {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

class Tensor3 {
 public:
  Tensor3() = default;

  Tensor3(std::size_t rows, std::size_t cols, std::size_t channels, double fill = 0.0)
      : rows_(rows), cols_(cols), channels_(channels), data_(rows * cols * channels, fill) {}

  Tensor3(std::size_t rows, std::size_t cols, std::size_t channels, std::vector<double> data)
      : rows_(rows), cols_(cols), channels_(channels), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_ * channels_)
      throw InvalidInput("Tensor3: data length " + std::to_string(data_.size()) +
                         " does not match dims " + dims_string());
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t pixels() const noexcept { return rows_ * cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c, std::size_t k) {
    return data_[k * rows_ * cols_ + r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c, std::size_t k) const {
    return data_[k * rows_ * cols_ + r * cols_ + c];
  }

  std::span<double> channel(std::size_t k) {
    return {data_.data() + k * pixels(), pixels()};
  }
  std::span<const double> channel(std::size_t k) const {
    return {data_.data() + k * pixels(), pixels()};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const Tensor3& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_ && channels_ == o.channels_;
  }

  std::string dims_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_) + "x" + std::to_string(channels_);
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

// Column index of pixel (r, c) in a mode-3 matricization: the first spatial
// index varies fastest.
inline std::size_t unfold_column(std::size_t r, std::size_t c, std::size_t rows) noexcept {
  return r + c * rows;
}

inline Tensor3 mode3_mul(const Tensor3& t, const Mat& m) {
  if (static_cast<std::size_t>(m.cols()) != t.channels())
    throw InvalidInput("mode3_mul: matrix has " + std::to_string(m.cols()) +
                       " columns but tensor has " + std::to_string(t.channels()) + " channels");
  const std::size_t out_channels = static_cast<std::size_t>(m.rows());
  Tensor3 out(t.rows(), t.cols(), out_channels);
  for (std::size_t j = 0; j < out_channels; ++j) {
    auto dst = out.channel(j);
    for (std::size_t k = 0; k < t.channels(); ++k) {
      const double w = m(j, k);
      if (w == 0.0) continue;
      auto src = t.channel(k);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += w * src[i];
    }
  }
  return out;
}

inline Mat mode3_matricize(const Tensor3& t) {
  Mat out(t.channels(), t.pixels());
  for (std::size_t k = 0; k < t.channels(); ++k)
    for (std::size_t r = 0; r < t.rows(); ++r)
      for (std::size_t c = 0; c < t.cols(); ++c)
        out(k, unfold_column(r, c, t.rows())) = t(r, c, k);
  return out;
}

inline Tensor3 fold3(const Mat& m, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0 || static_cast<std::size_t>(m.cols()) != rows * cols)
    throw InvalidInput("fold3: " + std::to_string(m.cols()) + " columns cannot be folded into " +
                       std::to_string(rows) + "x" + std::to_string(cols) + " pixels");
  Tensor3 out(rows, cols, static_cast<std::size_t>(m.rows()));
  for (std::size_t k = 0; k < out.channels(); ++k)
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) out(r, c, k) = m(k, unfold_column(r, c, rows));
  return out;
}

inline Tensor3 project_nonneg(Tensor3 t) {
  for (double& v : t.data()) v = std::max(v, 0.0);
  return t;
}

inline Mat project_nonneg(const Mat& m) { return m.cwiseMax(0.0); }

inline double soft_threshold(double x, double c) noexcept {
  if (x >= c) return x - c;
  if (x <= -c) return x + c;
  return 0.0;
}

inline Tensor3 soft_threshold(Tensor3 t, double c) {
  if (!(c >= 0.0)) throw InvalidInput("soft_threshold: threshold must be >= 0");
  for (double& v : t.data()) v = soft_threshold(v, c);
  return t;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Solves G X = H for symmetric positive definite G with a Cholesky
// factorization. Only the lower triangle of G is read.
inline Mat solve_spd(const Mat& g, const Mat& h) {
  const Eigen::Index n = g.rows();
  if (g.cols() != n || h.rows() != n)
    throw InvalidInput("solve_spd: expected square G matching H rows");
  Mat l = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = g(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d))
      throw SolverError("solve_spd: matrix is not positive definite (pivot " + std::to_string(j) +
                            " = " + std::to_string(d) + ")",
                        static_cast<std::size_t>(j));
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = g(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  Mat x = h;
  for (Eigen::Index col = 0; col < x.cols(); ++col) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = x(i, col);
      for (Eigen::Index k = 0; k < i; ++k) s -= l(i, k) * x(k, col);
      x(i, col) = s / l(i, i);
    }
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      double s = x(i, col);
      for (Eigen::Index k = i + 1; k < n; ++k) s -= l(k, i) * x(k, col);
      x(i, col) = s / l(i, i);
    }
  }
  return x;
}

}  // namespace gqmu
