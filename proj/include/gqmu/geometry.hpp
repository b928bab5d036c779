#pragma once

// Simplex-geometry regularizers for the endmember matrix A (M x N): weighted
// simplex shrinkage (WSS) and the quadratic minimum-volume surrogates used as
// ablation baselines.

#include <algorithm>
#include <cmath>
#include <string>

#include "gqmu/error.hpp"
#include "gqmu/tensor.hpp"

namespace gqmu {

// Softmax over normalized reciprocal l1 norms of the abundance channels.
inline Vec sparsity_weights(const Tensor3& s0) {
  const std::size_t n = s0.channels();
  if (n == 0) throw InvalidInput("sparsity_weights: abundance tensor has no channels");
  Vec level(n);
  for (std::size_t k = 0; k < n; ++k) {
    double l1 = 0.0;
    for (double v : s0.channel(k)) l1 += std::abs(v);
    if (!(l1 > 0.0))
      throw DegenerateData("sparsity_weights: abundance channel " + std::to_string(k) +
                           " is all zero");
    level(k) = 1.0 / l1;
  }
  level /= level.maxCoeff();
  // Inputs lie in (0, 1], so the shift-free softmax cannot overflow.
  Vec w = level.array().exp();
  return w / w.sum();
}

inline Vec simplex_center(const Mat& a0) {
  if (a0.cols() == 0) throw InvalidInput("simplex_center: endmember matrix has no columns");
  return a0.rowwise().mean();
}

struct WssContext {
  Vec w;         // shrinkage weights, sum to one
  Vec c;         // simplex center
  double lambda3 = 0.0;
  double lambda4 = 0.0;
  Mat a_prev;    // anchor A^k
};

namespace detail {
inline void check_wss_shapes(const Mat& a, const WssContext& ctx) {
  if (ctx.w.size() != a.cols() || ctx.c.size() != a.rows() || ctx.a_prev.rows() != a.rows() ||
      ctx.a_prev.cols() != a.cols())
    throw InvalidInput("wss: context shapes do not match the endmember matrix");
}
}  // namespace detail

inline double wss_value(const Mat& a, const WssContext& ctx) {
  detail::check_wss_shapes(a, ctx);
  double shrink = 0.0;
  for (Eigen::Index n = 0; n < a.cols(); ++n) shrink += ctx.w(n) * (a.col(n) - ctx.c).squaredNorm();
  return 0.5 * ctx.lambda3 * shrink + 0.5 * ctx.lambda4 * (a - ctx.a_prev).squaredNorm();
}

inline Mat wss_grad(const Mat& a, const WssContext& ctx) {
  detail::check_wss_shapes(a, ctx);
  Mat centered = a.colwise() - ctx.c;
  return ctx.lambda3 * (centered * ctx.w.asDiagonal()) + ctx.lambda4 * (a - ctx.a_prev);
}

enum class MvVariant { wss, nwss, center, tv, ssd };

inline std::string to_string(MvVariant v) {
  switch (v) {
    case MvVariant::wss: return "wss";
    case MvVariant::nwss: return "nwss";
    case MvVariant::center: return "center";
    case MvVariant::tv: return "tv";
    case MvVariant::ssd: return "ssd";
  }
  return "?";
}

inline MvVariant parse_mv_variant(const std::string& s) {
  if (s == "wss") return MvVariant::wss;
  if (s == "nwss") return MvVariant::nwss;
  if (s == "center") return MvVariant::center;
  if (s == "tv") return MvVariant::tv;
  if (s == "ssd") return MvVariant::ssd;
  throw InvalidInput("unsupported minimum-volume variant '" + s +
                     "' (expected wss|nwss|center|tv|ssd)");
}

// I - (1/N) 1 1^T
inline Mat centering_matrix(Eigen::Index n) {
  return Mat::Identity(n, n) - Mat::Constant(n, n, 1.0 / static_cast<double>(n));
}

// Unweighted quadratic surrogates. nwss and center share the formula
// 1/2 ||A - c 1^T||^2; they differ only in which center the caller passes.
inline double mv_value(const Mat& a, MvVariant variant, const Vec& c) {
  const auto n = a.cols();
  switch (variant) {
    case MvVariant::nwss:
    case MvVariant::center:
      if (c.size() != a.rows()) throw InvalidInput("mv_value: center length mismatch");
      return 0.5 * (a.colwise() - c).squaredNorm();
    case MvVariant::tv:
      return 0.5 * (a * centering_matrix(n)).squaredNorm();
    case MvVariant::ssd: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) s += (a.col(i) - a.col(j)).squaredNorm();
      return 0.5 * s;
    }
    case MvVariant::wss:
      break;
  }
  throw InvalidInput("mv_value: the weighted variant needs a WssContext (use wss_value)");
}

inline Mat mv_grad(const Mat& a, MvVariant variant, const Vec& c) {
  const auto n = a.cols();
  switch (variant) {
    case MvVariant::nwss:
    case MvVariant::center:
      if (c.size() != a.rows()) throw InvalidInput("mv_grad: center length mismatch");
      return a.colwise() - c;
    case MvVariant::tv:
      return a * centering_matrix(n);
    case MvVariant::ssd:
      return a * (static_cast<double>(n) * centering_matrix(n));
    case MvVariant::wss:
      break;
  }
  throw InvalidInput("mv_grad: the weighted variant needs a WssContext (use wss_grad)");
}

// Any of the regularizers above, scaled and combined with the proximal anchor,
// is a quadratic whose gradient is A*H - F with H (N x N) symmetric. The
// A-update only needs (H, F).
struct QuadraticShrinkage {
  Mat h;
  Mat f;
};

// ctx.c is the shrinkage target (the simplex center for wss/nwss, the data
// mean for center). lambda3 scales the shrinkage term and lambda4 the anchor
// to ctx.a_prev for every variant.
inline QuadraticShrinkage shrinkage_quadratic(MvVariant variant, const WssContext& ctx) {
  const auto n = ctx.a_prev.cols();
  const auto m = ctx.a_prev.rows();
  QuadraticShrinkage q;
  switch (variant) {
    case MvVariant::wss:
      q.h = ctx.lambda3 * Mat(ctx.w.asDiagonal());
      q.f = ctx.lambda3 * ctx.c * ctx.w.transpose();
      break;
    case MvVariant::nwss:
    case MvVariant::center:
      q.h = ctx.lambda3 * Mat::Identity(n, n);
      q.f = ctx.lambda3 * ctx.c * Vec::Ones(n).transpose();
      break;
    case MvVariant::tv:
      q.h = ctx.lambda3 * centering_matrix(n);
      q.f = Mat::Zero(m, n);
      break;
    case MvVariant::ssd:
      q.h = ctx.lambda3 * static_cast<double>(n) * centering_matrix(n);
      q.f = Mat::Zero(m, n);
      break;
  }
  q.h += ctx.lambda4 * Mat::Identity(n, n);
  q.f += ctx.lambda4 * ctx.a_prev;
  return q;
}

// Value of the same quadratic (shrinkage + anchor), used for objective traces.
inline double shrinkage_value(MvVariant variant, const Mat& a, const WssContext& ctx) {
  if (variant == MvVariant::wss) return wss_value(a, ctx);
  const double anchor = 0.5 * ctx.lambda4 * (a - ctx.a_prev).squaredNorm();
  return ctx.lambda3 * mv_value(a, variant, ctx.c) + anchor;
}

}  // namespace gqmu
