#pragma once

// Alternating NMF/ADMM unmixing in the virtual hyperspectral domain:
//
//   min_{A>=0, S>=0} 1/2||Z_m - S x3 A x3 D||^2 + 1/2||Z_h - S x3 A||^2
//                    + l1 ||S||_1 + l2/2 ||S - S_qu||^2 + WSS(A; w)
//
// S is updated by a few ADMM rounds (closed-form quadratic step + shrinkage +
// scaled dual update), A by one Kronecker-structured quadratic solve. Both
// subproblems drop the sign constraint and project afterwards.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "gqmu/augment.hpp"
#include "gqmu/error.hpp"
#include "gqmu/geometry.hpp"
#include "gqmu/prior.hpp"
#include "gqmu/tensor.hpp"

namespace gqmu {

struct SolverConfig {
  double lambda1 = 1e-3;
  double lambda2 = 1e-2;
  double lambda3_dag = 1e-1;
  double lambda4_dag_init = 1e-2;
  double lambda4_growth = 1.2;
  double scale = 1e4;  // lambda3 = lambda3_dag * scale, lambda4 = lambda4_dag * scale
  bool scale_by_pixels = false;  // multiply scale by L / 256^2
  double mu = 1.0;
  std::size_t outer_iters = 5;
  std::size_t admm_iters = 20;
  PriorKind prior = PriorKind::qdip;
  std::string denoiser = "gaussian:0.5";
  MvVariant mv_variant = MvVariant::wss;
  std::size_t n_sources = 0;
  std::uint64_t seed = 0;
  std::size_t tau = 0;     // 0 picks the smallest supported split
  double tol = 0.0;        // relative change of S for early stop; 0 disables
  bool recompute_weights = false;
  QdipConfig qdip;  // qdip.seed seeds the prior

  double effective_scale(std::size_t pixels) const {
    return scale_by_pixels ? scale * static_cast<double>(pixels) / 65536.0 : scale;
  }

  void validate() const {
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ConfigError(std::string("solver: ") + name + " must be a finite value >= 0");
    };
    nonneg(lambda1, "lambda1");
    nonneg(lambda2, "lambda2");
    nonneg(lambda3_dag, "lambda3_dag");
    nonneg(lambda4_dag_init, "lambda4_dag_init");
    nonneg(lambda4_growth, "lambda4_growth");
    nonneg(scale, "scale");
    nonneg(tol, "tol");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("solver: mu must be > 0");
    if (outer_iters == 0 || admm_iters == 0)
      throw ConfigError("solver: iteration counts must be >= 1");
    if (n_sources == 0) throw ConfigError("solver: n_sources must be >= 1");
    if (qdip.iterations == 0 && prior == PriorKind::qdip)
      throw ConfigError("solver: qdip iterations must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// Initialization

namespace detail {

// Euclidean projection of v onto the probability simplex.
inline void project_simplex(Eigen::Ref<Vec> v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cum += u[static_cast<std::size_t>(i)];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[static_cast<std::size_t>(i)] - t > 0.0) theta = t;
  }
  v = (v.array() - theta).cwiseMax(0.0);
}

// Distance of each column of X to conv(columns of W), by accelerated
// projected gradient on the simplex-constrained least squares.
inline Vec hull_distances(const Mat& x, const Mat& w, int iterations = 300) {
  const Mat g = w.transpose() * w;
  const Mat b = w.transpose() * x;
  const double lip = std::max(Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().maxCoeff(), 1e-300);
  const Eigen::Index k = w.cols();
  Vec dist(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Vec h = Vec::Constant(k, 1.0 / static_cast<double>(k));
    Vec z = h;
    double t = 1.0;
    for (int it = 0; it < iterations; ++it) {
      Vec next = z - (g * z - b.col(j)) / lip;
      project_simplex(next);
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      z = next + ((t - 1.0) / tn) * (next - h);
      h = std::move(next);
      t = tn;
    }
    dist(j) = (x.col(j) - w * h).norm();
  }
  return dist;
}

// First index of the maximum (ties go to the lowest index).
inline Eigen::Index argmax_first(const Vec& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

}  // namespace detail

struct SpaResult {
  Mat endmembers;                   // M x N, actual pixel spectra
  std::vector<std::size_t> pixels;  // matricized column index of each pick
  std::size_t orthogonal_picks = 0;
};

// Successive projection over the pixels of `z` (M bands): each pick is the
// pixel with the largest residual after projecting out the previous picks.
// When the data span fewer than N dimensions, the orthogonal residual dies
// out; the remaining picks then maximize the distance to the convex hull of
// the picks so far, which still selects extreme pixels.
inline SpaResult spa_select(const Tensor3& z, std::size_t n, double rank_tol = 1e-2) {
  if (n == 0) throw InvalidInput("spa_init: need at least one source");
  if (z.pixels() < n)
    throw DegenerateData("spa_init: " + std::to_string(z.pixels()) + " pixels cannot supply " +
                         std::to_string(n) + " endmembers");
  const Mat x = mode3_matricize(z);
  Mat r = x;
  SpaResult res;
  double first = 0.0;
  bool orthogonal = true;
  for (std::size_t pick = 0; pick < n; ++pick) {
    Eigen::Index j = 0;
    if (orthogonal) {
      const Vec norms = r.colwise().norm().transpose();
      j = detail::argmax_first(norms);
      if (pick == 0) {
        first = norms(j);
        if (!(first > 0.0)) throw DegenerateData("spa_init: all pixels are zero");
      }
      if (norms(j) <= rank_tol * first) {
        orthogonal = false;
      } else {
        const Vec u = r.col(j) / norms(j);
        r -= u * (u.transpose() * r);
        ++res.orthogonal_picks;
      }
    }
    if (!orthogonal) {
      Mat w(x.rows(), static_cast<Eigen::Index>(res.pixels.size()));
      for (std::size_t i = 0; i < res.pixels.size(); ++i)
        w.col(static_cast<Eigen::Index>(i)) = x.col(static_cast<Eigen::Index>(res.pixels[i]));
      const Vec dist = detail::hull_distances(x, w);
      j = detail::argmax_first(dist);
      if (dist(j) <= 1e-9 * first)
        throw DegenerateData("spa_init: data collapse after " + std::to_string(pick) + " of " +
                             std::to_string(n) + " picks; no further extreme pixel exists");
    }
    res.pixels.push_back(static_cast<std::size_t>(j));
  }
  res.endmembers.resize(x.rows(), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    res.endmembers.col(static_cast<Eigen::Index>(i)) = x.col(static_cast<Eigen::Index>(res.pixels[i]));
  return res;
}

inline Mat spa_init(const Tensor3& zh, std::size_t n) {
  if (zh.channels() < n)
    throw InvalidInput("spa_init: " + std::to_string(zh.channels()) + " bands cannot hold " +
                       std::to_string(n) + " sources");
  return spa_select(zh, n).endmembers;
}

// Per-pixel non-negative least squares by projected gradient from the uniform
// start, step 1/||A0^T A0||_2. If `trace` is given it receives the objective
// 1/2||Z - A0 S||^2 before the first and after every iteration.
inline Tensor3 nnls_abundances(const Tensor3& zh, const Mat& a0, std::size_t iterations = 500,
                               std::vector<double>* trace = nullptr) {
  if (static_cast<std::size_t>(a0.rows()) != zh.channels())
    throw InvalidInput("nnls_abundances: A0 rows do not match the image bands");
  const Mat x = mode3_matricize(zh);
  const Mat g = a0.transpose() * a0;
  const Mat b = a0.transpose() * x;
  const double lip = Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().maxCoeff();
  if (!(lip > 0.0)) throw DegenerateData("nnls_abundances: A0 is zero");
  const Eigen::Index n = a0.cols();
  Mat s = Mat::Constant(n, x.cols(), 1.0 / static_cast<double>(n));
  const double xx = x.squaredNorm();
  auto objective = [&] { return 0.5 * ((s.transpose() * g).cwiseProduct(s.transpose()).sum() -
                                       2.0 * b.cwiseProduct(s).sum() + xx); };
  if (trace) trace->push_back(objective());
  for (std::size_t it = 0; it < iterations; ++it) {
    s = (s - (g * s - b) / lip).cwiseMax(0.0);
    if (trace) trace->push_back(objective());
  }
  return fold3(s, zh.rows(), zh.cols());
}

struct Initialization {
  Mat a0;
  Tensor3 s0;
};

using Initializer = std::function<Initialization(const Tensor3& zh, std::size_t n)>;

inline Initialization spa_nnls_initializer(const Tensor3& zh, std::size_t n) {
  Initialization init;
  init.a0 = spa_init(zh, n);
  init.s0 = nnls_abundances(zh, init.a0);
  return init;
}

// ---------------------------------------------------------------------------
// S-subproblem

// Data of the S-step in matricized form. The quadratic is
//   1/2||Zm - D A S||^2 + 1/2||Zh - A S||^2 + l2/2||S - Squ||^2 + mu/2||S - T||^2,
// minimized without the sign constraint by (R + (l2+mu) I) S = P + mu T.
struct SUpdateSystem {
  Mat lhs;        // R + (l2 + mu) I
  Mat rhs_fixed;  // P
  double mu = 1.0;
};

inline SUpdateSystem s_update_system(const Mat& a, const Mat& zm3, const Mat& zh3, const Mat& d,
                                     const Mat& squ3, double lambda2, double mu) {
  if (d.cols() != a.rows() || zm3.rows() != d.rows() || zh3.rows() != a.rows() ||
      squ3.rows() != a.cols() || zm3.cols() != zh3.cols() || squ3.cols() != zh3.cols())
    throw InvalidInput("admm_update_S: inconsistent shapes");
  if (!(lambda2 >= 0.0) || !(mu >= 0.0)) throw InvalidInput("admm_update_S: lambda2 and mu must be >= 0");
  const Mat da = d * a;
  SUpdateSystem sys;
  sys.lhs = da.transpose() * da + a.transpose() * a;
  sys.lhs.diagonal().array() += lambda2 + mu;
  sys.rhs_fixed = da.transpose() * zm3 + a.transpose() * zh3 + lambda2 * squ3;
  sys.mu = mu;
  return sys;
}

inline Mat solve_s_unprojected(const SUpdateSystem& sys, const Mat& t3) {
  return solve_spd(sys.lhs, sys.rhs_fixed + sys.mu * t3);
}

// Pre-projection S-step in matricized form (N x L).
inline Mat admm_update_S_unprojected(const Mat& a, const Tensor3& zm, const Tensor3& zh, const Mat& d,
                                     const Tensor3& squ, const Tensor3& y, const Tensor3& v,
                                     double lambda2, double mu) {
  const auto sys = s_update_system(a, mode3_matricize(zm), mode3_matricize(zh), d,
                                   mode3_matricize(squ), lambda2, mu);
  return solve_s_unprojected(sys, mode3_matricize(y) - mode3_matricize(v));
}

inline Tensor3 admm_update_S(const Mat& a, const Tensor3& zm, const Tensor3& zh, const Mat& d,
                             const Tensor3& squ, const Tensor3& y, const Tensor3& v, double lambda2,
                             double mu) {
  return fold3(project_nonneg(admm_update_S_unprojected(a, zm, zh, d, squ, y, v, lambda2, mu)),
               zh.rows(), zh.cols());
}

struct AdmmResult {
  Tensor3 s;
  Tensor3 y;
  Tensor3 v;
  std::vector<double> primal_residuals;  // ||Y - S||_F after each round
};

struct AdmmInputs {
  const Mat& a;
  const Tensor3& zm;
  const Tensor3& zh;
  const Mat& d;
  const Tensor3& squ;
  const Tensor3& s_start;
};

inline AdmmResult admm_solve(const AdmmInputs& in, double lambda1, double lambda2, double mu,
                             std::size_t iterations) {
  if (!(lambda1 >= 0.0)) throw InvalidInput("admm_solve: lambda1 must be >= 0");
  const auto sys = s_update_system(in.a, mode3_matricize(in.zm), mode3_matricize(in.zh), in.d,
                                   mode3_matricize(in.squ), lambda2, mu);
  const double c = lambda1 / mu;
  Mat y = mode3_matricize(in.s_start);
  Mat v = Mat::Zero(y.rows(), y.cols());
  Mat s = y;
  AdmmResult res;
  for (std::size_t q = 0; q < iterations; ++q) {
    s = project_nonneg(solve_s_unprojected(sys, y - v));
    y = (s + v).unaryExpr([c](double x) { return soft_threshold(x, c); });
    v -= y - s;
    res.primal_residuals.push_back((y - s).norm());
  }
  const std::size_t rows = in.zh.rows(), cols = in.zh.cols();
  res.s = fold3(s, rows, cols);
  res.y = fold3(y, rows, cols);
  res.v = fold3(v, rows, cols);
  return res;
}

// ---------------------------------------------------------------------------
// A-subproblem

// vec() is column-major: entry (m, n) of an M x N matrix maps to m + n*M.
inline Vec vec_colmajor(const Mat& a) {
  Vec out(a.size());
  for (Eigen::Index n = 0; n < a.cols(); ++n)
    for (Eigen::Index m = 0; m < a.rows(); ++m) out(m + n * a.rows()) = a(m, n);
  return out;
}

inline Mat unvec_colmajor(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  Mat out(rows, cols);
  for (Eigen::Index n = 0; n < cols; ++n)
    for (Eigen::Index m = 0; m < rows; ++m) out(m, n) = v(m + n * rows);
  return out;
}

// Pre-projection A-step: solves J1 vec(A) = J2 z_m + J3 z_h + vec(F) with
//   J1 = SS^T (x) D^T D + SS^T (x) I_M + H (x) I_M
// where (H, F) describe the shrinkage regularizer plus its anchor.
inline Mat update_A_unprojected(const Tensor3& s, const Tensor3& zm, const Tensor3& zh, const Mat& d,
                                const QuadraticShrinkage& reg) {
  const Mat s3 = mode3_matricize(s);
  const Mat zm3 = mode3_matricize(zm);
  const Mat zh3 = mode3_matricize(zh);
  const Eigen::Index m = d.cols();
  const Eigen::Index n = s3.rows();
  if (zh3.rows() != m || zm3.rows() != d.rows() || zm3.cols() != s3.cols() ||
      zh3.cols() != s3.cols() || reg.h.rows() != n || reg.f.rows() != m || reg.f.cols() != n)
    throw InvalidInput("update_A: inconsistent shapes");
  const Mat sst = s3 * s3.transpose();
  const Mat im = Mat::Identity(m, m);
  const Mat j1 = kron(sst, d.transpose() * d) + kron(sst, im) + kron(reg.h, im);
  const Mat rhs_mat = d.transpose() * zm3 * s3.transpose() + zh3 * s3.transpose() + reg.f;
  const Mat rhs = vec_colmajor(rhs_mat);
  const Mat sol = solve_spd(j1, rhs);
  return unvec_colmajor(sol.col(0), m, n);
}

inline Mat update_A(const Tensor3& s, const Tensor3& zm, const Tensor3& zh, const Mat& d,
                    const QuadraticShrinkage& reg) {
  return project_nonneg(update_A_unprojected(s, zm, zh, d, reg));
}

inline Mat update_A(const Tensor3& s, const Tensor3& zm, const Tensor3& zh, const Mat& d,
                    const WssContext& ctx, MvVariant variant = MvVariant::wss) {
  return update_A(s, zm, zh, d, shrinkage_quadratic(variant, ctx));
}

// ---------------------------------------------------------------------------
// Full pipeline

struct IterationDiagnostics {
  std::size_t iteration = 0;
  double objective = 0.0;
  double primal_residual = 0.0;  // final ADMM ||Y - S||_F of this outer iteration
  double lambda4_dag = 0.0;      // value used by this iteration's A-update
};

struct UnmixResult {
  Mat b_star;     // P x N
  Mat a_star;     // M x N
  Tensor3 s_star;
  Tensor3 y_final;  // sparse ADMM copy of the last round
  Tensor3 z_h;
  Mat d;
  std::size_t tau = 0;
  std::size_t bsp_clipped = 0;
  Mat a0;
  Tensor3 s0;
  Vec weights;
  Vec center;
  std::vector<IterationDiagnostics> iterations;
  std::vector<std::vector<double>> admm_residuals;
  std::string prior_provider;
  std::vector<double> prior_loss;
  std::uint64_t circuit_simulations = 0;
  double runtime_sec = 0.0;
};

// Full objective with the anchor taken against `a_prev`.
inline double gqmu_objective(const Mat& a, const Tensor3& s, const Tensor3& zm, const Tensor3& zh,
                             const Mat& d, const Tensor3& squ, const WssContext& ctx, MvVariant variant,
                             double lambda1, double lambda2) {
  const Tensor3 fit_h = mode3_mul(s, a);
  const Tensor3 fit_m = mode3_mul(fit_h, d);
  double df = 0.0;
  for (std::size_t i = 0; i < fit_m.size(); ++i) {
    const double e = zm.data()[i] - fit_m.data()[i];
    df += e * e;
  }
  for (std::size_t i = 0; i < fit_h.size(); ++i) {
    const double e = zh.data()[i] - fit_h.data()[i];
    df += e * e;
  }
  double l1 = 0.0, prior = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    l1 += std::abs(s.data()[i]);
    const double e = s.data()[i] - squ.data()[i];
    prior += e * e;
  }
  return 0.5 * df + lambda1 * l1 + 0.5 * lambda2 * prior + shrinkage_value(variant, a, ctx);
}

// tau actually used for P bands and N sources: the smallest of {1, 2, 4}
// with tau * P >= N, unless `requested` forces one.
inline std::size_t effective_tau(std::size_t bands, std::size_t sources, std::size_t requested) {
  if (requested != 0) {
    if (requested != 1 && requested != 2 && requested != 4)
      throw UnsupportedTau("tau = " + std::to_string(requested) + " is not supported (1, 2 or 4)");
    if (requested * bands < sources)
      throw ConfigError("tau = " + std::to_string(requested) + " leaves " +
                        std::to_string(requested * bands) + " virtual bands for " +
                        std::to_string(sources) + " sources");
    return requested;
  }
  const std::size_t t = determine_tau(bands, sources);
  if (t <= 2) return t;
  if (t <= 4) return 4;
  throw UnsupportedTau("tau = " + std::to_string(t) + " would be needed for " + std::to_string(sources) +
                       " sources from " + std::to_string(bands) + " bands; only tau <= 4 is supported");
}

inline UnmixResult gqmu_run(const Tensor3& zm, const SolverConfig& cfg,
                            const Initializer& initializer = spa_nnls_initializer) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  const std::size_t n = cfg.n_sources;
  const std::size_t bands = zm.channels();
  if (zm.empty()) throw ConfigError("gqmu_run: empty multispectral image");
  for (double v : zm.data())
    if (!std::isfinite(v)) throw ConfigError("gqmu_run: multispectral image contains non-finite values");

  UnmixResult res;
  res.tau = effective_tau(bands, n, cfg.tau);
  if (res.tau > 1 && bands < 2)
    throw ConfigError("gqmu_run: band splitting needs at least two bands");
  if (zm.pixels() < n)
    throw ConfigError("gqmu_run: fewer pixels than sources");
  Denoiser denoiser;
  try {
    denoiser = parse_denoiser(cfg.denoiser);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (cfg.prior == PriorKind::qdip) {
    const std::size_t side = seed_side(cfg.qdip.n_qubits, cfg.qdip.readout);
    decoder_depth(side, zm.rows(), zm.cols());
  }

  // Virtual hyperspectral image and spectral response.
  Tensor3 z_tilde;
  if (res.tau == 1) {
    z_tilde = project_nonneg(zm);
    res.d = Mat::Identity(bands, bands);
  } else {
    BspResult bsp = bsp_split(zm, res.tau);
    z_tilde = std::move(bsp.z_tilde);
    res.d = std::move(bsp.d);
    res.bsp_clipped = bsp.clipped;
  }
  res.z_h = refine_virtual_hsi(z_tilde, denoiser);
  const Tensor3& zh = res.z_h;

  Initialization init = initializer(zh, n);
  if (static_cast<std::size_t>(init.a0.rows()) != zh.channels() ||
      static_cast<std::size_t>(init.a0.cols()) != n || init.s0.channels() != n ||
      init.s0.rows() != zh.rows() || init.s0.cols() != zh.cols())
    throw ContractViolation("initializer returned shapes inconsistent with the virtual image");
  res.a0 = init.a0;
  res.s0 = init.s0;

  const std::uint64_t sims_before = circuit_simulation_counter().load();
  PriorResult prior = provide_prior(cfg.prior, zh, init.a0, init.s0, cfg.qdip);
  res.circuit_simulations = circuit_simulation_counter().load() - sims_before;
  res.prior_provider = prior.provider;
  res.prior_loss = prior.loss_trace;

  WssContext ctx;
  ctx.w = cfg.mv_variant == MvVariant::wss ? sparsity_weights(init.s0)
                                           : Vec(Vec::Ones(static_cast<Eigen::Index>(n)));
  if (cfg.mv_variant == MvVariant::center) {
    ctx.c = mode3_matricize(zh).rowwise().mean();
  } else {
    ctx.c = simplex_center(init.a0);
  }
  const double scale = cfg.effective_scale(zm.pixels());
  ctx.lambda3 = cfg.lambda3_dag * scale;
  res.weights = ctx.w;
  res.center = ctx.c;

  Mat a = init.a0;
  Tensor3 s = init.s0;
  double lambda4_dag = cfg.lambda4_dag_init;
  ctx.a_prev = a;
  ctx.lambda4 = lambda4_dag * scale;
  res.iterations.push_back({0, gqmu_objective(a, s, zm, zh, res.d, prior.s_qu, ctx, cfg.mv_variant,
                                              cfg.lambda1, cfg.lambda2),
                            0.0, lambda4_dag});

  for (std::size_t k = 1; k <= cfg.outer_iters; ++k) {
    AdmmResult admm = admm_solve({a, zm, zh, res.d, prior.s_qu, s}, cfg.lambda1, cfg.lambda2, cfg.mu,
                                 cfg.admm_iters);
    double change = 0.0;
    if (cfg.tol > 0.0) {
      double diff = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double e = admm.s.data()[i] - s.data()[i];
        diff += e * e;
      }
      change = std::sqrt(diff) / std::max(s.frobenius_norm(), std::numeric_limits<double>::min());
    }
    s = std::move(admm.s);
    res.y_final = std::move(admm.y);

    if (cfg.recompute_weights && cfg.mv_variant == MvVariant::wss) ctx.w = sparsity_weights(s);
    lambda4_dag *= cfg.lambda4_growth;
    ctx.lambda4 = lambda4_dag * scale;
    ctx.a_prev = a;
    a = update_A(s, zm, zh, res.d, ctx, cfg.mv_variant);

    res.iterations.push_back({k,
                              gqmu_objective(a, s, zm, zh, res.d, prior.s_qu, ctx, cfg.mv_variant,
                                             cfg.lambda1, cfg.lambda2),
                              admm.primal_residuals.back(), lambda4_dag});
    res.admm_residuals.push_back(std::move(admm.primal_residuals));
    if (cfg.tol > 0.0 && change < cfg.tol) break;
  }

  res.a_star = a;
  res.s_star = std::move(s);
  res.b_star = res.d * res.a_star;
  res.runtime_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace gqmu
