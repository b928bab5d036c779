#pragma once

// Wald-style evaluation: reference endmembers and abundances are degraded to
// a multispectral image, the unmixing result is compared against them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gqmu/error.hpp"
#include "gqmu/solver.hpp"
#include "gqmu/tensor.hpp"

namespace gqmu {

struct BandRange {
  double lo_nm = 0.0;
  double hi_nm = 0.0;
};

inline std::vector<BandRange> landsat_ranges() {
  return {{450, 520}, {520, 600}, {630, 690}, {760, 900}};
}

// Landsat ranges for P = 4, otherwise P equal slices of 450-900 nm.
inline std::vector<BandRange> default_ranges(std::size_t bands) {
  if (bands == 4) return landsat_ranges();
  std::vector<BandRange> r;
  const double w = 450.0 / static_cast<double>(bands);
  for (std::size_t p = 0; p < bands; ++p)
    r.push_back({450.0 + w * static_cast<double>(p), 450.0 + w * static_cast<double>(p + 1)});
  return r;
}

inline std::string range_string(const BandRange& r) {
  auto fmt = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  return fmt(r.lo_nm) + "-" + fmt(r.hi_nm) + " nm";
}

inline Mat spectral_downsample(const Mat& a_ref, const std::vector<double>& wavelengths_nm,
                               const std::vector<BandRange>& ranges) {
  if (static_cast<std::size_t>(a_ref.rows()) != wavelengths_nm.size())
    throw ProtocolError("spectral_downsample: " + std::to_string(wavelengths_nm.size()) +
                        " wavelengths for " + std::to_string(a_ref.rows()) + " reference bands");
  Mat b = Mat::Zero(static_cast<Eigen::Index>(ranges.size()), a_ref.cols());
  for (std::size_t p = 0; p < ranges.size(); ++p) {
    std::size_t count = 0;
    for (std::size_t m = 0; m < wavelengths_nm.size(); ++m) {
      if (wavelengths_nm[m] >= ranges[p].lo_nm && wavelengths_nm[m] <= ranges[p].hi_nm) {
        b.row(static_cast<Eigen::Index>(p)) += a_ref.row(static_cast<Eigen::Index>(m));
        ++count;
      }
    }
    if (count == 0)
      throw ProtocolError("spectral_downsample: range " + range_string(ranges[p]) +
                          " contains no reference band");
    b.row(static_cast<Eigen::Index>(p)) /= static_cast<double>(count);
  }
  return b;
}

inline Tensor3 synthesize_msi(const Tensor3& s_ref, const Mat& b_ref, double e, std::uint64_t seed,
                              const Tensor3* deviation = nullptr) {
  if (static_cast<std::size_t>(b_ref.cols()) != s_ref.channels())
    throw InvalidInput("synthesize_msi: B has " + std::to_string(b_ref.cols()) + " columns, S has " +
                       std::to_string(s_ref.channels()) + " channels");
  if (!(e >= 0.0)) throw InvalidInput("synthesize_msi: noise scale must be >= 0");
  Tensor3 z = mode3_mul(s_ref, b_ref);
  if (deviation) {
    if (!deviation->same_shape(z)) throw InvalidInput("synthesize_msi: deviation tensor shape mismatch");
    for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] += e * deviation->data()[i];
  } else if (e > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (double& v : z.data()) v += e * normal(rng);
  }
  return project_nonneg(std::move(z));
}

struct GroundTruth {
  Mat b_ref;                        // P x N
  Tensor3 s_ref;
  Mat a_ref;                        // M_ref x N, empty when not available
  std::vector<double> wavelengths;  // nm, one per row of a_ref
};

struct SynthConfig {
  std::size_t rows = 32;
  std::size_t cols = 32;
  std::size_t bands = 4;
  std::size_t sources = 6;
  double purity = 1.0;
  bool pure_pixels = true;
  double noise = 1e-4;
  bool residual_noise = false;
  std::string denoiser = "gaussian:0.5";  // used by the residual-noise variant
  std::uint64_t seed = 0;
  double min_angle_deg = 10.0;

  void validate() const {
    if (rows == 0 || cols == 0 || bands == 0 || sources == 0)
      throw ConfigError("synth: dimensions must be >= 1");
    if (!(purity <= 1.0) || !(purity > 1.0 / static_cast<double>(sources)) ||
        (sources == 1 && purity != 1.0))
      throw ConfigError("synth: purity must lie in (1/N, 1]");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("synth: noise scale must be >= 0");
    if (pure_pixels && rows * cols < sources)
      throw ConfigError("synth: image too small to hold one pure pixel per source");
  }
};

namespace detail {

inline double unit_angle(const Vec& a, const Vec& b) {
  const Vec ua = a / a.norm();
  const Vec ub = b / b.norm();
  return 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

// Reference spectra on a 400-1000 nm grid: absolute value of a Gaussian random
// walk, scaled to max 1.
inline std::pair<Mat, std::vector<double>> random_spectra(std::size_t n, std::mt19937_64& rng) {
  std::vector<double> wl;
  for (int nm = 400; nm <= 1000; nm += 10) wl.push_back(nm);
  std::normal_distribution<double> normal;
  Mat a(static_cast<Eigen::Index>(wl.size()), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    double walk = normal(rng);
    for (std::size_t m = 0; m < wl.size(); ++m) {
      walk += normal(rng);
      a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = std::abs(walk);
    }
    const double mx = a.col(static_cast<Eigen::Index>(j)).maxCoeff();
    if (mx > 0.0) a.col(static_cast<Eigen::Index>(j)) /= mx;
  }
  return {a, wl};
}

// Band splitting of a single spectrum, as one pixel.
inline Vec virtual_lift(const Vec& b, std::size_t tau) {
  Tensor3 px(1, 1, static_cast<std::size_t>(b.size()));
  for (Eigen::Index p = 0; p < b.size(); ++p) px(0, 0, static_cast<std::size_t>(p)) = b(p);
  const Tensor3 lifted = bsp_split_raw(px, tau);
  return Eigen::Map<const Vec>(lifted.data().data(), static_cast<Eigen::Index>(lifted.size()));
}

inline bool endmembers_admissible(const Mat& b, double min_angle_deg, std::size_t tau) {
  const Eigen::Index n = b.cols();
  for (Eigen::Index j = 0; j < n; ++j)
    if (!(b.col(j).norm() > 1e-6)) return false;
  // Lifted spectra must stay nonnegative so that no virtual band of a mixture
  // is clipped.
  if (tau > 1)
    for (Eigen::Index j = 0; j < n; ++j)
      if (virtual_lift(b.col(j), tau).minCoeff() < 0.0) return false;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (unit_angle(b.col(i), b.col(j)) * 180.0 / std::numbers::pi < min_angle_deg) return false;
  // Each column must be a vertex: clearly outside the hull of the others.
  for (Eigen::Index j = 0; j < n && n > 1; ++j) {
    Mat others(b.rows(), n - 1);
    for (Eigen::Index i = 0, c = 0; i < n; ++i)
      if (i != j) others.col(c++) = b.col(i);
    const Vec d = hull_distances(Mat(b.col(j)), others, 2000);
    if (!(d(0) > 1e-2 * b.col(j).norm())) return false;
  }
  return true;
}

}  // namespace detail

inline std::pair<GroundTruth, Tensor3> gen_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const auto ranges = default_ranges(cfg.bands);
  std::size_t tau = 1;
  if (cfg.bands >= 2) {
    const std::size_t t = determine_tau(cfg.bands, cfg.sources);
    tau = t <= 1 ? 1 : t <= 2 ? 2 : t <= 4 ? 4 : 1;
  }
  GroundTruth gt;
  bool found = false;
  for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
    auto [a, wl] = detail::random_spectra(cfg.sources, rng);
    Mat b = spectral_downsample(a, wl, ranges);
    if (detail::endmembers_admissible(b, cfg.min_angle_deg, tau)) {
      gt.a_ref = std::move(a);
      gt.wavelengths = std::move(wl);
      gt.b_ref = std::move(b);
      found = true;
    }
  }
  if (!found)
    throw DegenerateData("gen_synthetic: no admissible endmember set after 1000 tries (N = " +
                         std::to_string(cfg.sources) + ", P = " + std::to_string(cfg.bands) +
                         ", min angle " + std::to_string(cfg.min_angle_deg) + " deg)");

  // Dirichlet(1) abundances, pulled toward the uniform vector until the
  // largest entry is at most the purity.
  const std::size_t n = cfg.sources;
  const double uniform = 1.0 / static_cast<double>(n);
  Tensor3 s(cfg.rows, cfg.cols, n);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> draw(n);
  for (std::size_t r = 0; r < cfg.rows; ++r) {
    for (std::size_t c = 0; c < cfg.cols; ++c) {
      double sum = 0.0;
      for (double& v : draw) sum += (v = expo(rng));
      double mx = 0.0;
      for (double& v : draw) mx = std::max(mx, v /= sum);
      const double t = mx > cfg.purity ? (cfg.purity - uniform) / (mx - uniform) : 1.0;
      for (std::size_t k = 0; k < n; ++k) s(r, c, k) = t * draw[k] + (1.0 - t) * uniform;
    }
  }
  if (cfg.pure_pixels) {
    std::vector<std::size_t> idx(cfg.rows * cfg.cols);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t r = idx[k] / cfg.cols, c = idx[k] % cfg.cols;
      for (std::size_t j = 0; j < n; ++j) s(r, c, j) = j == k ? 1.0 : 0.0;
    }
  }
  gt.s_ref = std::move(s);

  const std::uint64_t noise_seed = rng();
  Tensor3 zm;
  if (cfg.residual_noise) {
    const Tensor3 clean = mode3_mul(gt.s_ref, gt.b_ref);
    Tensor3 dev = parse_denoiser(cfg.denoiser)(clean);
    double ss = 0.0;
    for (std::size_t i = 0; i < dev.size(); ++i) {
      dev.data()[i] = clean.data()[i] - dev.data()[i];
      ss += dev.data()[i] * dev.data()[i];
    }
    const double rms = std::sqrt(ss / static_cast<double>(dev.size()));
    if (rms > 0.0)
      for (double& v : dev.data()) v /= rms;
    zm = synthesize_msi(gt.s_ref, gt.b_ref, cfg.noise, noise_seed, &dev);
  } else {
    zm = synthesize_msi(gt.s_ref, gt.b_ref, cfg.noise, noise_seed);
  }
  return {std::move(gt), std::move(zm)};
}

// ---------------------------------------------------------------------------
// Metrics

struct PermutationMatch {
  std::vector<std::size_t> perm;  // perm[n] = estimate column matched to reference column n
  bool greedy = false;
};

inline constexpr std::size_t kMaxExhaustiveSources = 9;

// Angles in radians between reference column i and estimate column j.
inline Mat angle_matrix(const Mat& ref, const Mat& est, const char* what) {
  if (ref.rows() != est.rows() || ref.cols() != est.cols())
    throw InvalidInput(std::string(what) + ": reference and estimate shapes differ");
  for (Eigen::Index j = 0; j < ref.cols(); ++j) {
    if (!(ref.col(j).norm() > 0.0))
      throw MetricError(std::string(what) + ": reference column " + std::to_string(j) + " is zero",
                        static_cast<std::size_t>(j));
    if (!(est.col(j).norm() > 0.0))
      throw MetricError(std::string(what) + ": estimated column " + std::to_string(j) + " is zero",
                        static_cast<std::size_t>(j));
  }
  Mat ang(ref.cols(), ref.cols());
  for (Eigen::Index i = 0; i < ref.cols(); ++i)
    for (Eigen::Index j = 0; j < ref.cols(); ++j)
      ang(i, j) = detail::unit_angle(ref.col(i), est.col(j));
  return ang;
}

// Minimizes the sum of squared matched angles; exhaustive up to nine sources,
// ties resolved toward the lexicographically smallest permutation.
inline PermutationMatch match_angles(const Mat& ang) {
  const std::size_t n = static_cast<std::size_t>(ang.rows());
  PermutationMatch best;
  if (n > kMaxExhaustiveSources) {
    best.greedy = true;
    best.perm.assign(n, n);
    std::vector<bool> used_r(n, false), used_c(n, false);
    for (std::size_t step = 0; step < n; ++step) {
      double m = std::numeric_limits<double>::infinity();
      std::size_t bi = 0, bj = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (!used_r[i] && !used_c[j] && ang(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) < m) {
            m = ang(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            bi = i;
            bj = j;
          }
      used_r[bi] = used_c[bj] = true;
      best.perm[bi] = bj;
    }
    return best;
  }
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = ang(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p[i]));
      cost += a * a;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best.perm = p;
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

inline PermutationMatch match_permutation(const Mat& b_ref, const Mat& b_hat) {
  return match_angles(angle_matrix(b_ref, b_hat, "match_permutation"));
}

inline double rms_angle_deg(const Mat& ang, const std::vector<std::size_t>& perm) {
  double s = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const double a = ang(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
    s += a * a;
  }
  return std::sqrt(s / static_cast<double>(perm.size())) * 180.0 / std::numbers::pi;
}

namespace detail {
inline void greedy_notice(const char* what, std::size_t n) {
  std::cerr << "notice: " << what << ": " << n << " sources exceed " << kMaxExhaustiveSources
            << ", using greedy matching instead of exhaustive search\n";
}
}  // namespace detail

inline double phi_en(const Mat& b_ref, const Mat& b_hat) {
  const Mat ang = angle_matrix(b_ref, b_hat, "phi_en");
  const auto m = match_angles(ang);
  if (m.greedy) detail::greedy_notice("phi_en", m.perm.size());
  return rms_angle_deg(ang, m.perm);
}

inline Mat abundance_columns(const Tensor3& s) { return mode3_matricize(s).transpose(); }

inline PermutationMatch abundance_permutation(const Tensor3& s_ref, const Tensor3& s_hat) {
  if (!s_ref.same_shape(s_hat)) throw InvalidInput("phi_ab: abundance shapes differ");
  return match_angles(angle_matrix(abundance_columns(s_ref), abundance_columns(s_hat), "phi_ab"));
}

inline double phi_ab(const Tensor3& s_ref, const Tensor3& s_hat) {
  if (!s_ref.same_shape(s_hat)) throw InvalidInput("phi_ab: abundance shapes differ");
  const Mat ang = angle_matrix(abundance_columns(s_ref), abundance_columns(s_hat), "phi_ab");
  const auto m = match_angles(ang);
  if (m.greedy) detail::greedy_notice("phi_ab", m.perm.size());
  return rms_angle_deg(ang, m.perm);
}

inline double rmse_x100(const Tensor3& s_ref, const Tensor3& s_hat, const std::vector<std::size_t>& perm) {
  if (!s_ref.same_shape(s_hat)) throw InvalidInput("rmse: abundance shapes differ");
  if (perm.size() != s_ref.channels()) throw InvalidInput("rmse: permutation length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    const auto a = s_ref.channel(k);
    const auto b = s_hat.channel(perm[k]);
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return 100.0 * std::sqrt(s / static_cast<double>(s_ref.size()));
}

struct MetricsReport {
  double phi_en_deg = 0.0;
  double phi_ab_deg = 0.0;
  double rmse_x100 = 0.0;
  std::vector<std::size_t> permutation;  // abundance-optimal, shared with rmse
  double runtime_sec = 0.0;
  bool greedy = false;
};

inline MetricsReport compute_metrics(const Mat& b_ref, const Tensor3& s_ref, const Mat& b_hat,
                                     const Tensor3& s_hat, double runtime_sec = 0.0) {
  if (b_ref.cols() != b_hat.cols() || static_cast<std::size_t>(b_ref.cols()) != s_ref.channels() ||
      s_ref.channels() != s_hat.channels())
    throw InvalidInput("metrics: source counts disagree");
  MetricsReport r;
  const Mat ang_en = angle_matrix(b_ref, b_hat, "phi_en");
  const auto m_en = match_angles(ang_en);
  r.phi_en_deg = rms_angle_deg(ang_en, m_en.perm);
  if (!s_ref.same_shape(s_hat)) throw InvalidInput("metrics: abundance shapes differ");
  const Mat ang_ab = angle_matrix(abundance_columns(s_ref), abundance_columns(s_hat), "phi_ab");
  const auto m_ab = match_angles(ang_ab);
  r.phi_ab_deg = rms_angle_deg(ang_ab, m_ab.perm);
  r.permutation = m_ab.perm;
  r.rmse_x100 = rmse_x100(s_ref, s_hat, m_ab.perm);
  r.greedy = m_en.greedy || m_ab.greedy;
  if (r.greedy) detail::greedy_notice("metrics", m_ab.perm.size());
  r.runtime_sec = runtime_sec;
  return r;
}

// ---------------------------------------------------------------------------
// Baseline and protocol driver

struct BaselineResult {
  Mat b_hat;
  Tensor3 s_hat;
  double runtime_sec = 0.0;
};

// Successive projection on the multispectral pixels, abundances from the
// pseudo-inverse clipped at zero.
inline BaselineResult naive_baseline(const Tensor3& zm, std::size_t n) {
  const auto t0 = std::chrono::steady_clock::now();
  BaselineResult r;
  r.b_hat = spa_select(zm, n).endmembers;
  const Mat pinv = Eigen::CompleteOrthogonalDecomposition<Mat>(r.b_hat).pseudoInverse();
  r.s_hat = fold3(project_nonneg(Mat(pinv * mode3_matricize(zm))), zm.rows(), zm.cols());
  r.runtime_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

struct ProtocolReport {
  MetricsReport method;
  MetricsReport baseline;
  UnmixResult unmix;
};

inline ProtocolReport evaluate_protocol(const GroundTruth& gt, const Tensor3& zm, SolverConfig solver) {
  solver.n_sources = static_cast<std::size_t>(gt.b_ref.cols());
  ProtocolReport rep;
  rep.unmix = gqmu_run(zm, solver);
  rep.method = compute_metrics(gt.b_ref, gt.s_ref, rep.unmix.b_star, rep.unmix.s_star,
                               rep.unmix.runtime_sec);
  const auto base = naive_baseline(zm, solver.n_sources);
  rep.baseline = compute_metrics(gt.b_ref, gt.s_ref, base.b_hat, base.s_hat, base.runtime_sec);
  return rep;
}

inline ProtocolReport run_protocol(const SynthConfig& synth, const SolverConfig& solver) {
  auto [gt, zm] = gen_synthetic(synth);
  return evaluate_protocol(gt, zm, solver);
}

// Reference spectra supplied by the user (hyperspectral A_ref with band
// centers, abundances S_ref) instead of the synthetic generator.
inline ProtocolReport run_protocol_wald(const Mat& a_ref, const std::vector<double>& wavelengths,
                                        const Tensor3& s_ref, const std::vector<BandRange>& ranges,
                                        double noise, std::uint64_t seed, const SolverConfig& solver) {
  GroundTruth gt;
  gt.a_ref = a_ref;
  gt.wavelengths = wavelengths;
  gt.b_ref = spectral_downsample(a_ref, wavelengths, ranges);
  gt.s_ref = s_ref;
  const Tensor3 zm = synthesize_msi(s_ref, gt.b_ref, noise, seed);
  return evaluate_protocol(gt, zm, solver);
}

}  // namespace gqmu
