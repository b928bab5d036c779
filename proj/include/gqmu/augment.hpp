#pragma once

// Spectral augmentation: split each multispectral band into tau virtual
// hyperspectral bands, build the matching virtual spectral response matrix,
// and refine the split image with a plug-and-play denoiser.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "gqmu/error.hpp"
#include "gqmu/parallel.hpp"
#include "gqmu/tensor.hpp"

namespace gqmu {

// Smallest tau with tau * bands >= sources.
inline std::size_t determine_tau(std::size_t bands, std::size_t sources) {
  if (bands == 0 || sources == 0) throw InvalidInput("determine_tau: P and N must be >= 1");
  return (sources + bands - 1) / bands;
}

// D = I_P (x) 1_tau^T.
inline Mat build_srf(std::size_t bands, std::size_t tau) {
  if (bands == 0 || tau == 0) throw InvalidInput("build_srf: P and tau must be >= 1");
  Mat d = Mat::Zero(bands, bands * tau);
  for (std::size_t p = 0; p < bands; ++p)
    for (std::size_t t = 0; t < tau; ++t) d(p, p * tau + t) = 1.0;
  return d;
}

struct BspResult {
  Tensor3 z_tilde;  // split image after negativity clipping
  Mat d;            // P x (tau P) spectral response
  std::size_t tau = 0;
  std::size_t clipped = 0;  // entries that were negative before clipping
};

namespace detail {

// One halving step: P bands -> 2P bands, each pair summing to its source band.
inline Tensor3 split_in_two(const Tensor3& z) {
  const std::size_t p = z.channels();
  if (p < 2)
    throw InvalidInput("bsp_split: need at least two bands to form spectral differences, got " +
                       std::to_string(p));
  Tensor3 out(z.rows(), z.cols(), 2 * p);
  for (std::size_t q = 0; q < p; ++q) {
    // Forward difference; the last band reuses the backward difference.
    const std::size_t hi = q + 1 < p ? q + 1 : q;
    const std::size_t lo = q + 1 < p ? q : q - 1;
    auto src = z.channel(q);
    auto up = z.channel(hi);
    auto down = z.channel(lo);
    auto odd = out.channel(2 * q);
    auto even = out.channel(2 * q + 1);
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double h = 0.25 * (up[i] - down[i]);
      odd[i] = 0.5 * (src[i] - h);
      even[i] = 0.5 * (src[i] + h);
    }
  }
  return out;
}

}  // namespace detail

// The linear split without clipping; tau = 4 applies the tau = 2 rule twice.
inline Tensor3 bsp_split_raw(const Tensor3& zm, std::size_t tau) {
  if (tau != 2 && tau != 4)
    throw UnsupportedTau("bsp_split: tau = " + std::to_string(tau) +
                         " is not supported (only 2 and 4)");
  Tensor3 z = detail::split_in_two(zm);
  if (tau == 4) z = detail::split_in_two(z);
  return z;
}

inline BspResult bsp_split(const Tensor3& zm, std::size_t tau) {
  BspResult res;
  res.z_tilde = bsp_split_raw(zm, tau);
  for (double& v : res.z_tilde.data()) {
    if (v < 0.0) {
      v = 0.0;
      ++res.clipped;
    }
  }
  res.d = build_srf(zm.channels(), tau);
  res.tau = tau;
  return res;
}

struct Denoiser {
  std::string name;
  std::function<Tensor3(const Tensor3&)> apply;

  Tensor3 operator()(const Tensor3& t) const { return apply(t); }
};

// 5-tap Gaussian weights, normalized to sum to one.
inline std::array<double, 5> gaussian_taps(double sigma) {
  std::array<double, 5> w{};
  double sum = 0.0;
  for (int i = -2; i <= 2; ++i) {
    w[i + 2] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += w[i + 2];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable 5x5 Gaussian blur with replicate boundary, applied per band.
inline Tensor3 gaussian_blur(const Tensor3& t, double sigma) {
  if (!(sigma > 0.0)) throw InvalidInput("gaussian denoiser: sigma must be > 0");
  const auto w = gaussian_taps(sigma);
  const auto rows = static_cast<long>(t.rows());
  const auto cols = static_cast<long>(t.cols());
  Tensor3 out(t.rows(), t.cols(), t.channels());
  auto clampi = [](long v, long n) { return std::clamp(v, 0L, n - 1); };
  parallel_for(t.channels(), [&](std::size_t k) {
    auto src = t.channel(k);
    auto dst = out.channel(k);
    std::vector<double> tmp(src.size());
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) {
        double s = 0.0;
        for (long d = -2; d <= 2; ++d) s += w[d + 2] * src[r * cols + clampi(c + d, cols)];
        tmp[r * cols + c] = s;
      }
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) {
        double s = 0.0;
        for (long d = -2; d <= 2; ++d) s += w[d + 2] * tmp[clampi(r + d, rows) * cols + c];
        dst[r * cols + c] = s;
      }
  });
  return out;
}

inline Denoiser identity_denoiser() {
  return {"identity", [](const Tensor3& t) { return t; }};
}

inline Denoiser gaussian_denoiser(double sigma = 0.5) {
  if (!(sigma > 0.0)) throw InvalidInput("gaussian denoiser: sigma must be > 0");
  return {"gaussian:" + std::to_string(sigma),
          [sigma](const Tensor3& t) { return gaussian_blur(t, sigma); }};
}

// Accepts "identity", "gaussian" or "gaussian:<sigma>".
inline Denoiser parse_denoiser(const std::string& spec) {
  if (spec == "identity") return identity_denoiser();
  if (spec == "gaussian") return gaussian_denoiser();
  if (spec.rfind("gaussian:", 0) == 0) {
    double sigma = 0.0;
    try {
      std::size_t used = 0;
      sigma = std::stod(spec.substr(9), &used);
      if (used != spec.size() - 9) throw InvalidInput("trailing characters");
    } catch (const std::exception&) {
      throw InvalidInput("denoiser: cannot parse sigma in '" + spec + "'");
    }
    return gaussian_denoiser(sigma);
  }
  throw InvalidInput("denoiser: unknown denoiser '" + spec + "' (expected identity|gaussian:<sigma>)");
}

inline Tensor3 refine_virtual_hsi(const Tensor3& z_tilde, const Denoiser& denoiser) {
  Tensor3 out = denoiser(z_tilde);
  if (!out.same_shape(z_tilde))
    throw ContractViolation("denoiser '" + denoiser.name + "' returned shape " + out.dims_string() +
                            " for input " + z_tilde.dims_string());
  for (double v : out.data())
    if (!std::isfinite(v))
      throw ContractViolation("denoiser '" + denoiser.name + "' produced a non-finite value");
  return project_nonneg(std::move(out));
}

}  // namespace gqmu
