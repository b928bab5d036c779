#pragma once

// Quantum deep image prior: circuit read-out -> 2-D seed map -> stack of
// stride-2 transposed convolutions -> per-pixel softmax over N abundance
// channels. Trained per instance with Adam against ||Z_h - S x_3 A0||_F^2.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gqmu/error.hpp"
#include "gqmu/quantum.hpp"
#include "gqmu/tensor.hpp"

namespace gqmu {

// Transposed convolution, kernel 4, stride 2, padding 1 (doubles H and W).
// weight layout: [in][out][ky][kx].
struct TConvLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::vector<double> weight;
  std::vector<double> bias;
};

struct QdipParams {
  CircuitParams circuit;
  std::vector<TConvLayer> decoder;
};

struct QdipConfig {
  std::size_t n_qubits = 16;
  Readout readout = Readout::pauli_z;
  // Hidden widths for the deepest decoder; shallower decoders keep the tail.
  std::vector<std::size_t> widths{32, 32, 16, 16, 8};
  double learning_rate = 5e-2;
  std::size_t iterations = 200;
  std::uint64_t seed = 0;
  double leaky_slope = 0.1;
  bool toffoli = true;
};

// Activation map, channel-major like Tensor3.
struct FeatureMap {
  std::size_t channels = 0, height = 0, width = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(std::size_t c, std::size_t h, std::size_t w)
      : channels(c), height(h), width(w), data(c * h * w, 0.0) {}

  double& at(std::size_t c, std::size_t y, std::size_t x) { return data[(c * height + y) * width + x]; }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * height + y) * width + x];
  }
};

inline std::size_t seed_side(std::size_t n_qubits, Readout r) {
  const std::size_t len = readout_length(n_qubits, r);
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(len))));
  if (side * side != len)
    throw ConfigError("qdip: read-out length " + std::to_string(len) +
                      " is not a perfect square; cannot form a seed map");
  return side;
}

// Number of doubling blocks from the seed to (rows, cols).
inline std::size_t decoder_depth(std::size_t side, std::size_t rows, std::size_t cols) {
  std::size_t size = side, depth = 0;
  while (size < rows) {
    size *= 2;
    ++depth;
  }
  if (rows != cols || size != rows || depth == 0)
    throw ConfigError("qdip: target " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " is unreachable from a " + std::to_string(side) + "x" + std::to_string(side) +
                      " seed; crop or pad the image to a square of side " + std::to_string(side) +
                      "*2^t (t >= 1)");
  return depth;
}

inline std::vector<std::size_t> decoder_channels(const QdipConfig& cfg, std::size_t depth,
                                                 std::size_t sources) {
  std::vector<std::size_t> ch{1};
  const std::size_t hidden = depth - 1;
  for (std::size_t i = 0; i < hidden; ++i) {
    const std::size_t from_end = hidden - i;
    const std::size_t w = cfg.widths.empty()
                              ? 8
                              : (from_end <= cfg.widths.size() ? cfg.widths[cfg.widths.size() - from_end]
                                                               : cfg.widths.front());
    ch.push_back(w);
  }
  ch.push_back(sources);
  return ch;
}

// Circuit angles uniform in [0, 2 pi); decoder weights and biases uniform in
// [-s, s] with s = 1/sqrt(fan_in), fan_in = in_channels * 16.
inline QdipParams qdip_init(const QdipConfig& cfg, std::size_t rows, std::size_t cols,
                            std::size_t sources) {
  check_qubits(cfg.n_qubits);
  if (sources == 0) throw ConfigError("qdip: need at least one source");
  const std::size_t depth = decoder_depth(seed_side(cfg.n_qubits, cfg.readout), rows, cols);
  std::mt19937_64 rng(cfg.seed);
  QdipParams p;
  p.circuit = CircuitParams::random(cfg.n_qubits, rng);
  p.circuit.toffoli = cfg.toffoli;
  const auto ch = decoder_channels(cfg, depth, sources);
  for (std::size_t b = 0; b < depth; ++b) {
    TConvLayer layer;
    layer.in_channels = ch[b];
    layer.out_channels = ch[b + 1];
    const double s = 1.0 / std::sqrt(static_cast<double>(ch[b] * 16));
    std::uniform_real_distribution<double> u(-s, s);
    layer.weight.resize(ch[b] * ch[b + 1] * 16);
    for (double& w : layer.weight) w = u(rng);
    layer.bias.resize(ch[b + 1]);
    for (double& v : layer.bias) v = u(rng);
    p.decoder.push_back(std::move(layer));
  }
  return p;
}

inline FeatureMap tconv_forward(const TConvLayer& layer, const FeatureMap& in) {
  FeatureMap out(layer.out_channels, in.height * 2, in.width * 2);
  for (std::size_t co = 0; co < layer.out_channels; ++co)
    for (std::size_t i = co * out.height * out.width; i < (co + 1) * out.height * out.width; ++i)
      out.data[i] = layer.bias[co];
  const auto oh = static_cast<long>(out.height), ow = static_cast<long>(out.width);
  for (std::size_t ci = 0; ci < layer.in_channels; ++ci)
    for (std::size_t iy = 0; iy < in.height; ++iy)
      for (std::size_t ix = 0; ix < in.width; ++ix) {
        const double v = in.at(ci, iy, ix);
        if (v == 0.0) continue;
        for (std::size_t co = 0; co < layer.out_channels; ++co) {
          const double* w = &layer.weight[(ci * layer.out_channels + co) * 16];
          for (long ky = 0; ky < 4; ++ky) {
            const long oy = 2 * static_cast<long>(iy) - 1 + ky;
            if (oy < 0 || oy >= oh) continue;
            for (long kx = 0; kx < 4; ++kx) {
              const long ox = 2 * static_cast<long>(ix) - 1 + kx;
              if (ox < 0 || ox >= ow) continue;
              out.at(co, static_cast<std::size_t>(oy), static_cast<std::size_t>(ox)) += v * w[ky * 4 + kx];
            }
          }
        }
      }
  return out;
}

// Accumulates weight/bias gradients into `grad` and returns dL/d(input).
inline FeatureMap tconv_backward(const TConvLayer& layer, const FeatureMap& in,
                                 const FeatureMap& gout, TConvLayer& grad) {
  FeatureMap gin(in.channels, in.height, in.width);
  for (std::size_t co = 0; co < layer.out_channels; ++co) {
    double s = 0.0;
    for (std::size_t i = co * gout.height * gout.width; i < (co + 1) * gout.height * gout.width; ++i)
      s += gout.data[i];
    grad.bias[co] += s;
  }
  const auto oh = static_cast<long>(gout.height), ow = static_cast<long>(gout.width);
  for (std::size_t ci = 0; ci < layer.in_channels; ++ci)
    for (std::size_t iy = 0; iy < in.height; ++iy)
      for (std::size_t ix = 0; ix < in.width; ++ix) {
        const double v = in.at(ci, iy, ix);
        double acc = 0.0;
        for (std::size_t co = 0; co < layer.out_channels; ++co) {
          const std::size_t base = (ci * layer.out_channels + co) * 16;
          const double* w = &layer.weight[base];
          double* gw = &grad.weight[base];
          for (long ky = 0; ky < 4; ++ky) {
            const long oy = 2 * static_cast<long>(iy) - 1 + ky;
            if (oy < 0 || oy >= oh) continue;
            for (long kx = 0; kx < 4; ++kx) {
              const long ox = 2 * static_cast<long>(ix) - 1 + kx;
              if (ox < 0 || ox >= ow) continue;
              const double g = gout.at(co, static_cast<std::size_t>(oy), static_cast<std::size_t>(ox));
              gw[ky * 4 + kx] += v * g;
              acc += w[ky * 4 + kx] * g;
            }
          }
        }
        gin.at(ci, iy, ix) = acc;
      }
  return gin;
}

// Read-out mapped to a non-negative seed: (1 + <Z>)/2 for Pauli-Z, p * 2^n
// for probabilities (unit mean). Returns d(seed)/d(read-out).
inline double seed_scale(const CircuitParams& c, Readout r) {
  return r == Readout::pauli_z ? 0.5 : static_cast<double>(std::size_t{1} << c.n_qubits);
}

struct QdipTrace {
  std::vector<FeatureMap> inputs;       // input of each block
  std::vector<FeatureMap> pre_activation;  // output of each block before leaky-ReLU
};

inline FeatureMap seed_map(const std::vector<double>& readout, const CircuitParams& c, Readout r) {
  const std::size_t side = seed_side(c.n_qubits, r);
  FeatureMap seed(1, side, side);
  const double scale = seed_scale(c, r);
  for (std::size_t i = 0; i < readout.size(); ++i)
    seed.data[i] = r == Readout::pauli_z ? 0.5 * (1.0 + readout[i]) : scale * readout[i];
  return seed;
}

inline Tensor3 softmax_channels(const FeatureMap& logits) {
  Tensor3 out(logits.height, logits.width, logits.channels);
  const std::size_t px = logits.height * logits.width;
  for (std::size_t i = 0; i < px; ++i) {
    double mx = -INFINITY;
    for (std::size_t k = 0; k < logits.channels; ++k) mx = std::max(mx, logits.data[k * px + i]);
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.channels; ++k) {
      const double e = std::exp(logits.data[k * px + i] - mx);
      out.data()[k * px + i] = e;
      sum += e;
    }
    for (std::size_t k = 0; k < logits.channels; ++k) out.data()[k * px + i] /= sum;
  }
  return out;
}

inline FeatureMap decoder_forward(const QdipParams& p, FeatureMap x, double slope, QdipTrace* trace) {
  for (std::size_t b = 0; b < p.decoder.size(); ++b) {
    if (trace) trace->inputs.push_back(x);
    FeatureMap y = tconv_forward(p.decoder[b], x);
    if (trace) trace->pre_activation.push_back(y);
    if (b + 1 < p.decoder.size())
      for (double& v : y.data) v = v >= 0.0 ? v : slope * v;
    x = std::move(y);
  }
  return x;
}

inline void check_decoder(const QdipParams& p, std::size_t rows, std::size_t cols, std::size_t sources,
                          Readout r) {
  const std::size_t depth = decoder_depth(seed_side(p.circuit.n_qubits, r), rows, cols);
  if (p.decoder.size() != depth || p.decoder.front().in_channels != 1 ||
      p.decoder.back().out_channels != sources)
    throw ConfigError("qdip: decoder does not reach " + std::to_string(rows) + "x" +
                      std::to_string(cols) + "x" + std::to_string(sources));
  for (std::size_t b = 0; b + 1 < p.decoder.size(); ++b)
    if (p.decoder[b].out_channels != p.decoder[b + 1].in_channels)
      throw ConfigError("qdip: decoder channel widths do not chain");
}

inline Tensor3 qdip_forward(const QdipParams& p, std::size_t rows, std::size_t cols, std::size_t sources,
                            Readout r = Readout::pauli_z, double slope = 0.1) {
  check_decoder(p, rows, cols, sources, r);
  const auto readout = circuit_forward(p.circuit, r);
  return softmax_channels(decoder_forward(p, seed_map(readout, p.circuit, r), slope, nullptr));
}

inline double qdip_loss(const Tensor3& zh, const Tensor3& s, const Mat& a0) {
  const Tensor3 fit = mode3_mul(s, a0);
  double loss = 0.0;
  for (std::size_t i = 0; i < fit.size(); ++i) {
    const double d = zh.data()[i] - fit.data()[i];
    loss += d * d;
  }
  return loss;
}

namespace detail {

struct Adam {
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::size_t t = 0;
  std::vector<std::vector<double>> m, v;

  // Visits parameter/gradient vector pairs in a fixed order.
  template <typename Fn>
  static void for_each(QdipParams& p, QdipParams& g, Fn&& fn) {
    auto pf = p.circuit.families();
    auto gf = g.circuit.families();
    for (std::size_t i = 0; i < pf.size(); ++i) fn(*pf[i], *gf[i]);
    for (std::size_t b = 0; b < p.decoder.size(); ++b) {
      fn(p.decoder[b].weight, g.decoder[b].weight);
      fn(p.decoder[b].bias, g.decoder[b].bias);
    }
  }

  void step(QdipParams& p, QdipParams& g) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    std::size_t slot = 0;
    for_each(p, g, [&](std::vector<double>& x, std::vector<double>& dx) {
      if (m.size() <= slot) {
        m.emplace_back(x.size(), 0.0);
        v.emplace_back(x.size(), 0.0);
      }
      auto& ms = m[slot];
      auto& vs = v[slot];
      for (std::size_t i = 0; i < x.size(); ++i) {
        ms[i] = beta1 * ms[i] + (1.0 - beta1) * dx[i];
        vs[i] = beta2 * vs[i] + (1.0 - beta2) * dx[i] * dx[i];
        x[i] -= lr * (ms[i] / c1) / (std::sqrt(vs[i] / c2) + eps);
      }
      ++slot;
    });
  }
};

inline QdipParams zero_like(const QdipParams& p) {
  QdipParams g;
  g.circuit = CircuitParams::zeros(p.circuit.n_qubits);
  g.circuit.toffoli = p.circuit.toffoli;
  for (const auto& layer : p.decoder) {
    TConvLayer z = layer;
    std::fill(z.weight.begin(), z.weight.end(), 0.0);
    std::fill(z.bias.begin(), z.bias.end(), 0.0);
    g.decoder.push_back(std::move(z));
  }
  return g;
}

}  // namespace detail

// Loss and full gradient at p.
inline double qdip_loss_and_grad(const QdipParams& p, const Tensor3& zh, const Mat& a0, Readout r,
                                 double slope, QdipParams& grad) {
  const std::size_t sources = static_cast<std::size_t>(a0.cols());
  check_decoder(p, zh.rows(), zh.cols(), sources, r);
  const auto readout = circuit_forward(p.circuit, r);
  QdipTrace trace;
  const FeatureMap logits = decoder_forward(p, seed_map(readout, p.circuit, r), slope, &trace);
  const Tensor3 s = softmax_channels(logits);

  Tensor3 residual = mode3_mul(s, a0);
  double loss = 0.0;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    const double d = residual.data()[i] - zh.data()[i];
    loss += d * d;
    residual.data()[i] = 2.0 * d;
  }
  const Tensor3 gs = mode3_mul(residual, a0.transpose());

  // softmax backward, per pixel
  FeatureMap g(logits.channels, logits.height, logits.width);
  const std::size_t px = logits.height * logits.width;
  for (std::size_t i = 0; i < px; ++i) {
    double dot = 0.0;
    for (std::size_t k = 0; k < sources; ++k) dot += s.data()[k * px + i] * gs.data()[k * px + i];
    for (std::size_t k = 0; k < sources; ++k)
      g.data[k * px + i] = s.data()[k * px + i] * (gs.data()[k * px + i] - dot);
  }
  for (std::size_t b = p.decoder.size(); b-- > 0;) {
    if (b + 1 < p.decoder.size()) {
      const auto& pre = trace.pre_activation[b].data;
      for (std::size_t i = 0; i < g.data.size(); ++i)
        if (pre[i] < 0.0) g.data[i] *= slope;
    }
    g = tconv_backward(p.decoder[b], trace.inputs[b], g, grad.decoder[b]);
  }
  std::vector<double> upstream(g.data.size());
  const double scale = seed_scale(p.circuit, r);
  for (std::size_t i = 0; i < upstream.size(); ++i) upstream[i] = scale * g.data[i];
  const CircuitGradient cg = circuit_grad(p.circuit, upstream, r);
  auto dst = grad.circuit.families();
  auto src = cg.families();
  for (std::size_t f = 0; f < dst.size(); ++f)
    for (std::size_t i = 0; i < dst[f]->size(); ++i) (*dst[f])[i] += (*src[f])[i];
  return loss;
}

struct QdipResult {
  Tensor3 s_qu;
  std::vector<double> loss_trace;  // loss before each Adam step, then the final loss
  QdipParams params;
  std::uint64_t circuit_simulations = 0;
};

inline QdipResult qdip_train(const Tensor3& zh, const Mat& a0, const QdipConfig& cfg,
                             const QdipParams* start = nullptr) {
  if (static_cast<std::size_t>(a0.rows()) != zh.channels())
    throw InvalidInput("qdip_train: A0 has " + std::to_string(a0.rows()) + " rows but Z_h has " +
                       std::to_string(zh.channels()) + " bands");
  if ((a0.array() < 0.0).any()) throw InvalidInput("qdip_train: A0 must be non-negative");
  const std::size_t sources = static_cast<std::size_t>(a0.cols());
  const std::uint64_t sims_before = circuit_simulation_counter().load();

  QdipResult res;
  res.params = start ? *start : qdip_init(cfg, zh.rows(), zh.cols(), sources);
  detail::Adam adam;
  adam.lr = cfg.learning_rate;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    QdipParams grad = detail::zero_like(res.params);
    const double loss = qdip_loss_and_grad(res.params, zh, a0, cfg.readout, cfg.leaky_slope, grad);
    if (!std::isfinite(loss))
      throw TrainingDiverged("qdip_train: loss became non-finite at iteration " + std::to_string(it), it);
    res.loss_trace.push_back(loss);
    adam.step(res.params, grad);
  }
  res.s_qu = qdip_forward(res.params, zh.rows(), zh.cols(), sources, cfg.readout, cfg.leaky_slope);
  const double final_loss = qdip_loss(zh, res.s_qu, a0);
  if (!std::isfinite(final_loss))
    throw TrainingDiverged("qdip_train: final loss is non-finite", cfg.iterations);
  res.loss_trace.push_back(final_loss);
  res.circuit_simulations = circuit_simulation_counter().load() - sims_before;
  return res;
}

}  // namespace gqmu
