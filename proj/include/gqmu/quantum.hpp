#pragma once

// Statevector simulator for the rotation-Ising circuit
//   R_X(alpha) - XX(beta) - R_Z(delta) - XX(rho) - R_X(epsilon) - Toffoli layer
// with Pauli-Z (or full probability) read-out and parameter-shift gradients.
//
// Conventions: qubit i is bit i of the basis-state index. R_X(t) = exp(-i t X/2),
// R_Z(t) = exp(-i t Z/2), XX(t) = exp(-i t (X (x) X)/2). XX gates act on ring
// pairs (i, i+1 mod n). Toffoli gates use controls (i, i+1) and target i+2
// (mod n) for i = 0, 3, 6, ...

#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gqmu/error.hpp"
#include "gqmu/parallel.hpp"

namespace gqmu {

inline constexpr std::size_t kMaxQubits = 20;

struct CircuitParams {
  std::size_t n_qubits = 0;
  std::vector<double> alpha;    // first R_X layer
  std::vector<double> beta;     // first XX layer
  std::vector<double> delta;    // R_Z layer
  std::vector<double> rho;      // second XX layer
  std::vector<double> epsilon;  // closing R_X layer
  bool toffoli = true;

  static CircuitParams zeros(std::size_t n) {
    CircuitParams p;
    p.n_qubits = n;
    for (auto* v : {&p.alpha, &p.beta, &p.delta, &p.rho, &p.epsilon}) v->assign(n, 0.0);
    return p;
  }

  // Angles uniform in [0, 2 pi).
  template <typename Rng>
  static CircuitParams random(std::size_t n, Rng& rng) {
    CircuitParams p = zeros(n);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    for (auto* v : p.families())
      for (double& x : *v) x = u(rng);
    return p;
  }

  std::array<std::vector<double>*, 5> families() { return {&alpha, &beta, &delta, &rho, &epsilon}; }
  std::array<const std::vector<double>*, 5> families() const {
    return {&alpha, &beta, &delta, &rho, &epsilon};
  }
};

// Gradients share the parameter layout.
using CircuitGradient = CircuitParams;

enum class Readout { pauli_z, probabilities };

inline std::string to_string(Readout r) { return r == Readout::pauli_z ? "pauli_z" : "probabilities"; }

inline Readout parse_readout(const std::string& s) {
  if (s == "pauli_z") return Readout::pauli_z;
  if (s == "probabilities") return Readout::probabilities;
  throw ConfigError("unknown read-out '" + s + "' (expected pauli_z|probabilities)");
}

inline std::size_t readout_length(std::size_t n_qubits, Readout r) {
  return r == Readout::pauli_z ? n_qubits : (std::size_t{1} << n_qubits);
}

// Number of statevector simulations run in this process. Lets callers prove
// that a code path never touched the quantum stack.
inline std::atomic<std::uint64_t>& circuit_simulation_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

class StateVector {
 public:
  using Amp = std::complex<double>;

  explicit StateVector(std::size_t n_qubits) : n_(n_qubits), amp_(std::size_t{1} << n_qubits) {
    amp_[0] = 1.0;
  }

  std::size_t qubits() const noexcept { return n_; }
  std::size_t dim() const noexcept { return amp_.size(); }
  std::span<const Amp> amplitudes() const noexcept { return amp_; }

  double norm() const {
    double s = 0.0;
    for (const auto& a : amp_) s += std::norm(a);
    return std::sqrt(s);
  }

  // Shared kernel for R_X and XX: (a, b) -> (c a - i s b, c b - i s a) over
  // index pairs that differ by `mask`, visiting each pair once via `pivot`.
  void apply_x_rotation(std::size_t mask, std::size_t pivot, double theta) {
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    const std::size_t d = dim();
    for (std::size_t x = 0; x < d; ++x) {
      if (x & pivot) continue;
      const std::size_t y = x ^ mask;
      const double ar = amp_[x].real(), ai = amp_[x].imag();
      const double br = amp_[y].real(), bi = amp_[y].imag();
      amp_[x] = {c * ar + s * bi, c * ai - s * br};
      amp_[y] = {c * br + s * ai, c * bi - s * ar};
    }
  }

  void apply_rx(std::size_t q, double theta) {
    const std::size_t bit = std::size_t{1} << q;
    apply_x_rotation(bit, bit, theta);
  }

  void apply_xx(std::size_t q0, std::size_t q1, double theta) {
    const std::size_t b0 = std::size_t{1} << q0;
    const std::size_t b1 = std::size_t{1} << q1;
    apply_x_rotation(b0 | b1, b0, theta);
  }

  void apply_rz(std::size_t q, double theta) {
    const std::size_t bit = std::size_t{1} << q;
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    for (std::size_t x = 0; x < dim(); ++x) {
      const double ar = amp_[x].real(), ai = amp_[x].imag();
      // exp(-i t/2) on |0>, exp(+i t/2) on |1>
      const double sg = (x & bit) ? s : -s;
      amp_[x] = {c * ar - sg * ai, c * ai + sg * ar};
    }
  }

  void apply_toffoli(std::size_t c0, std::size_t c1, std::size_t target) {
    const std::size_t m0 = std::size_t{1} << c0;
    const std::size_t m1 = std::size_t{1} << c1;
    const std::size_t mt = std::size_t{1} << target;
    for (std::size_t x = 0; x < dim(); ++x)
      if ((x & m0) && (x & m1) && !(x & mt)) std::swap(amp_[x], amp_[x | mt]);
  }

  double expectation_z(std::size_t q) const {
    const std::size_t bit = std::size_t{1} << q;
    double e = 0.0;
    for (std::size_t x = 0; x < dim(); ++x) e += (x & bit) ? -std::norm(amp_[x]) : std::norm(amp_[x]);
    return e;
  }

  // sum_x o(x) |psi_x|^2 for a diagonal observable.
  double expectation_diagonal(std::span<const double> o) const {
    double e = 0.0;
    for (std::size_t x = 0; x < dim(); ++x) e += o[x] * std::norm(amp_[x]);
    return e;
  }

 private:
  std::size_t n_;
  std::vector<Amp> amp_;
};

struct Gate {
  enum class Kind { rx, xx, rz, toffoli };
  Kind kind;
  int family;  // index into CircuitParams::families(), -1 for Toffoli
  std::size_t index;
  std::size_t q0, q1, q2;
};

inline void check_qubits(std::size_t n) {
  if (n == 0 || n > kMaxQubits)
    throw ConfigError("circuit: qubit count " + std::to_string(n) + " outside [1, " +
                      std::to_string(kMaxQubits) + "]");
}

inline void check_params(const CircuitParams& p) {
  check_qubits(p.n_qubits);
  for (const auto* v : p.families()) {
    if (v->size() != p.n_qubits)
      throw ConfigError("circuit: every angle family needs n_qubits entries");
    for (double x : *v)
      if (!std::isfinite(x)) throw ConfigError("circuit: non-finite rotation angle");
  }
}

// Gate sequence in application order. A single qubit has no pairs, so the XX
// and Toffoli layers are empty.
inline std::vector<Gate> circuit_gates(std::size_t n, bool toffoli) {
  std::vector<Gate> g;
  auto rotations = [&](Gate::Kind k, int fam) {
    for (std::size_t i = 0; i < n; ++i) g.push_back({k, fam, i, i, 0, 0});
  };
  auto ising = [&](int fam) {
    if (n < 2) return;
    for (std::size_t i = 0; i < n; ++i) g.push_back({Gate::Kind::xx, fam, i, i, (i + 1) % n, 0});
  };
  rotations(Gate::Kind::rx, 0);
  ising(1);
  rotations(Gate::Kind::rz, 2);
  ising(3);
  rotations(Gate::Kind::rx, 4);
  if (toffoli && n >= 3)
    for (std::size_t i = 0; i < n; i += 3)
      g.push_back({Gate::Kind::toffoli, -1, 0, i, (i + 1) % n, (i + 2) % n});
  return g;
}

inline double gate_angle(const CircuitParams& p, const Gate& g) {
  return g.family < 0 ? 0.0 : (*p.families()[static_cast<std::size_t>(g.family)])[g.index];
}

inline void apply_gate(StateVector& psi, const Gate& g, double theta) {
  switch (g.kind) {
    case Gate::Kind::rx: psi.apply_rx(g.q0, theta); break;
    case Gate::Kind::xx: psi.apply_xx(g.q0, g.q1, theta); break;
    case Gate::Kind::rz: psi.apply_rz(g.q0, theta); break;
    case Gate::Kind::toffoli: psi.apply_toffoli(g.q0, g.q1, g.q2); break;
  }
}

inline StateVector run_circuit(const CircuitParams& p) {
  check_params(p);
  ++circuit_simulation_counter();
  StateVector psi(p.n_qubits);
  for (const auto& g : circuit_gates(p.n_qubits, p.toffoli)) apply_gate(psi, g, gate_angle(p, g));
  return psi;
}

inline std::vector<double> measure(const StateVector& psi, Readout r) {
  std::vector<double> out;
  if (r == Readout::pauli_z) {
    out.resize(psi.qubits());
    for (std::size_t q = 0; q < psi.qubits(); ++q) out[q] = psi.expectation_z(q);
  } else {
    out.resize(psi.dim());
    for (std::size_t x = 0; x < psi.dim(); ++x) out[x] = std::norm(psi.amplitudes()[x]);
  }
  return out;
}

inline std::vector<double> circuit_forward(const CircuitParams& p, Readout r = Readout::pauli_z) {
  return measure(run_circuit(p), r);
}

// Diagonal observable whose expectation is upstream . readout.
inline std::vector<double> readout_observable(std::size_t n, std::span<const double> upstream,
                                              Readout r) {
  const std::size_t dim = std::size_t{1} << n;
  if (upstream.size() != readout_length(n, r))
    throw InvalidInput("circuit_grad: upstream length does not match the read-out");
  if (r == Readout::probabilities) return {upstream.begin(), upstream.end()};
  std::vector<double> o(dim, 0.0);
  for (std::size_t x = 0; x < dim; ++x)
    for (std::size_t q = 0; q < n; ++q) o[x] += (x >> q & 1) ? -upstream[q] : upstream[q];
  return o;
}

// Gradient of upstream . readout(p) by the parameter-shift rule. Every
// generator has eigenvalues +-1/2, so d<O>/dt = (<O>(t + pi/2) - <O>(t - pi/2)) / 2
// exactly. The state in front of each parameterized gate is cached so each
// shifted evaluation only replays the circuit suffix.
inline CircuitGradient circuit_grad(const CircuitParams& p, std::span<const double> upstream,
                                    Readout r = Readout::pauli_z) {
  check_params(p);
  const auto gates = circuit_gates(p.n_qubits, p.toffoli);
  const auto obs = readout_observable(p.n_qubits, upstream, r);

  std::vector<std::size_t> param_gates;
  std::vector<StateVector> prefix;
  {
    StateVector psi(p.n_qubits);
    for (std::size_t i = 0; i < gates.size(); ++i) {
      if (gates[i].family >= 0) {
        param_gates.push_back(i);
        prefix.push_back(psi);
      }
      apply_gate(psi, gates[i], gate_angle(p, gates[i]));
    }
  }
  circuit_simulation_counter() += 1 + 2 * param_gates.size();

  std::vector<double> shift_grad(param_gates.size());
  parallel_for(param_gates.size(), [&](std::size_t j) {
    const std::size_t start = param_gates[j];
    double e[2];
    for (int side = 0; side < 2; ++side) {
      StateVector psi = prefix[j];
      const double shift = side == 0 ? 0.5 * std::numbers::pi : -0.5 * std::numbers::pi;
      apply_gate(psi, gates[start], gate_angle(p, gates[start]) + shift);
      for (std::size_t i = start + 1; i < gates.size(); ++i)
        apply_gate(psi, gates[i], gate_angle(p, gates[i]));
      e[side] = psi.expectation_diagonal(obs);
    }
    shift_grad[j] = 0.5 * (e[0] - e[1]);
  });

  CircuitGradient grad = CircuitParams::zeros(p.n_qubits);
  grad.toffoli = p.toffoli;
  auto fams = grad.families();
  for (std::size_t j = 0; j < param_gates.size(); ++j) {
    const Gate& g = gates[param_gates[j]];
    (*fams[static_cast<std::size_t>(g.family)])[g.index] = shift_grad[j];
  }
  return grad;
}

}  // namespace gqmu
