#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <random>

#include "gqmu/quantum.hpp"

using namespace gqmu;
using Cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;

namespace {

// Dense reference: qubit q is bit q, so the operator on qubit q is
// I_{2^{n-q-1}} (x) U (x) I_{2^q}.
CMat kron_c(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMat on_qubit(const CMat& u, std::size_t q, std::size_t n) {
  return kron_c(kron_c(CMat::Identity(1 << (n - q - 1), 1 << (n - q - 1)), u), CMat::Identity(1 << q, 1 << q));
}

CMat pauli_x() {
  CMat x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

CMat rx(double t) {
  CMat u(2, 2);
  u << std::cos(t / 2), Cd(0, -std::sin(t / 2)), Cd(0, -std::sin(t / 2)), std::cos(t / 2);
  return u;
}

CMat rz(double t) {
  CMat u = CMat::Zero(2, 2);
  u(0, 0) = std::exp(Cd(0, -t / 2));
  u(1, 1) = std::exp(Cd(0, t / 2));
  return u;
}

CMat xx(std::size_t a, std::size_t b, std::size_t n, double t) {
  const CMat xaxb = on_qubit(pauli_x(), a, n) * on_qubit(pauli_x(), b, n);
  return std::cos(t / 2) * CMat::Identity(1 << n, 1 << n) + Cd(0, -std::sin(t / 2)) * xaxb;
}

CMat toffoli(std::size_t c0, std::size_t c1, std::size_t t, std::size_t n) {
  const std::size_t dim = std::size_t{1} << n;
  CMat u = CMat::Zero(dim, dim);
  for (std::size_t x = 0; x < dim; ++x) {
    const std::size_t y = ((x >> c0 & 1) && (x >> c1 & 1)) ? x ^ (std::size_t{1} << t) : x;
    u(y, x) = 1.0;
  }
  return u;
}

std::vector<double> dense_expectations(const CircuitParams& p) {
  const std::size_t n = p.n_qubits;
  const std::size_t dim = std::size_t{1} << n;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  psi(0) = 1.0;
  for (std::size_t i = 0; i < n; ++i) psi = on_qubit(rx(p.alpha[i]), i, n) * psi;
  if (n >= 2)
    for (std::size_t i = 0; i < n; ++i) psi = xx(i, (i + 1) % n, n, p.beta[i]) * psi;
  for (std::size_t i = 0; i < n; ++i) psi = on_qubit(rz(p.delta[i]), i, n) * psi;
  if (n >= 2)
    for (std::size_t i = 0; i < n; ++i) psi = xx(i, (i + 1) % n, n, p.rho[i]) * psi;
  for (std::size_t i = 0; i < n; ++i) psi = on_qubit(rx(p.epsilon[i]), i, n) * psi;
  if (p.toffoli && n >= 3)
    for (std::size_t i = 0; i < n; i += 3) psi = toffoli(i, (i + 1) % n, (i + 2) % n, n) * psi;
  std::vector<double> z(n, 0.0);
  for (std::size_t x = 0; x < dim; ++x)
    for (std::size_t q = 0; q < n; ++q) z[q] += ((x >> q & 1) ? -1.0 : 1.0) * std::norm(psi(x));
  return z;
}

double weighted(const CircuitParams& p, const std::vector<double>& u, Readout r = Readout::pauli_z) {
  const auto e = circuit_forward(p, r);
  double s = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) s += u[i] * e[i];
  return s;
}

}  // namespace

TEST(Circuit, ZeroAnglesLeaveGroundState) {
  for (std::size_t n : {1u, 2u, 5u, 16u}) {
    const auto z = circuit_forward(CircuitParams::zeros(n));
    for (double v : z) EXPECT_NEAR(v, 1.0, 1e-15);
  }
}

TEST(Circuit, SingleQubitBitFlip) {
  CircuitParams p = CircuitParams::zeros(1);
  p.alpha[0] = std::numbers::pi;
  EXPECT_NEAR(circuit_forward(p)[0], -1.0, 1e-15);
}

TEST(Circuit, MatchesDenseMatrixOracle) {
  std::mt19937_64 rng(30);
  for (std::size_t n : {1u, 2u, 3u, 4u, 6u}) {
    for (bool tof : {true, false}) {
      CircuitParams p = CircuitParams::random(n, rng);
      p.toffoli = tof;
      const auto got = circuit_forward(p);
      const auto want = dense_expectations(p);
      for (std::size_t q = 0; q < n; ++q) EXPECT_NEAR(got[q], want[q], 1e-12) << "n=" << n << " q=" << q;
    }
  }
}

TEST(Circuit, NormPreservedAtSixteenQubits) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    const StateVector psi = run_circuit(CircuitParams::random(16, rng));
    EXPECT_LE(std::abs(psi.norm() - 1.0), 1e-10);
    for (std::size_t q = 0; q < 16; ++q) {
      const double z = psi.expectation_z(q);
      EXPECT_LE(std::abs(z), 1.0 + 1e-12);
    }
  }
}

TEST(Circuit, ProbabilityReadoutSumsToOne) {
  std::mt19937_64 rng(32);
  const auto pr = circuit_forward(CircuitParams::random(5, rng), Readout::probabilities);
  ASSERT_EQ(pr.size(), 32u);
  double s = 0.0;
  for (double v : pr) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Circuit, RejectsBadConfigurations) {
  EXPECT_THROW(circuit_forward(CircuitParams::zeros(0)), ConfigError);
  EXPECT_THROW(circuit_forward(CircuitParams::zeros(kMaxQubits + 1)), ConfigError);
  CircuitParams p = CircuitParams::zeros(3);
  p.beta.pop_back();
  EXPECT_THROW(circuit_forward(p), ConfigError);
  p = CircuitParams::zeros(3);
  p.rho[1] = std::nan("");
  EXPECT_THROW(circuit_forward(p), ConfigError);
}

TEST(ParameterShift, ZeroAtStationaryPoint) {
  const CircuitParams p = CircuitParams::zeros(3);
  std::vector<double> u{1.0, 0.0, 0.0};
  const auto g = circuit_grad(p, u);
  EXPECT_NEAR(g.alpha[0], 0.0, 1e-15);
}

TEST(ParameterShift, MatchesFiniteDifferencesForEveryFamily) {
  std::mt19937_64 rng(33);
  for (std::size_t n : {3u, 6u}) {
    const CircuitParams p = CircuitParams::random(n, rng);
    std::vector<double> u(n);
    std::uniform_real_distribution<double> ud(-1, 1);
    for (double& v : u) v = ud(rng);
    const CircuitGradient g = circuit_grad(p, u);
    const double h = 1e-4;
    for (std::size_t f = 0; f < 5; ++f) {
      for (std::size_t i = 0; i < n; ++i) {
        CircuitParams pp = p, pm = p;
        (*pp.families()[f])[i] += h;
        (*pm.families()[f])[i] -= h;
        const double fd = (weighted(pp, u) - weighted(pm, u)) / (2 * h);
        const double an = (*g.families()[f])[i];
        EXPECT_LE(std::abs(an - fd), 1e-4 * std::max(1.0, std::abs(fd))) << "family " << f << " index " << i;
      }
    }
  }
}

TEST(ParameterShift, ProbabilityReadout) {
  std::mt19937_64 rng(34);
  const CircuitParams p = CircuitParams::random(3, rng);
  std::vector<double> u(8);
  std::uniform_real_distribution<double> ud(-1, 1);
  for (double& v : u) v = ud(rng);
  const auto g = circuit_grad(p, u, Readout::probabilities);
  CircuitParams pp = p, pm = p;
  pp.delta[1] += 1e-5;
  pm.delta[1] -= 1e-5;
  const double fd = (weighted(pp, u, Readout::probabilities) - weighted(pm, u, Readout::probabilities)) / 2e-5;
  EXPECT_NEAR(g.delta[1], fd, 1e-7);
}

TEST(ParameterShift, LocalityWithoutEntanglement) {
  // beta = rho = 0 and no Toffoli: qubit 2's parameters cannot move <Z_0>.
  std::mt19937_64 rng(35);
  CircuitParams p = CircuitParams::random(4, rng);
  std::fill(p.beta.begin(), p.beta.end(), 0.0);
  std::fill(p.rho.begin(), p.rho.end(), 0.0);
  p.toffoli = false;
  const auto g = circuit_grad(p, std::vector<double>{1.0, 0.0, 0.0, 0.0});
  EXPECT_NEAR(g.alpha[2], 0.0, 1e-14);
  EXPECT_NEAR(g.delta[2], 0.0, 1e-14);
  EXPECT_NEAR(g.epsilon[2], 0.0, 1e-14);
  EXPECT_GT(std::abs(g.alpha[0]) + std::abs(g.epsilon[0]), 1e-6);
}

TEST(ParameterShift, CountsSimulations) {
  const auto before = circuit_simulation_counter().load();
  circuit_grad(CircuitParams::zeros(3), std::vector<double>(3, 1.0));
  EXPECT_GT(circuit_simulation_counter().load(), before);
}

TEST(Readout, Parse) {
  EXPECT_EQ(parse_readout("pauli_z"), Readout::pauli_z);
  EXPECT_EQ(parse_readout(to_string(Readout::probabilities)), Readout::probabilities);
  EXPECT_THROW(parse_readout("x"), ConfigError);
}
