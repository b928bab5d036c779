#pragma once

// Abundance prior providers for the lambda2 term of the solver.

#include <string>
#include <vector>

#include "gqmu/error.hpp"
#include "gqmu/qdip.hpp"
#include "gqmu/tensor.hpp"

namespace gqmu {

enum class PriorKind { qdip, ls };

inline std::string to_string(PriorKind k) { return k == PriorKind::qdip ? "qdip" : "ls"; }

inline PriorKind parse_prior(const std::string& s) {
  if (s == "qdip") return PriorKind::qdip;
  if (s == "ls") return PriorKind::ls;
  throw InvalidInput("unknown prior provider '" + s + "' (expected qdip|ls)");
}

// The initializer's abundances, passed through unchanged.
inline Tensor3 ls_prior(const Tensor3& s0) { return s0; }

struct PriorResult {
  Tensor3 s_qu;
  std::string provider;
  std::vector<double> loss_trace;  // empty for ls
  std::uint64_t circuit_simulations = 0;
};

inline PriorResult provide_prior(PriorKind kind, const Tensor3& zh, const Mat& a0, const Tensor3& s0,
                                 const QdipConfig& qcfg) {
  PriorResult r;
  r.provider = to_string(kind);
  if (kind == PriorKind::ls) {
    r.s_qu = ls_prior(s0);
    return r;
  }
  QdipResult q = qdip_train(zh, a0, qcfg);
  r.s_qu = std::move(q.s_qu);
  r.loss_trace = std::move(q.loss_trace);
  r.circuit_simulations = q.circuit_simulations;
  return r;
}

}  // namespace gqmu
