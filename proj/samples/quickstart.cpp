// Synthesize a 4-band image with six sources, unmix it, and compare with the
// naive pseudo-inverse baseline.

#include <cstdio>

#include "gqmu/gqmu.hpp"

int main() {
  gqmu::SynthConfig synth;
  synth.rows = synth.cols = 32;
  synth.purity = 0.9;
  synth.pure_pixels = false;
  synth.seed = 7;

  gqmu::SolverConfig solver;
  solver.prior = gqmu::PriorKind::ls;  // qdip is slower; swap it in to try the quantum prior

  const auto rep = gqmu::run_protocol(synth, solver);
  std::printf("%-9s %10s %10s %10s\n", "", "phi_en", "phi_ab", "rmse_x100");
  std::printf("%-9s %10.3f %10.3f %10.3f\n", "gq-mu", rep.method.phi_en_deg, rep.method.phi_ab_deg,
              rep.method.rmse_x100);
  std::printf("%-9s %10.3f %10.3f %10.3f\n", "baseline", rep.baseline.phi_en_deg, rep.baseline.phi_ab_deg,
              rep.baseline.rmse_x100);
  return 0;
}
