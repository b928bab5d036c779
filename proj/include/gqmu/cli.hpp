#pragma once

// Command-line front end: augment, unmix, protocol synth|wald, metrics.
// Exit codes: 0 success, 2 usage error, 1 runtime error.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "gqmu/augment.hpp"
#include "gqmu/error.hpp"
#include "gqmu/io.hpp"
#include "gqmu/protocol.hpp"
#include "gqmu/solver.hpp"

namespace gqmu {

namespace cli_detail {

// Raised for bad flag values so they map to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Solver flags are kept as strings and routed through the config-key parser,
// so a flag and the equivalent config line behave identically.
struct SolverFlags {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> values;  // (config key, flag value)
  std::vector<std::pair<std::string, CLI::Option*>> options;
  bool prior_required = false;  // by flag or by the config file

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    values.emplace_back(key, "");
    options.emplace_back(key, nullptr);
    options.back().second = app->add_option(flag, values.back().second, help);
  }
};

inline void add_solver_flags(CLI::App* app, SolverFlags& f, bool with_prior_required) {
  f.values.reserve(32);
  f.options.reserve(32);
  app->add_option("--config", f.config_path, "flat key = value file overriding defaults")
      ->check(CLI::ExistingFile);
  f.add(app, "--prior", "prior", "abundance prior provider: qdip|ls (required unless set in --config)");
  f.prior_required = with_prior_required;
  f.add(app, "--mv-variant", "mv_variant", "shrinkage regularizer: wss|nwss|center|tv|ssd");
  f.add(app, "--denoiser", "denoiser", "identity|gaussian|gaussian:SIGMA");
  f.add(app, "--tau", "tau", "band split factor: auto|1|2|4");
  f.add(app, "--seed", "seed", "random seed");
  f.add(app, "--lambda1", "lambda1", "l1 weight");
  f.add(app, "--lambda2", "lambda2", "prior weight");
  f.add(app, "--lambda3", "lambda3_dag", "shrinkage weight before scaling");
  f.add(app, "--lambda4", "lambda4_dag_init", "initial anchor weight before scaling");
  f.add(app, "--scale", "scale", "multiplier applied to lambda3 and lambda4");
  f.add(app, "--scale-by-pixels", "scale_by_pixels", "true|false: multiply the scale by L / 256^2");
  f.add(app, "--mu", "mu", "ADMM penalty");
  f.add(app, "--outer-iters", "outer_iters", "outer iterations");
  f.add(app, "--admm-iters", "admm_iters", "ADMM iterations per outer iteration");
  f.add(app, "--tol", "tol", "relative change of S for early stop (0 disables)");
  f.add(app, "--qdip-iters", "qdip_iterations", "QDIP Adam steps");
  f.add(app, "--qdip-seed", "qdip_seed", "QDIP initialization seed (defaults to --seed)");
  f.add(app, "--qdip-lr", "qdip_lr", "QDIP learning rate");
  f.add(app, "--qubits", "qdip_qubits", "QDIP circuit width");
  f.add(app, "--readout", "qdip_readout", "QDIP read-out: pauli_z|probabilities");
}

inline SolverConfig resolve_solver(const SolverFlags& f) {
  SolverConfig cfg;
  bool prior_set = false;
  if (!f.config_path.empty()) {
    try {
      const ConfigMap map = read_config(f.config_path);
      prior_set = map.contains("prior");
      apply_config(cfg, map);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
  for (std::size_t i = 0; i < f.options.size(); ++i) {
    if (f.options[i].second->count() == 0) continue;
    try {
      apply_solver_key(cfg, f.values[i].first, f.values[i].second);
    } catch (const Error& e) {
      throw UsageError(std::string(f.options[i].second->get_name()) + ": " + e.what());
    }
  }
  for (const auto& [key, opt] : f.options)
    if (key == "prior" && opt->count() > 0) prior_set = true;
  if (f.prior_required && !prior_set) throw UsageError("--prior is required (qdip|ls)");
  return cfg;
}

inline std::string two_digit(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu", k);
  return buf;
}

inline void write_unmix_outputs(const fs::path& dir, const UnmixResult& r, const SolverConfig& cfg) {
  fs::create_directories(dir);
  write_csv(dir / "B.csv", r.b_star);
  write_csv(dir / "A.csv", r.a_star);
  write_btf(dir / "S.btf", r.s_star);
  for (std::size_t k = 0; k < r.s_star.channels(); ++k)
    write_heatmap(dir / ("abundance_" + two_digit(k) + ".pgm"), r.s_star, k, 1.0);
  write_file_atomic(dir / "diagnostics.csv", encode_diagnostics(r));
  if (!r.prior_loss.empty()) {
    std::string loss = "step,loss\n";
    for (std::size_t i = 0; i < r.prior_loss.size(); ++i)
      loss += std::to_string(i) + "," + format_double(r.prior_loss[i]) + "\n";
    write_file_atomic(dir / "qdip_loss.csv", loss);
  }
  nlohmann::ordered_json run;
  run["prior"] = r.prior_provider;
  run["circuit_simulations"] = r.circuit_simulations;
  run["mv_variant"] = to_string(cfg.mv_variant);
  run["denoiser"] = cfg.denoiser;
  run["tau"] = r.tau;
  run["n_sources"] = cfg.n_sources;
  run["seed"] = cfg.seed;
  run["outer_iterations"] = r.iterations.empty() ? 0 : r.iterations.back().iteration;
  run["bsp_clipped"] = r.bsp_clipped;
  run["final_objective"] = r.iterations.empty() ? 0.0 : r.iterations.back().objective;
  write_json(dir / "run.json", run);
}

inline void zero_runtime(MetricsReport& m) { m.runtime_sec = 0.0; }

}  // namespace cli_detail

inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"gqmu: underdetermined multispectral unmixing"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  // augment
  auto* augment = app.add_subcommand("augment", "lift an MSI into the virtual hyperspectral domain");
  std::string aug_in, aug_out, aug_srf, aug_tau = "auto", aug_denoiser = "gaussian:0.5";
  std::size_t aug_sources = 0;
  augment->add_option("--input", aug_in, "multispectral image (.btf)")->required()->check(CLI::ExistingFile);
  augment->add_option("--out", aug_out, "virtual hyperspectral image (.btf)")->required();
  augment->add_option("--srf", aug_srf, "spectral response matrix D (.csv)")->required();
  augment->add_option("--tau", aug_tau, "auto|1|2|4")->check(CLI::IsMember({"auto", "1", "2", "4"}));
  augment->add_option("--denoiser", aug_denoiser, "identity|gaussian|gaussian:SIGMA");
  augment->add_option("--n-sources", aug_sources, "source count used by --tau auto (default: tau 2)");

  // unmix
  auto* unmix = app.add_subcommand("unmix", "estimate endmembers and abundances");
  std::string un_msi, un_out, un_ref_b, un_ref_s;
  std::size_t un_sources = 0;
  bool no_timing = false;
  SolverFlags un_flags;
  unmix->add_option("--msi", un_msi, "multispectral image (.btf)")->required()->check(CLI::ExistingFile);
  unmix->add_option("--n-sources", un_sources, "number of sources N")->required()->check(CLI::PositiveNumber);
  unmix->add_option("--out-dir", un_out, "output directory")->required();
  add_solver_flags(unmix, un_flags, true);
  auto* un_rb = unmix->add_option("--ref-b", un_ref_b, "reference B (.csv) for a metrics report")
                    ->check(CLI::ExistingFile);
  auto* un_rs = unmix->add_option("--ref-s", un_ref_s, "reference S (.btf) for a metrics report")
                    ->check(CLI::ExistingFile);
  un_rb->needs(un_rs);
  un_rs->needs(un_rb);
  unmix->add_flag("--no-timing", no_timing, "write runtime_sec = 0 so reports are byte-reproducible");

  // protocol synth|wald
  auto* protocol = app.add_subcommand("protocol", "Wald-style evaluation against known ground truth");
  protocol->require_subcommand(1);
  auto* synth = protocol->add_subcommand("synth", "synthetic ground truth");
  SynthConfig scfg;
  std::string syn_out;
  SolverFlags syn_flags;
  bool syn_no_timing = false;
  synth->add_option("--rows", scfg.rows, "image rows")->check(CLI::PositiveNumber);
  synth->add_option("--cols", scfg.cols, "image columns")->check(CLI::PositiveNumber);
  synth->add_option("--bands", scfg.bands, "multispectral bands P")->check(CLI::PositiveNumber);
  synth->add_option("--n-sources", scfg.sources, "sources N")->check(CLI::PositiveNumber);
  synth->add_option("--purity", scfg.purity, "maximal abundance of mixed pixels");
  synth->add_flag("--pure-pixels,!--no-pure-pixels", scfg.pure_pixels, "place one pure pixel per source");
  synth->add_option("--noise", scfg.noise, "deviation scale e");
  synth->add_flag("--residual-noise", scfg.residual_noise, "use the denoiser residual as the deviation");
  synth->add_option("--out-dir", syn_out, "output directory")->required();
  synth->add_flag("--no-timing", syn_no_timing, "write runtime_sec = 0");
  add_solver_flags(synth, syn_flags, false);

  auto* wald = protocol->add_subcommand("wald", "user-supplied reference spectra and abundances");
  std::string wd_a, wd_wl, wd_s, wd_out, wd_ranges;
  double wd_noise = 1e-4;
  bool wd_no_timing = false;
  SolverFlags wd_flags;
  wald->add_option("--ref-a", wd_a, "reference hyperspectral endmembers (.csv, bands x N)")
      ->required()->check(CLI::ExistingFile);
  wald->add_option("--wavelengths", wd_wl, "band centers in nm (.csv)")->required()->check(CLI::ExistingFile);
  wald->add_option("--ref-s", wd_s, "reference abundances (.btf)")->required()->check(CLI::ExistingFile);
  wald->add_option("--ranges", wd_ranges, "comma-separated LO-HI nm ranges (default Landsat)");
  wald->add_option("--noise", wd_noise, "deviation scale e");
  wald->add_option("--out-dir", wd_out, "output directory")->required();
  wald->add_flag("--no-timing", wd_no_timing, "write runtime_sec = 0");
  add_solver_flags(wald, wd_flags, false);

  // metrics
  auto* metrics = app.add_subcommand("metrics", "compare an estimate with a reference");
  std::string m_rb, m_eb, m_rs, m_es, m_out = "report.json";
  metrics->add_option("--ref-b", m_rb, "reference B (.csv)")->required()->check(CLI::ExistingFile);
  metrics->add_option("--est-b", m_eb, "estimated B (.csv)")->required()->check(CLI::ExistingFile);
  metrics->add_option("--ref-s", m_rs, "reference S (.btf)")->required()->check(CLI::ExistingFile);
  metrics->add_option("--est-s", m_es, "estimated S (.btf)")->required()->check(CLI::ExistingFile);
  metrics->add_option("--out", m_out, "report path");

  auto usage_for = [&]() -> std::string {
    for (auto* sub : {augment, unmix, synth, wald, metrics})
      if (sub->parsed()) return sub->help();
    if (protocol->parsed()) return protocol->help();
    return app.help();
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << usage_for();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << usage_for();
    return 2;
  }

  try {
    if (augment->parsed()) {
      const Tensor3 zm = read_btf(aug_in);
      std::size_t tau = 2;
      if (aug_tau != "auto") tau = std::stoul(aug_tau);
      else if (aug_sources > 0) tau = effective_tau(zm.channels(), aug_sources, 0);
      Denoiser dn;
      try {
        dn = parse_denoiser(aug_denoiser);
      } catch (const Error& e) {
        throw UsageError(std::string("--denoiser: ") + e.what());
      }
      Tensor3 zt;
      Mat d;
      if (tau == 1) {
        zt = project_nonneg(zm);
        d = Mat::Identity(static_cast<Eigen::Index>(zm.channels()), static_cast<Eigen::Index>(zm.channels()));
      } else {
        auto bsp = bsp_split(zm, tau);
        zt = std::move(bsp.z_tilde);
        d = std::move(bsp.d);
      }
      write_btf(aug_out, refine_virtual_hsi(zt, dn));
      write_csv(aug_srf, d);
      return 0;
    }

    if (unmix->parsed()) {
      SolverConfig cfg = resolve_solver(un_flags);
      cfg.n_sources = un_sources;
      const Tensor3 zm = read_btf(un_msi);
      const UnmixResult r = gqmu_run(zm, cfg);
      write_unmix_outputs(un_out, r, cfg);
      if (!un_ref_b.empty()) {
        MetricsReport m = compute_metrics(read_csv(un_ref_b), read_btf(un_ref_s), r.b_star, r.s_star,
                                          r.runtime_sec);
        if (no_timing) zero_runtime(m);
        write_json(fs::path(un_out) / "report.json", report_json(m, nullptr));
      }
      return 0;
    }

    if (synth->parsed()) {
      SolverConfig cfg = resolve_solver(syn_flags);
      scfg.seed = cfg.seed;
      scfg.denoiser = cfg.denoiser;
      auto [gt, zm] = gen_synthetic(scfg);
      const fs::path dir = syn_out;
      fs::create_directories(dir);
      write_btf(dir / "msi.btf", zm);
      write_csv(dir / "ref_B.csv", gt.b_ref);
      write_btf(dir / "ref_S.btf", gt.s_ref);
      write_csv(dir / "ref_A.csv", gt.a_ref);
      write_csv(dir / "wavelengths.csv",
                Eigen::Map<const Vec>(gt.wavelengths.data(), static_cast<Eigen::Index>(gt.wavelengths.size())));
      ProtocolReport rep = evaluate_protocol(gt, zm, cfg);
      if (syn_no_timing) {
        zero_runtime(rep.method);
        zero_runtime(rep.baseline);
      }
      write_json(dir / "report.json", report_json(rep.method, &rep.baseline));
      out << report_json(rep.method, &rep.baseline).dump(2) << "\n";
      return 0;
    }

    if (wald->parsed()) {
      SolverConfig cfg = resolve_solver(wd_flags);
      std::vector<BandRange> ranges;
      if (wd_ranges.empty()) {
        ranges = landsat_ranges();
      } else {
        std::istringstream in(wd_ranges);
        std::string tok;
        while (std::getline(in, tok, ',')) {
          BandRange r;
          char dash = 0;
          std::istringstream t(tok);
          if (!(t >> r.lo_nm >> dash >> r.hi_nm) || dash != '-' || !(r.hi_nm >= r.lo_nm))
            throw UsageError("--ranges: cannot parse '" + tok + "' (expected LO-HI)");
          ranges.push_back(r);
        }
      }
      const Mat a_ref = read_csv(wd_a);
      ProtocolReport rep = run_protocol_wald(a_ref, read_vector_csv(wd_wl), read_btf(wd_s), ranges, wd_noise,
                                             cfg.seed, cfg);
      if (wd_no_timing) {
        zero_runtime(rep.method);
        zero_runtime(rep.baseline);
      }
      fs::create_directories(wd_out);
      write_json(fs::path(wd_out) / "report.json", report_json(rep.method, &rep.baseline));
      out << report_json(rep.method, &rep.baseline).dump(2) << "\n";
      return 0;
    }

    if (metrics->parsed()) {
      const MetricsReport m = compute_metrics(read_csv(m_rb), read_btf(m_rs), read_csv(m_eb), read_btf(m_es));
      write_json(m_out, report_json(m, nullptr));
      return 0;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << usage_for();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace gqmu
