#pragma once

// On-disk formats: BTF tensors, CSV matrices, 16-bit PGM heatmaps, flat
// key=value configs and JSON reports. Every writer goes through a temp file
// and a rename.

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gqmu/error.hpp"
#include "gqmu/protocol.hpp"
#include "gqmu/tensor.hpp"

namespace gqmu {

namespace fs = std::filesystem;

inline std::string read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw InvalidInput("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw InvalidInput("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

// ---------------------------------------------------------------------------
// BTF: "BTF1", u8 ndims, ndims x u32 LE dims, f32 LE payload (band-sequential).

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32(const std::string& in, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
  return v;
}

}  // namespace detail

inline std::string encode_btf(const Tensor3& t) {
  for (std::size_t d : {t.rows(), t.cols(), t.channels()})
    if (d > 0xFFFFFFFFu) throw InvalidInput("write_btf: dimension exceeds 32 bits");
  std::string out = "BTF1";
  out.push_back(static_cast<char>(3));
  detail::put_u32(out, static_cast<std::uint32_t>(t.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(t.cols()));
  detail::put_u32(out, static_cast<std::uint32_t>(t.channels()));
  out.reserve(out.size() + 4 * t.size());
  for (double v : t.data()) detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

// Accepts 1 to 3 dims; missing trailing dims are 1.
inline Tensor3 decode_btf(const std::string& in) {
  if (in.size() < 4 || in.compare(0, 4, "BTF1") != 0) throw FormatError("btf: bad magic, expected 'BTF1'", 0);
  if (in.size() < 5) throw FormatError("btf: missing dimension count", 4);
  const std::size_t ndims = static_cast<unsigned char>(in[4]);
  if (ndims < 1 || ndims > 3)
    throw FormatError("btf: " + std::to_string(ndims) + " dims unsupported (1 to 3)", 4);
  const std::size_t header = 5 + 4 * ndims;
  if (in.size() < header)
    throw FormatError("btf: truncated header, expected " + std::to_string(header) + " bytes, file has " +
                          std::to_string(in.size()),
                      in.size());
  std::array<std::size_t, 3> dims{1, 1, 1};
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < ndims; ++i) {
    dims[i] = detail::get_u32(in, 5 + 4 * i);
    count *= dims[i];
    if (count > (std::uint64_t{1} << 40)) throw FormatError("btf: dimension product overflows", 5 + 4 * i);
  }
  const std::uint64_t expected = header + 4 * count;
  if (in.size() != expected)
    throw FormatError("btf: payload length mismatch, expected " + std::to_string(expected) +
                          " bytes in total, file has " + std::to_string(in.size()),
                      std::min<std::uint64_t>(in.size(), expected));
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i)
    data[i] = std::bit_cast<float>(detail::get_u32(in, header + 4 * i));
  return Tensor3(dims[0], dims[1], dims[2], std::move(data));
}

inline void write_btf(const fs::path& path, const Tensor3& t) { write_file_atomic(path, encode_btf(t)); }

inline Tensor3 read_btf(const fs::path& path) {
  try {
    return decode_btf(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.detail(), e.offset());
  }
}

// ---------------------------------------------------------------------------
// CSV matrices

inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::string encode_csv(const Mat& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out.push_back(',');
      out += format_double(m(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

inline Mat decode_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t line_start = pos;
    pos = end + 1;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    std::vector<double> row;
    std::size_t cell = 0;
    while (true) {
      std::size_t comma = line.find(',', cell);
      std::string_view tok = line.substr(cell, comma == std::string_view::npos ? line.npos : comma - cell);
      const auto b = tok.find_first_not_of(" \t");
      const auto e = tok.find_last_not_of(" \t");
      if (b == std::string_view::npos)
        throw FormatError("csv: empty cell in row " + std::to_string(rows.size() + 1), line_start + cell);
      tok = tok.substr(b, e - b + 1);
      double v = 0.0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v))
        throw FormatError("csv: '" + std::string(tok) + "' is not a finite number", line_start + cell + b);
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      cell = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError("csv: row " + std::to_string(rows.size() + 1) + " has " + std::to_string(row.size()) +
                            " values, expected " + std::to_string(rows.front().size()),
                        line_start);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("csv: no data", 0);
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

inline void write_csv(const fs::path& path, const Mat& m) { write_file_atomic(path, encode_csv(m)); }

inline Mat read_csv(const fs::path& path) {
  try {
    return decode_csv(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.detail(), e.offset());
  }
}

// Wavelength sidecar: one value per line or a single row.
inline std::vector<double> read_vector_csv(const fs::path& path) {
  const Mat m = read_csv(path);
  if (m.rows() != 1 && m.cols() != 1)
    throw FormatError(path.string() + ": expected a single row or column of values", 0);
  return std::vector<double>(m.data(), m.data() + m.size());
}

// ---------------------------------------------------------------------------
// Heatmaps

inline std::string encode_heatmap(std::span<const double> values, std::size_t rows, std::size_t cols,
                                  double scale) {
  if (values.size() != rows * cols) throw InvalidInput("heatmap: value count does not match the image size");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidInput("heatmap: scale must be a finite value > 0");
  std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n65535\n";
  out.reserve(out.size() + 2 * values.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = values[r * cols + c];
      if (!std::isfinite(v)) throw InvalidInput("heatmap: non-finite value at pixel " + std::to_string(r * cols + c));
      const auto q = static_cast<std::uint16_t>(std::lround(std::clamp(v / scale, 0.0, 1.0) * 65535.0));
      out.push_back(static_cast<char>(q >> 8));
      out.push_back(static_cast<char>(q & 0xFF));
    }
  }
  return out;
}

inline void write_heatmap(const fs::path& path, const Tensor3& t, std::size_t channel, double scale = 1.0) {
  if (channel >= t.channels()) throw InvalidInput("heatmap: channel out of range");
  write_file_atomic(path, encode_heatmap(t.channel(channel), t.rows(), t.cols(), scale));
}

// ---------------------------------------------------------------------------
// Flat config files: "key = value", '#' starts a comment.

using ConfigMap = std::map<std::string, std::string>;

inline ConfigMap parse_config(const std::string& text, const std::string& origin = "config") {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");
    out[key] = value;
  }
  return out;
}

inline ConfigMap read_config(const fs::path& path) { return parse_config(read_file_bytes(path), path.string()); }

namespace detail {

inline double config_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

inline std::uint64_t config_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

inline bool config_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: '" + key + "' expects true|false, got '" + v + "'");
}

}  // namespace detail

inline const std::vector<std::string>& solver_config_keys() {
  static const std::vector<std::string> keys = {
      "lambda1", "lambda2", "lambda3_dag", "lambda4_dag_init", "lambda4_growth", "scale", "scale_by_pixels", "mu",
      "outer_iters", "admm_iters", "prior", "denoiser", "mv_variant", "n_sources", "seed", "tau", "tol",
      "recompute_weights", "qdip_qubits", "qdip_readout", "qdip_lr", "qdip_iterations", "qdip_widths",
      "qdip_toffoli", "qdip_leaky_slope", "qdip_seed"};
  return keys;
}

namespace detail {

inline void apply_solver_key_unchecked(SolverConfig& cfg, const std::string& key, const std::string& v) {
  if (key == "lambda1") cfg.lambda1 = config_double(key, v);
  else if (key == "lambda2") cfg.lambda2 = config_double(key, v);
  else if (key == "lambda3_dag") cfg.lambda3_dag = config_double(key, v);
  else if (key == "lambda4_dag_init") cfg.lambda4_dag_init = config_double(key, v);
  else if (key == "lambda4_growth") cfg.lambda4_growth = config_double(key, v);
  else if (key == "scale") cfg.scale = config_double(key, v);
  else if (key == "scale_by_pixels") cfg.scale_by_pixels = config_bool(key, v);
  else if (key == "mu") cfg.mu = config_double(key, v);
  else if (key == "outer_iters") cfg.outer_iters = config_uint(key, v);
  else if (key == "admm_iters") cfg.admm_iters = config_uint(key, v);
  else if (key == "prior") cfg.prior = parse_prior(v);
  else if (key == "denoiser") { parse_denoiser(v); cfg.denoiser = v; }
  else if (key == "mv_variant") cfg.mv_variant = parse_mv_variant(v);
  else if (key == "n_sources") cfg.n_sources = config_uint(key, v);
  else if (key == "seed") cfg.seed = cfg.qdip.seed = config_uint(key, v);
  else if (key == "qdip_seed") cfg.qdip.seed = config_uint(key, v);
  else if (key == "tau") cfg.tau = v == "auto" ? 0 : config_uint(key, v);
  else if (key == "tol") cfg.tol = config_double(key, v);
  else if (key == "recompute_weights") cfg.recompute_weights = config_bool(key, v);
  else if (key == "qdip_qubits") cfg.qdip.n_qubits = config_uint(key, v);
  else if (key == "qdip_readout") cfg.qdip.readout = parse_readout(v);
  else if (key == "qdip_lr") cfg.qdip.learning_rate = config_double(key, v);
  else if (key == "qdip_iterations") cfg.qdip.iterations = config_uint(key, v);
  else if (key == "qdip_toffoli") cfg.qdip.toffoli = config_bool(key, v);
  else if (key == "qdip_leaky_slope") cfg.qdip.leaky_slope = config_double(key, v);
  else if (key == "qdip_widths") {
    cfg.qdip.widths.clear();
    std::string tok;
    std::istringstream in(v);
    while (std::getline(in, tok, ',')) cfg.qdip.widths.push_back(config_uint(key, tok));
  } else {
    std::string valid;
    for (const auto& k : solver_config_keys()) valid += (valid.empty() ? "" : ", ") + k;
    throw ConfigError("config: unknown key '" + key + "' (valid keys: " + valid + ")");
  }
}

}  // namespace detail

inline void apply_solver_key(SolverConfig& cfg, const std::string& key, const std::string& v) {
  try {
    detail::apply_solver_key_unchecked(cfg, key, v);
  } catch (const InvalidInput& e) {
    throw ConfigError("config: '" + key + "': " + e.what());
  }
}

// "seed" goes first so that an explicit qdip_seed wins.
inline void apply_config(SolverConfig& cfg, const ConfigMap& map) {
  if (auto it = map.find("seed"); it != map.end()) apply_solver_key(cfg, it->first, it->second);
  for (const auto& [k, v] : map)
    if (k != "seed") apply_solver_key(cfg, k, v);
}

// ---------------------------------------------------------------------------
// Reports

inline nlohmann::ordered_json metrics_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["phi_en_deg"] = r.phi_en_deg;
  j["phi_ab_deg"] = r.phi_ab_deg;
  j["rmse_x100"] = r.rmse_x100;
  j["permutation"] = r.permutation;
  j["runtime_sec"] = r.runtime_sec;
  return j;
}

inline nlohmann::ordered_json report_json(const MetricsReport& method, const MetricsReport* baseline) {
  nlohmann::ordered_json j;
  j["method"] = metrics_json(method);
  if (baseline) j["baseline"] = metrics_json(*baseline);
  return j;
}

inline void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

inline std::string encode_diagnostics(const UnmixResult& r) {
  std::string out = "iteration,objective,primal_residual,lambda4_dag\n";
  for (const auto& it : r.iterations)
    out += std::to_string(it.iteration) + "," + format_double(it.objective) + "," +
           format_double(it.primal_residual) + "," + format_double(it.lambda4_dag) + "\n";
  return out;
}

}  // namespace gqmu
