#pragma once

// Flat `key = value` experiment configuration with line-level diagnostics.
//
// Keys (defaults in brackets):
//   lattice  Z1 | Z2 | A2 [Z2]          K      number of descriptions (optional, must match p)
//   p        loss probabilities, one per description (required)
//   source   gaussian | custom [gaussian]
//   sigma2   Gaussian variance [1]      h, mean_power   custom source entropy (bits/dim) and E||X||^2
//   rstar    target sum of side entropies, bits/dim
//   a        rate fractions [equal split]
//   psi      expansion factor [1 for K=2, 2^{(K-2)/(K-1)} for L=2]
//   N        explicit index values (skips the optimal-index design)
//   nu       explicit central cell volume (only with N; otherwise derived from rstar)
//   n [200000]  seed [1]  cap [10000]  out  assignment

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "mdlvq/errors.hpp"
#include "mdlvq/hr_design.hpp"
#include "mdlvq/lattice.hpp"

namespace mdlvq {

struct ExperimentConfig {
  LatticeKind lattice = LatticeKind::Z2;
  SourceModel source = SourceModel::gaussian(1.0, 2);
  std::vector<double> p;
  std::optional<double> rstar;
  std::optional<std::vector<double>> split;
  std::optional<double> psi;
  std::optional<std::vector<std::int64_t>> indices;
  std::optional<double> nu;
  std::size_t vectors = 200000;
  std::uint64_t seed = 1;
  std::int64_t cap = 10000;
  std::string out;
  std::string assignment;

  int K() const { return static_cast<int>(p.size()); }
  int dim() const { return dimension_of(lattice); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_list(std::string_view s, char sep = ',') {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

inline double parse_double(std::string_view s) {
  // strtod handles the full decimal/exponent grammar; require the whole token to be consumed
  const std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(v))
    throw ConfigError("expected a number, got '" + buf + "'");
  return v;
}

template <class Int>
Int parse_int(std::string_view s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("expected an integer, got '" + std::string(s) + "'");
  return v;
}

inline std::vector<double> parse_doubles(std::string_view s) {
  std::vector<double> out;
  for (auto tok : split_list(s)) out.push_back(parse_double(tok));
  return out;
}

/// Shortest decimal text that reads back to exactly `v`.
inline std::string format_exact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Parses and validates a configuration. Errors name the line and field.
inline ExperimentConfig parse_config(std::istream& in, std::string_view origin = "config") {
  ExperimentConfig cfg;
  std::optional<int> declared_k;
  std::string source_kind = "gaussian";
  double sigma2 = 1.0;
  std::optional<double> entropy;
  std::optional<double> mean_power;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(lineno);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key(detail::trim(view.substr(0, eq)));
    const std::string_view value = detail::trim(view.substr(eq + 1));
    try {
      if (key == "lattice") {
        cfg.lattice = parse_lattice_kind(value);
      } else if (key == "K") {
        declared_k = detail::parse_int<int>(value);
      } else if (key == "p") {
        cfg.p = detail::parse_doubles(value);
      } else if (key == "source") {
        source_kind = std::string(value);
        if (source_kind != "gaussian" && source_kind != "custom")
          throw ConfigError("expected 'gaussian' or 'custom', got '" + source_kind + "'");
      } else if (key == "sigma2") {
        sigma2 = detail::parse_double(value);
      } else if (key == "h") {
        entropy = detail::parse_double(value);
      } else if (key == "mean_power") {
        mean_power = detail::parse_double(value);
      } else if (key == "rstar") {
        cfg.rstar = detail::parse_double(value);
      } else if (key == "a") {
        cfg.split = detail::parse_doubles(value);
      } else if (key == "psi") {
        cfg.psi = detail::parse_double(value);
      } else if (key == "N") {
        std::vector<std::int64_t> idx;
        for (auto tok : detail::split_list(value)) idx.push_back(detail::parse_int<std::int64_t>(tok));
        cfg.indices = idx;
      } else if (key == "nu") {
        cfg.nu = detail::parse_double(value);
      } else if (key == "n") {
        cfg.vectors = detail::parse_int<std::size_t>(value);
      } else if (key == "seed") {
        cfg.seed = detail::parse_int<std::uint64_t>(value);
      } else if (key == "cap") {
        cfg.cap = detail::parse_int<std::int64_t>(value);
      } else if (key == "out") {
        cfg.out = std::string(value);
      } else if (key == "assignment") {
        cfg.assignment = std::string(value);
      } else {
        throw ConfigError("unknown key");
      }
    } catch (const Error& e) {
      throw ConfigError(where + ": field '" + key + "': " + e.what());
    }
  }

  const std::string where(origin);
  if (cfg.p.empty()) throw ConfigError(where + ": field 'p' is required");
  try {
    (void)ChannelModel(cfg.p);
  } catch (const Error& e) {
    throw ConfigError(where + ": field 'p': " + e.what());
  }
  if (declared_k && *declared_k != cfg.K())
    throw ConfigError(where + ": field 'K' is " + std::to_string(*declared_k) + " but 'p' has " +
                      std::to_string(cfg.K()) + " entries");
  if (source_kind == "gaussian") {
    if (!(sigma2 > 0.0)) throw ConfigError(where + ": field 'sigma2' must be positive");
    cfg.source = SourceModel::gaussian(sigma2, cfg.dim());
  } else {
    if (!entropy || !mean_power) throw ConfigError(where + ": custom source needs 'h' and 'mean_power'");
    if (!(*mean_power > 0.0)) throw ConfigError(where + ": field 'mean_power' must be positive");
    cfg.source = SourceModel::custom(*entropy, *mean_power, cfg.dim());
  }
  if (cfg.rstar && !(*cfg.rstar > 0.0)) throw ConfigError(where + ": field 'rstar' must be positive");
  if (cfg.split && static_cast<int>(cfg.split->size()) != cfg.K())
    throw ConfigError(where + ": field 'a' needs one entry per description");
  if (cfg.psi && !(*cfg.psi >= 1.0)) throw ConfigError(where + ": field 'psi' must be >= 1");
  if (cfg.indices) {
    if (static_cast<int>(cfg.indices->size()) != cfg.K())
      throw ConfigError(where + ": field 'N' needs one entry per description");
    for (auto n : *cfg.indices)
      if (n < 1) throw ConfigError(where + ": field 'N' entries must be >= 1");
  }
  if (cfg.nu && !cfg.indices) throw ConfigError(where + ": field 'nu' is only meaningful together with 'N'");
  if (cfg.nu && !(*cfg.nu > 0.0)) throw ConfigError(where + ": field 'nu' must be positive");
  if (!cfg.rstar && !(cfg.indices && cfg.nu)) throw ConfigError(where + ": field 'rstar' is required (or give both 'N' and 'nu')");
  if (cfg.vectors < 1) throw ConfigError(where + ": field 'n' must be >= 1");
  if (cfg.cap < 1) throw ConfigError(where + ": field 'cap' must be >= 1");
  return cfg;
}

inline ExperimentConfig parse_config_text(std::string_view text, std::string_view origin = "config") {
  std::istringstream in{std::string(text)};
  return parse_config(in, origin);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

/// Canonical text of the effective configuration (every key, fixed order, round-trip numbers).
inline std::string canonical_config(const ExperimentConfig& cfg) {
  auto list = [](const auto& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      if constexpr (std::is_floating_point_v<std::decay_t<decltype(v[i])>>)
        s += detail::format_exact(v[i]);
      else
        s += std::to_string(v[i]);
    }
    return s;
  };
  std::ostringstream o;
  o << "lattice=" << name_of(cfg.lattice) << "\n";
  o << "K=" << cfg.K() << "\n";
  o << "p=" << list(cfg.p) << "\n";
  if (cfg.source.kind == SourceKind::Gaussian) {
    o << "source=gaussian\nsigma2=" << detail::format_exact(cfg.source.variance) << "\n";
  } else {
    o << "source=custom\nh=" << detail::format_exact(cfg.source.entropy) << "\nmean_power=" << detail::format_exact(cfg.source.mean_power)
      << "\n";
  }
  o << "rstar=" << (cfg.rstar ? detail::format_exact(*cfg.rstar) : "") << "\n";
  o << "a=" << (cfg.split ? list(*cfg.split) : "") << "\n";
  o << "psi=" << (cfg.psi ? detail::format_exact(*cfg.psi) : "") << "\n";
  o << "N=" << (cfg.indices ? list(*cfg.indices) : "") << "\n";
  o << "nu=" << (cfg.nu ? detail::format_exact(*cfg.nu) : "") << "\n";
  o << "n=" << cfg.vectors << "\nseed=" << cfg.seed << "\ncap=" << cfg.cap << "\n";
  return o.str();
}

/// 64-bit FNV-1a of the canonical configuration, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mdlvq
