#pragma once

// Text formats: the assignment table file and CSV reports with '#' metadata lines.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mdlvq/config.hpp"
#include "mdlvq/errors.hpp"
#include "mdlvq/labeling.hpp"
#include "mdlvq/pipeline.hpp"
#include "mdlvq/rng.hpp"
#include "mdlvq/simulator.hpp"

namespace mdlvq {

inline constexpr std::string_view kVersion = "0.1.0";

// ---- assignment table -------------------------------------------------------

inline std::string assignment_header(const IndexAssignment& asg) {
  std::ostringstream o;
  o << "mdlvq-assignment v1; lattice=" << asg.setup().central.name() << "; K=" << asg.K() << "; N=";
  const auto idx = asg.setup().indices();
  for (std::size_t i = 0; i < idx.size(); ++i) o << (i ? "," : "") << idx[i];
  o << "; nu=" << detail::format_exact(asg.setup().nu()) << "; psi=" << detail::format_exact(asg.psi());
  return o.str();
}

/// One row per central point in V_pi(0): its coordinates, then each tuple element in its sublattice's own basis.
inline void write_assignment(std::ostream& out, const IndexAssignment& asg) {
  out << assignment_header(asg) << "\n";
  const int dim = asg.dim();
  const LatticeSetup& s = asg.setup();
  for (std::size_t r = 0; r < asg.table().size(); ++r) {
    const LatticePoint& c = asg.central_points()[r];
    out << c.coords[0];
    if (dim == 2) out << "," << c.coords[1];
    for (int i = 0; i < asg.K(); ++i) {
      const LatticePoint k = s.sides[static_cast<std::size_t>(i)].own_coords(asg.table()[r][static_cast<std::size_t>(i)]);
      out << "," << k.coords[0];
      if (dim == 2) out << "," << k.coords[1];
    }
    out << "\n";
  }
}

inline void save_assignment(const std::string& path, const IndexAssignment& asg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write assignment file '" + path + "'");
  write_assignment(out, asg);
  if (!out) throw ConfigError("error while writing '" + path + "'");
}

/// Rebuilds the lattices from the header (first clean witness per index) and the table from the rows.
/// The file carries no channel, so the result has no channel snapshot and a NaN total cost.
inline IndexAssignment read_assignment(std::istream& in, std::string_view origin = "assignment") {
  const std::string where(origin);
  std::string header;
  if (!std::getline(in, header)) throw ConfigError(where + ": empty file");
  std::map<std::string, std::string> fields;
  const auto parts = detail::split_list(header, ';');
  if (parts.empty() || parts[0] != "mdlvq-assignment v1") throw ConfigError(where + ":1: not an mdlvq-assignment v1 file");
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ":1: malformed header field '" + std::string(parts[i]) + "'");
    fields[std::string(parts[i].substr(0, eq))] = std::string(parts[i].substr(eq + 1));
  }
  for (const char* key : {"lattice", "K", "N", "nu", "psi"})
    if (!fields.contains(key)) throw ConfigError(where + ":1: header is missing '" + key + "'");
  LatticeKind kind{};
  int k = 0;
  std::vector<std::int64_t> idx;
  double nu = 0.0;
  double psi = 0.0;
  try {
    kind = parse_lattice_kind(fields["lattice"]);
    k = detail::parse_int<int>(fields["K"]);
    for (auto tok : detail::split_list(fields["N"])) idx.push_back(detail::parse_int<std::int64_t>(tok));
    nu = detail::parse_double(fields["nu"]);
    psi = detail::parse_double(fields["psi"]);
  } catch (const Error& e) {
    throw ConfigError(where + ":1: " + e.what());
  }
  if (static_cast<int>(idx.size()) != k) throw ConfigError(where + ":1: K does not match the number of indices");
  const LatticeSetup setup = make_setup(kind, nu, idx);
  const int dim = setup.dim();
  const std::size_t width = static_cast<std::size_t>(dim * (k + 1));

  std::vector<LatticePoint> rows;
  std::vector<Tuple> table;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<std::int64_t> v;
    try {
      for (auto tok : detail::split_list(line)) v.push_back(detail::parse_int<std::int64_t>(tok));
    } catch (const Error& e) {
      throw ConfigError(where + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (v.size() != width)
      throw ConfigError(where + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) + " fields");
    auto point = [&](std::size_t at) { return LatticePoint{{v[at], dim == 2 ? v[at + 1] : 0}}; };
    rows.push_back(point(0));
    Tuple t;
    for (int i = 0; i < k; ++i)
      t.push_back(setup.sides[static_cast<std::size_t>(i)].from_own_coords(point(static_cast<std::size_t>(dim * (i + 1)))));
    table.push_back(std::move(t));
  }
  try {
    return IndexAssignment(setup, psi, std::nullopt, std::move(rows), std::move(table),
                           std::numeric_limits<double>::quiet_NaN());
  } catch (const Error& e) {
    throw ConfigError(where + ": inconsistent table: " + e.what());
  }
}

inline IndexAssignment load_assignment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open assignment file '" + path + "'");
  return read_assignment(in, path);
}

// ---- CSV reports ------------------------------------------------------------

inline void write_metadata(std::ostream& out, std::string_view command, const ExperimentConfig& cfg) {
  out << "# mdlvq-report v1\n";
  out << "# version=" << kVersion << "\n";
  out << "# command=" << command << "\n";
  out << "# config_hash=" << config_hash(cfg) << "\n";
  out << "# seed=" << cfg.seed << "\n";
  out << "# gaussian=" << kGaussianMethod << "\n";
}

inline std::string mask_label(SubsetMask mask, int k) {
  std::string s = "{";
  bool first = true;
  for (int i = 0; i < k; ++i)
    if (mask >> i & 1U) {
      if (!first) s += ";";
      s += std::to_string(i);
      first = false;
    }
  return s + "}";
}

inline void write_design_csv(std::ostream& out, const ExperimentConfig& cfg, const ResolvedDesign& d) {
  write_metadata(out, "design", cfg);
  const DesignParams& p = d.params;
  out << "quantity,index,value\n";
  auto row = [&](std::string_view name, int index, double v) {
    out << name << "," << (index < 0 ? std::string() : std::to_string(index)) << "," << detail::format_exact(v) << "\n";
  };
  row("rstar", -1, p.rstar);
  row("psi", -1, d.psi);
  row("tau_star", -1, p.tau);
  if (!d.explicit_indices) {
    row("nu_opt", -1, p.nu_opt);
    for (std::size_t i = 0; i < p.indices_opt.size(); ++i) row("N_opt", static_cast<int>(i), p.indices_opt[i]);
    row("R_c_opt", -1, p.rates_opt.central);
  }
  for (std::size_t i = 0; i < d.indices.size(); ++i) row("N", static_cast<int>(i), static_cast<double>(d.indices[i]));
  row("nu", -1, d.nu);
  row("R_c", -1, p.rates_snapped.central);
  for (std::size_t i = 0; i < p.rates_snapped.side.size(); ++i) row("R_i", static_cast<int>(i), p.rates_snapped.side[i]);
  row("R_sum", -1, p.rates_snapped.side_sum());
  row("predicted_central", -1, p.predicted.central);
  row("predicted_zero", -1, p.predicted.zero);
  row("predicted_side", -1, p.predicted.side);
  row("predicted_total", -1, p.predicted.total);
}

/// Model value of the conditional distortion for receiving exactly `mask`.
inline double model_subset_distortion(const IndexAssignment& asg, const SourceModel& src, SubsetMask mask) {
  const double dc = asg.setup().central.second_moment() * std::pow(asg.setup().nu(), 2.0 / asg.dim());
  if (mask == 0) return src.mean_power;
  return dc + asg.side_distortion(mask);
}

inline void write_simulation_csv(std::ostream& out, const ExperimentConfig& cfg, const IndexAssignment& asg,
                                 const SimReport& rep) {
  write_metadata(out, "simulate", cfg);
  const ChannelModel channel(cfg.p);
  const int k = asg.K();
  out << "record,subset,count,frequency,probability,empirical,std_error,model\n";
  for (SubsetMask m = 0; m < rep.per_subset.size(); ++m) {
    const SubsetStats& s = rep.per_subset[m];
    out << "subset," << mask_label(m, k) << "," << s.count << ","
        << detail::format_exact(static_cast<double>(s.count) / static_cast<double>(rep.vectors)) << ","
        << detail::format_exact(subset_prob(channel, m)) << "," << detail::format_exact(s.mean()) << "," << detail::format_exact(s.std_error())
        << "," << detail::format_exact(model_subset_distortion(asg, cfg.source, m)) << "\n";
  }
  out << "total,," << rep.vectors << ",1,1," << detail::format_exact(rep.empirical_total) << "," << detail::format_exact(rep.std_error)
      << "," << detail::format_exact(rep.predicted.total) << "\n";
  const auto idx = asg.setup().indices();
  const auto r = rates(asg.setup().nu(), std::vector<double>(idx.begin(), idx.end()), cfg.source);
  for (int i = 0; i < k; ++i)
    out << "side_entropy," << i << ",,,," << detail::format_exact(rep.side_entropy[static_cast<std::size_t>(i)]) << ",,"
        << detail::format_exact(r.side[static_cast<std::size_t>(i)]) << "\n";
}

inline std::string join_indices(const std::vector<std::int64_t>& idx) {
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? ";" : "") + std::to_string(idx[i]);
  return s;
}

inline void write_sweep_csv(std::ostream& out, const ExperimentConfig& cfg, const std::string& param,
                            const std::vector<SweepPoint>& points) {
  write_metadata(out, "sweep", cfg);
  out << "# sweep_param=" << param << "\n";
  out << "param,value,N,nu,empirical_total,std_error,predicted_total,predicted_central,predicted_zero,predicted_side,"
         "empirical_central\n";
  for (const SweepPoint& pt : points) {
    const DistortionPrediction& pr = pt.report.predicted;
    out << param << "," << detail::format_exact(pt.value) << "," << join_indices(pt.design.indices) << ","
        << detail::format_exact(pt.design.nu) << "," << detail::format_exact(pt.report.empirical_total) << ","
        << detail::format_exact(pt.report.std_error) << "," << detail::format_exact(pr.total) << "," << detail::format_exact(pr.central) << ","
        << detail::format_exact(pr.zero) << "," << detail::format_exact(pr.side) << "," << detail::format_exact(pt.report.empirical_central)
        << "\n";
  }
}

/// A parsed CSV report: metadata key/values and rows as string fields keyed by column name.
struct CsvReport {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::map<std::string, std::string>> rows;
};

inline CsvReport read_csv_report(std::istream& in, std::string_view origin = "report") {
  CsvReport rep;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = detail::trim(std::string_view(line).substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos) rep.meta[std::string(body.substr(0, eq))] = std::string(body.substr(eq + 1));
      continue;
    }
    const auto fields = detail::split_list(line);
    if (rep.columns.empty()) {
      for (auto f : fields) rep.columns.emplace_back(f);
      continue;
    }
    if (fields.size() != rep.columns.size())
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(rep.columns.size()) + " fields");
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < fields.size(); ++i) row[rep.columns[i]] = std::string(fields[i]);
    rep.rows.push_back(std::move(row));
  }
  if (rep.columns.empty()) throw ConfigError(std::string(origin) + ": no CSV header");
  return rep;
}

}  // namespace mdlvq
