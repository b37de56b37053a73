#pragma once

// Configuration -> design -> lattices -> labeling -> simulation.

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mdlvq/config.hpp"
#include "mdlvq/errors.hpp"
#include "mdlvq/hr_design.hpp"
#include "mdlvq/labeling.hpp"
#include "mdlvq/simulator.hpp"

namespace mdlvq {

/// The operating point actually used: the optimal design when N is not given,
/// otherwise the explicit indices with nu from the config or rescaled from R*.
struct ResolvedDesign {
  DesignParams params;
  bool explicit_indices = false;
  std::vector<std::int64_t> indices;
  double nu = 0.0;
  double psi = 1.0;
  bool psi_known = true;

  std::vector<double> indices_real() const { return {indices.begin(), indices.end()}; }
};

inline ResolvedDesign resolve_design(const ExperimentConfig& cfg) {
  const ChannelModel channel(cfg.p);
  ResolvedDesign d;
  if (!cfg.indices) {
    d.params = design_quantizer(cfg.lattice, cfg.source, channel, *cfg.rstar, cfg.split, cfg.psi);
    d.indices = d.params.indices_snapped;
    d.nu = d.params.nu_rescaled;
    d.psi = d.params.psi;
    d.psi_known = d.params.psi_known;
    return d;
  }
  d.explicit_indices = true;
  d.indices = *cfg.indices;
  const PsiDefault pd = default_psi(cfg.dim(), cfg.K());
  d.psi = cfg.psi.value_or(pd.psi);
  d.psi_known = cfg.psi.has_value() || pd.known;
  if (cfg.nu) {
    d.nu = *cfg.nu;
  } else {
    double log_prod = 0.0;
    for (auto n : d.indices) log_prod += std::log2(static_cast<double>(n));
    d.nu = std::exp2(cfg.dim() * (cfg.source.entropy - *cfg.rstar / cfg.K()) - log_prod / cfg.K());
  }
  DesignParams& p = d.params;
  p.rstar = cfg.rstar.value_or(0.0);
  p.psi = d.psi;
  p.psi_known = d.psi_known;
  p.indices_snapped = d.indices;
  p.nu_rescaled = d.nu;
  if (cfg.rstar) p.tau = tau_star(cfg.source, cfg.K(), *cfg.rstar);
  p.rates_snapped = rates(d.nu, d.indices_real(), cfg.source);
  const Lattice central(cfg.lattice);
  p.predicted = predict_distortion({cfg.source, channel, d.nu, d.indices_real(), d.psi, central.second_moment(),
                                    sphere_second_moment(cfg.dim())});
  return d;
}

inline LatticeSetup build_setup(const ExperimentConfig& cfg, const ResolvedDesign& d) {
  return make_setup(cfg.lattice, d.nu, d.indices);
}

inline std::shared_ptr<const IndexAssignment> build_assignment(const ExperimentConfig& cfg, const ResolvedDesign& d) {
  AssignOptions opts;
  opts.cap = cfg.cap;
  return std::make_shared<const IndexAssignment>(assign(build_setup(cfg, d), ChannelModel(cfg.p), d.psi, opts));
}

inline SimReport simulate(const ExperimentConfig& cfg, std::shared_ptr<const IndexAssignment> asg) {
  SimConfig sc;
  sc.vectors = cfg.vectors;
  sc.seed = cfg.seed;
  sc.source = cfg.source;
  sc.channel = ChannelModel(cfg.p);
  sc.assignment = std::move(asg);
  return run(sc);
}

/// Returns a copy of cfg with one parameter replaced: `p<i>` (a loss probability) or `rstar`.
inline ExperimentConfig with_parameter(const ExperimentConfig& cfg, const std::string& param, double value) {
  ExperimentConfig out = cfg;
  if (param == "rstar") {
    if (!(value > 0.0)) throw ConfigError("sweep: rstar must be positive");
    out.rstar = value;
    return out;
  }
  if (param.size() >= 2 && param[0] == 'p') {
    int index = -1;
    try {
      index = detail::parse_int<int>(std::string_view(param).substr(1));
    } catch (const ConfigError&) {
      index = -1;
    }
    if (index < 0 || index >= cfg.K())
      throw ConfigError("sweep: parameter '" + param + "' does not name a description (p0..p" +
                        std::to_string(cfg.K() - 1) + ")");
    if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("sweep: loss probabilities must lie in [0, 1]");
    out.p[static_cast<std::size_t>(index)] = value;
    return out;
  }
  throw ConfigError("sweep: unknown parameter '" + param + "' (expected p<i> or rstar)");
}

struct SweepPoint {
  double value = 0.0;
  ExperimentConfig config;
  ResolvedDesign design;
  SimReport report;
};

/// Re-designs (optimal nu, re-snapped indices), re-labels and re-simulates at every value.
/// The seed is held fixed, so the source and erasure streams are shared across points.
inline std::vector<SweepPoint> sweep(const ExperimentConfig& cfg, const std::string& param,
                                     const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  std::vector<SweepPoint> out;
  for (double v : values) {
    SweepPoint pt;
    pt.value = v;
    pt.config = with_parameter(cfg, param, v);
    pt.design = resolve_design(pt.config);
    pt.report = simulate(pt.config, build_assignment(pt.config, pt.design));
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace mdlvq
