#pragma once

// High-resolution design equations: rates, the optimal central cell volume, the
// optimal index values, index snapping and the analytic expected distortion.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mdlvq/errors.hpp"
#include "mdlvq/lattice.hpp"
#include "mdlvq/loss_model.hpp"
#include "mdlvq/sublattice.hpp"

namespace mdlvq {

enum class SourceKind { Gaussian, Custom };

/// What the design equations need to know about an i.i.d. source.
struct SourceModel {
  SourceKind kind = SourceKind::Gaussian;
  int dim = 2;
  double variance = 1.0;       // Gaussian only
  double entropy = 0.0;        // h(X), bits per dimension
  double mean_power = 1.0;     // E[dnorm2(X)]

  static SourceModel gaussian(double variance, int dim) {
    if (!(variance > 0.0)) throw Error("SourceModel: variance must be positive");
    if (dim != 1 && dim != 2) throw DimensionError("SourceModel: unsupported dimension");
    return {SourceKind::Gaussian, dim, variance,
            0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e * variance), variance};
  }

  static SourceModel custom(double entropy, double mean_power, int dim) {
    if (!(mean_power > 0.0)) throw Error("SourceModel: mean power must be positive");
    if (dim != 1 && dim != 2) throw DimensionError("SourceModel: unsupported dimension");
    return {SourceKind::Custom, dim, 0.0, entropy, mean_power};
  }
};

struct Rates {
  double central = 0.0;        // R_c
  std::vector<double> side;    // R_i

  double side_sum() const {
    double s = 0.0;
    for (double r : side) s += r;
    return s;
  }
};

inline Rates rates(double nu, std::span<const double> indices, const SourceModel& src) {
  if (!(nu > 0.0)) throw Error("rates: nu must be positive");
  const double l = src.dim;
  Rates r;
  r.central = src.entropy - std::log2(nu) / l;
  for (double n : indices) {
    if (!(n >= 1.0)) throw Error("rates: indices must be >= 1");
    r.side.push_back(src.entropy - std::log2(n * nu) / l);
  }
  return r;
}

inline double tau_star(const SourceModel& src, int descriptions, double rstar) {
  if (!(rstar > 0.0)) throw Error("tau_star: target entropy must be positive");
  return std::exp2(src.dim * (descriptions * src.entropy - rstar));
}

/// Expansion factor defaults. The second member is false when no closed form is known
/// and the caller should warn that psi = 1 is a placeholder.
struct PsiDefault {
  double psi = 1.0;
  bool known = true;
};

inline PsiDefault default_psi(int dim, int descriptions) {
  if (descriptions <= 2) return {1.0, true};
  if (dim == 2) return {std::exp2(static_cast<double>(descriptions - 2) / (descriptions - 1)), true};
  return {1.0, false};
}

/// Inputs shared by the optimal-volume and optimal-index formulas.
struct DesignInputs {
  SourceModel source;
  int descriptions = 2;
  double rstar = 0.0;
  double psi = 1.0;
  double g_central = 1.0 / 12.0;
  double g_sphere = 1.0 / 12.0;
  ChannelModel channel;
};

/// The scalar objective in nu after the sum-rate constraint has eliminated the indices
/// (central and side terms only; the zero-reception term does not depend on nu).
inline double nu_objective(const DesignInputs& in, double nu) {
  const ChannelAggregates agg = aggregates(in.channel);
  const double l = in.source.dim;
  const double k1 = in.descriptions - 1;
  const double tau = tau_star(in.source, in.descriptions, in.rstar);
  return in.g_central * std::pow(nu, 2.0 / l) * agg.p_hat +
         std::pow(in.psi, 2.0 / l) * std::pow(nu, -2.0 / (l * k1)) * std::pow(tau, 2.0 / (l * k1)) * in.g_sphere *
             agg.beta_hat;
}

inline double optimal_nu(const DesignInputs& in) {
  if (in.descriptions < 2) throw Error("optimal_nu: need K >= 2");
  if (in.channel.descriptions() != in.descriptions) throw Error("optimal_nu: channel has the wrong number of descriptions");
  const ChannelAggregates agg = aggregates(in.channel);
  if (agg.beta_hat <= kMassFloor)
    throw DegenerateChannelError("lossless channel: no side-distortion tradeoff, side quantizers are unnecessary");
  if (agg.p_hat <= kMassFloor) throw DegenerateChannelError("channel never delivers a description");
  const double l = in.source.dim;
  const double k = in.descriptions;
  const double base = std::pow(in.psi, 2.0 / l) / (k - 1.0) * (in.g_sphere / in.g_central) * (agg.beta_hat / agg.p_hat);
  return std::exp2(l * (in.source.entropy - in.rstar / k)) * std::pow(base, l * (k - 1.0) / (2.0 * k));
}

/// Unsnapped optimal index values N_i = nu^{-1} 2^{L(h - a_i R*)} for a feasible rate split.
inline std::vector<double> optimal_indices(const DesignInputs& in, std::span<const double> split) {
  if (static_cast<int>(split.size()) != in.descriptions) throw Error("optimal_indices: need one rate fraction per description");
  double sum = 0.0;
  for (double a : split) sum += a;
  if (std::abs(sum - 1.0) > 1e-9) throw InfeasibleDesignError("rate fractions must sum to 1");
  const double nu = optimal_nu(in);
  const double rc = in.source.entropy - std::log2(nu) / in.source.dim;
  std::vector<double> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    const double ri = split[i] * in.rstar;
    // exact boundary a_i R* = R_c is feasible; allow rounding in the last few ulps
    if (!(ri > 0.0) || ri > rc * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "rate split infeasible for description " << i << ": need 0 < a_i R* <= R_c, got a_i R* = " << ri
          << ", R_c = " << rc;
      throw InfeasibleDesignError(msg.str());
    }
    out.push_back(std::max(1.0, std::exp2(in.source.dim * (in.source.entropy - ri)) / nu));
  }
  return out;
}

struct SnappedDesign {
  std::vector<std::int64_t> indices;
  double nu = 0.0;
};

/// Nearest admissible index in log2 domain, then nu = 2^{L(h - R*/K)} prod N_i^{-1/K}.
inline SnappedDesign snap_and_rescale(std::span<const double> indices, const SourceModel& src, int descriptions,
                                      double rstar, std::span<const std::int64_t> admissible) {
  if (admissible.empty()) throw Error("snap_and_rescale: empty admissible set");
  SnappedDesign out;
  double log_prod = 0.0;
  for (double n : indices) {
    const double target = std::log2(n);
    std::int64_t best = admissible.front();
    double best_gap = std::abs(std::log2(static_cast<double>(best)) - target);
    for (std::int64_t cand : admissible) {
      const double gap = std::abs(std::log2(static_cast<double>(cand)) - target);
      if (gap < best_gap) {
        best = cand;
        best_gap = gap;
      }
    }
    out.indices.push_back(best);
    log_prod += std::log2(static_cast<double>(best));
  }
  const double k = descriptions;
  out.nu = std::exp2(src.dim * (src.entropy - rstar / k) - log_prod / k);
  return out;
}

struct DistortionPrediction {
  double central = 0.0;  // G(Lambda_c) nu^{2/L} p_hat
  double zero = 0.0;     // E[||X||^2] prod p_i
  double side = 0.0;     // psi^{2/L} nu^{2/L} G(S_L) prod N^{2/(L(K-1))} beta_hat
  double total = 0.0;
};

struct PredictionInputs {
  SourceModel source;
  ChannelModel channel;
  double nu = 0.0;
  std::vector<double> indices;
  double psi = 1.0;
  double g_central = 1.0 / 12.0;
  double g_sphere = 1.0 / 12.0;
};

inline DistortionPrediction predict_distortion(const PredictionInputs& in) {
  const ChannelAggregates agg = aggregates(in.channel);
  const double l = in.source.dim;
  const int k = in.channel.descriptions();
  DistortionPrediction d;
  d.central = in.g_central * std::pow(in.nu, 2.0 / l) * agg.p_hat;
  d.zero = in.source.mean_power * in.channel.all_lost();
  if (k >= 2 && agg.beta_hat > 0.0) {
    double log_prod = 0.0;
    for (double n : in.indices) log_prod += std::log2(n);
    d.side = std::pow(in.psi, 2.0 / l) * std::pow(in.nu, 2.0 / l) * in.g_sphere *
             std::exp2(2.0 / (l * (k - 1)) * log_prod) * agg.beta_hat;
  }
  d.total = d.central + d.zero + d.side;
  return d;
}

/// Same prediction written through the central and side entropies.
inline DistortionPrediction predict_distortion_from_rates(const PredictionInputs& in, const Rates& r) {
  const ChannelAggregates agg = aggregates(in.channel);
  const double l = in.source.dim;
  const double h = in.source.entropy;
  const int k = in.channel.descriptions();
  DistortionPrediction d;
  d.central = in.g_central * std::exp2(2.0 * (h - r.central)) * agg.p_hat;
  d.zero = in.source.mean_power * in.channel.all_lost();
  if (k >= 2 && agg.beta_hat > 0.0) {
    const double avg = r.side_sum() / k;
    d.side = std::pow(in.psi, 2.0 / l) * agg.beta_hat * in.g_sphere * std::exp2(2.0 * (h - r.central)) *
             std::exp2(2.0 * k / (k - 1.0) * (r.central - avg));
  }
  d.total = d.central + d.zero + d.side;
  return d;
}

/// Complete design: optimal nu and indices, then snapped indices with rescaled nu.
struct DesignParams {
  double rstar = 0.0;
  std::vector<double> split;           // a_i
  double psi = 1.0;
  bool psi_known = true;
  double tau = 0.0;
  double nu_opt = 0.0;
  std::vector<double> indices_opt;
  std::vector<std::int64_t> indices_snapped;
  double nu_rescaled = 0.0;
  Rates rates_opt;                     // at (nu_opt, indices_opt)
  Rates rates_snapped;                 // at (nu_rescaled, indices_snapped)
  DistortionPrediction predicted;      // at the snapped design
};

inline std::vector<double> equal_split(int descriptions) {
  return std::vector<double>(static_cast<std::size_t>(descriptions), 1.0 / descriptions);
}

/// Admissible indices large enough to bracket every value in `indices` from above.
inline std::vector<std::int64_t> admissible_for_snapping(const Lattice& central, std::span<const double> indices) {
  double largest = 1.0;
  for (double n : indices) largest = std::max(largest, n);
  const auto max_index = static_cast<std::int64_t>(std::ceil(2.0 * largest)) + 8;
  std::vector<std::int64_t> out;
  for (const AdmissibleIndex& a : admissible_indices(central, max_index)) out.push_back(a.index);
  return out;
}

inline DesignParams design_quantizer(LatticeKind kind, const SourceModel& src, const ChannelModel& channel,
                                     double rstar, std::optional<std::vector<double>> split = std::nullopt,
                                     std::optional<double> psi = std::nullopt) {
  if (src.dim != dimension_of(kind)) throw DimensionError("design: source and lattice dimensions differ");
  const int k = channel.descriptions();
  const Lattice central(kind);
  DesignParams out;
  out.rstar = rstar;
  out.split = split.value_or(equal_split(k));
  const PsiDefault pd = default_psi(src.dim, k);
  out.psi = psi.value_or(pd.psi);
  out.psi_known = psi.has_value() || pd.known;
  out.tau = tau_star(src, k, rstar);

  DesignInputs in{src, k, rstar, out.psi, central.second_moment(), sphere_second_moment(src.dim), channel};
  if (k == 1) {
    out.nu_opt = std::exp2(src.dim * (src.entropy - rstar));
    out.indices_opt = {1.0};
    out.indices_snapped = {1};
    out.nu_rescaled = out.nu_opt;
  } else {
    out.nu_opt = optimal_nu(in);
    out.indices_opt = optimal_indices(in, out.split);
    const auto admissible = admissible_for_snapping(central, out.indices_opt);
    const SnappedDesign snapped = snap_and_rescale(out.indices_opt, src, k, rstar, admissible);
    out.indices_snapped = snapped.indices;
    out.nu_rescaled = snapped.nu;
  }
  out.rates_opt = rates(out.nu_opt, out.indices_opt, src);
  std::vector<double> snapped_real(out.indices_snapped.begin(), out.indices_snapped.end());
  out.rates_snapped = rates(out.nu_rescaled, snapped_real, src);
  for (std::size_t i = 0; i < out.rates_snapped.side.size(); ++i) {
    if (!(out.rates_snapped.side[i] > 0.0)) {
      std::ostringstream msg;
      msg << "snapped design infeasible for description " << i << ": R_i = " << out.rates_snapped.side[i]
          << " must be positive (R_c = " << out.rates_snapped.central << ")";
      throw InfeasibleDesignError(msg.str());
    }
  }
  out.predicted = predict_distortion({src, channel, out.nu_rescaled, snapped_real, out.psi, central.second_moment(),
                                      sphere_second_moment(src.dim)});
  return out;
}

}  // namespace mdlvq
