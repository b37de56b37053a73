#pragma once

// Self-checks run by `mdlvq verify`: algebraic identities on random instances,
// the closed-form nu against a numeric minimizer, the pairwise-distance trend,
// and consistency checks on previously written CSV reports.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "mdlvq/config.hpp"
#include "mdlvq/hr_design.hpp"
#include "mdlvq/io.hpp"
#include "mdlvq/labeling.hpp"
#include "mdlvq/loss_model.hpp"

namespace mdlvq {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // largest observed error (or deviation) for the check
  std::string detail;
};

namespace detail {

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

inline ChannelModel random_channel(std::mt19937_64& rng, int k, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> p(static_cast<std::size_t>(k));
  for (double& v : p) v = u(rng);
  return ChannelModel(p);
}

}  // namespace detail

/// Sum over subsets of size kappa of p(l) * dnorm2(x - mean of the received points), evaluated directly.
inline double subset_sum_direct(const ChannelModel& channel, int kappa, const Vector& x, const std::vector<Vector>& tuple,
                                int dim) {
  double total = 0.0;
  for (SubsetMask l = 0; l <= channel.full_mask(); ++l) {
    if (std::popcount(l) != kappa) continue;
    Vector mean{};
    for (int i = 0; i < channel.descriptions(); ++i)
      if (l >> i & 1U) {
        mean[0] += tuple[static_cast<std::size_t>(i)][0] / kappa;
        mean[1] += tuple[static_cast<std::size_t>(i)][1] / kappa;
      }
    total += subset_prob(channel, l) * dnorm2(Vector{x[0] - mean[0], x[1] - mean[1]}, dim);
  }
  return total;
}

/// The same sum written as a weighted-centroid term plus the pairwise term.
/// `pairwise_scale` multiplies the pairwise term; anything but 1 should make the identity fail.
inline double subset_sum_expanded(const ChannelModel& channel, int kappa, const Vector& x,
                                  const std::vector<Vector>& tuple, int dim, double pairwise_scale = 1.0) {
  const SubsetWeights w = weights(channel, kappa);
  const int k = channel.descriptions();
  if (w.pL < kMassFloor) return 0.0;
  Vector centroid{};
  for (int i = 0; i < k; ++i) {
    centroid[0] += w.pLi[static_cast<std::size_t>(i)] * tuple[static_cast<std::size_t>(i)][0];
    centroid[1] += w.pLi[static_cast<std::size_t>(i)] * tuple[static_cast<std::size_t>(i)][1];
  }
  const double scale = 1.0 / (kappa * w.pL);
  double total = w.pL * dnorm2(Vector{x[0] - scale * centroid[0], x[1] - scale * centroid[1]}, dim);
  double pairwise = 0.0;
  for (int i = 0; i + 1 < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const Vector& a = tuple[static_cast<std::size_t>(i)];
      const Vector& b = tuple[static_cast<std::size_t>(j)];
      pairwise += w.association(i, j) * dnorm2(Vector{a[0] - b[0], a[1] - b[1]}, dim);
    }
  total += pairwise_scale * pairwise / (static_cast<double>(kappa) * kappa);
  return total;
}

/// Random K in 2..5, kappa in 1..K, 50 integer central points and integer tuples in [-20, 20]^L.
inline CheckResult check_subset_identity(int instances = 200, std::uint64_t seed = 7, double pairwise_scale = 1.0,
                                         double tolerance = 1e-9) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coord(-20, 20);
  CheckResult res{"subset-sum identity", true, 0.0, {}};
  for (int n = 0; n < instances; ++n) {
    const int k = std::uniform_int_distribution<int>(2, 5)(rng);
    const int kappa = std::uniform_int_distribution<int>(1, k)(rng);
    const int dim = std::uniform_int_distribution<int>(1, 2)(rng);
    const ChannelModel channel = detail::random_channel(rng, k, 0.01, 0.99);
    auto point = [&] {
      Vector v{};
      for (int d = 0; d < dim; ++d) v[static_cast<std::size_t>(d)] = coord(rng);
      return v;
    };
    double direct = 0.0;
    double expanded = 0.0;
    for (int c = 0; c < 50; ++c) {
      const Vector x = point();
      std::vector<Vector> tuple;
      for (int i = 0; i < k; ++i) tuple.push_back(point());
      direct += subset_sum_direct(channel, kappa, x, tuple, dim);
      expanded += subset_sum_expanded(channel, kappa, x, tuple, dim, pairwise_scale);
    }
    const double err = detail::relative_error(direct, expanded);
    res.worst = std::max(res.worst, err);
  }
  res.passed = res.worst <= tolerance;
  std::ostringstream o;
  o << instances << " instances, max relative error " << res.worst;
  res.detail = o.str();
  return res;
}

/// Subset probabilities summed over every kappa equal 1, and p_hat + prod p_i = 1.
inline CheckResult check_normalization(int channels = 1000, std::uint64_t seed = 11, double tolerance = 1e-12) {
  std::mt19937_64 rng(seed);
  CheckResult res{"probability normalization", true, 0.0, {}};
  for (int n = 0; n < channels; ++n) {
    const int k = std::uniform_int_distribution<int>(1, 10)(rng);
    const ChannelModel channel = detail::random_channel(rng, k);
    double sum = subset_prob(channel, 0);
    for (int kappa = 1; kappa <= k; ++kappa) sum += weights(channel, kappa).pL;
    const double complement = aggregates(channel).p_hat + channel.all_lost();
    res.worst = std::max({res.worst, std::abs(sum - 1.0), std::abs(complement - 1.0)});
  }
  res.passed = res.worst <= tolerance;
  std::ostringstream o;
  o << channels << " channels, max deviation " << res.worst;
  res.detail = o.str();
  return res;
}

/// Minimizer of the nu objective found numerically (Brent's method on log nu).
inline double numeric_optimal_nu(const DesignInputs& in, double lo = 1e-12, double hi = 1e6) {
  auto f = [&](double log_nu) { return nu_objective(in, std::exp(log_nu)); };
  std::uintmax_t iterations = 500;
  const auto [x, fx] = boost::math::tools::brent_find_minima(f, std::log(lo), std::log(hi),
                                                             std::numeric_limits<double>::digits, iterations);
  (void)fx;
  return std::exp(x);
}

inline CheckResult check_optimal_nu(int configurations = 100, std::uint64_t seed = 13, double tolerance = 1e-6) {
  std::mt19937_64 rng(seed);
  CheckResult res{"closed-form nu", true, 0.0, {}};
  std::uniform_real_distribution<double> loss(0.005, 0.3);
  std::uniform_real_distribution<double> variance(0.25, 4.0);
  for (int n = 0; n < configurations; ++n) {
    const int dim = std::uniform_int_distribution<int>(1, 2)(rng);
    const int k = std::uniform_int_distribution<int>(2, 4)(rng);
    std::vector<double> p(static_cast<std::size_t>(k));
    for (double& v : p) v = loss(rng);
    DesignInputs in;
    in.source = SourceModel::gaussian(variance(rng), dim);
    in.descriptions = k;
    in.rstar = std::uniform_real_distribution<double>(1.0 * k, 4.0 * k)(rng);
    in.psi = default_psi(dim, k).psi;
    in.g_central = dim == 1 ? Lattice(LatticeKind::Z1).second_moment() : Lattice(LatticeKind::Z2).second_moment();
    in.g_sphere = sphere_second_moment(dim);
    in.channel = ChannelModel(p);
    const double closed = optimal_nu(in);
    const double numeric = numeric_optimal_nu(in);
    res.worst = std::max(res.worst, detail::relative_error(closed, numeric));
  }
  res.passed = res.worst <= tolerance;
  std::ostringstream o;
  o << configurations << " configurations, max relative difference " << res.worst;
  res.detail = o.str();
  return res;
}

struct PairwiseTrendRow {
  std::int64_t index = 0;
  double measured = 0.0;   // mean dnorm2(alpha_0 - alpha_1) over the labeled cell
  double predicted = 0.0;  // psi^{2/L} nu^{2/L} G(S_L) prod N^{2/(L(K-1))}
  double ratio = 0.0;
};

/// K=2, Z2, nu=1, symmetric indices: measured vs asymptotic mean squared distance between the two descriptions.
inline std::vector<PairwiseTrendRow> pairwise_trend(const std::vector<std::int64_t>& indices,
                                                    const ChannelModel& channel = ChannelModel({0.05, 0.05})) {
  std::vector<PairwiseTrendRow> rows;
  for (std::int64_t n : indices) {
    const std::vector<std::int64_t> idx{n, n};
    const LatticeSetup setup = make_setup(LatticeKind::Z2, 1.0, idx);
    const IndexAssignment asg = assign(setup, channel, 1.0);
    double sum = 0.0;
    for (const Tuple& t : asg.table()) sum += setup.central.dnorm2_between(t[0], t[1]);
    PairwiseTrendRow row;
    row.index = n;
    row.measured = sum / static_cast<double>(asg.size());
    row.predicted = sphere_second_moment(2) * static_cast<double>(n) * static_cast<double>(n);
    row.ratio = row.measured / row.predicted;
    rows.push_back(row);
  }
  return rows;
}

inline CheckResult check_pairwise_trend(const std::vector<PairwiseTrendRow>& rows, double lo = 0.8, double hi = 1.25) {
  CheckResult res{"pairwise-distance trend", false, 0.0, {}};
  if (rows.empty()) return res;
  const double r = rows.back().ratio;
  res.worst = std::abs(r - 1.0);
  res.passed = r >= lo && r <= hi;
  std::ostringstream o;
  o << "ratio " << r << " at N=" << rows.back().index;
  res.detail = o.str();
  return res;
}

// ---- report re-validation ---------------------------------------------------

namespace detail {

inline double field(const std::map<std::string, std::string>& row, const std::string& key) {
  const auto it = row.find(key);
  if (it == row.end()) throw ConfigError("report: missing column '" + key + "'");
  return parse_double(it->second);
}

}  // namespace detail

/// Internal consistency of a CSV written by design, simulate or sweep.
inline CheckResult validate_report(const CsvReport& rep, double tolerance = 1e-9) {
  CheckResult res{"report consistency", true, 0.0, {}};
  auto fail = [&](const std::string& why) {
    res.passed = false;
    if (!res.detail.empty()) res.detail += "; ";
    res.detail += why;
  };
  for (const char* key : {"version", "command", "config_hash", "seed", "gaussian"})
    if (!rep.meta.contains(key)) fail(std::string("missing metadata '") + key + "'");
  const auto cmd = rep.meta.contains("command") ? rep.meta.at("command") : std::string();

  if (cmd == "simulate") {
    double freq = 0.0;
    double weighted = 0.0;
    double prob = 0.0;
    std::uint64_t count = 0;
    double total = std::nan("");
    double n = 0.0;
    for (const auto& row : rep.rows) {
      if (row.at("record") == "subset") {
        const double f = detail::field(row, "frequency");
        freq += f;
        prob += detail::field(row, "probability");
        count += static_cast<std::uint64_t>(detail::field(row, "count"));
        weighted += f * detail::field(row, "empirical");
      } else if (row.at("record") == "total") {
        total = detail::field(row, "empirical");
        n = detail::field(row, "count");
      }
    }
    if (std::isnan(total)) fail("no total row");
    res.worst = std::max({std::abs(freq - 1.0), std::abs(prob - 1.0), detail::relative_error(weighted, total)});
    if (static_cast<double>(count) != n) fail("subset counts do not add up to n");
  } else if (cmd == "sweep") {
    for (const auto& row : rep.rows) {
      const double sum =
          detail::field(row, "predicted_central") + detail::field(row, "predicted_zero") + detail::field(row, "predicted_side");
      res.worst = std::max(res.worst, detail::relative_error(sum, detail::field(row, "predicted_total")));
    }
    if (rep.rows.empty()) fail("sweep has no rows");
  } else if (cmd == "design") {
    std::map<std::string, double> q;
    double side = 0.0;
    double sum = 0.0;
    for (const auto& row : rep.rows) {
      const double v = detail::field(row, "value");
      if (row.at("quantity") == "R_i") side += v;
      if (row.at("quantity") == "R_sum") sum = v;
      q[row.at("quantity")] = v;
    }
    res.worst = detail::relative_error(side, sum);
    const double parts = q["predicted_central"] + q["predicted_zero"] + q["predicted_side"];
    res.worst = std::max(res.worst, detail::relative_error(parts, q["predicted_total"]));
  } else {
    fail("unknown command '" + cmd + "'");
  }
  if (res.worst > tolerance) fail("sums disagree by " + std::to_string(res.worst));
  if (res.passed) res.detail = std::to_string(rep.rows.size()) + " rows consistent";
  return res;
}

}  // namespace mdlvq
