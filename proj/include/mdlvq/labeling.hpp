#pragma once

// Shift-invariant index assignment between the central lattice and K sublattices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdlvq/assignment_solver.hpp"
#include "mdlvq/errors.hpp"
#include "mdlvq/lattice.hpp"
#include "mdlvq/loss_model.hpp"
#include "mdlvq/sublattice.hpp"

namespace mdlvq {

/// Central lattice, K side sublattices and their clean product lattice.
struct LatticeSetup {
  Lattice central;
  std::vector<Lattice> sides;
  Lattice product;

  int K() const { return static_cast<int>(sides.size()); }
  int dim() const { return central.dim(); }
  double nu() const { return central.cell_volume(); }
  std::int64_t product_index() const { return relative_index(central, product); }

  std::vector<std::int64_t> indices() const {
    std::vector<std::int64_t> out;
    for (const Lattice& side : sides) out.push_back(relative_index(central, side));
    return out;
  }
};

inline LatticeSetup make_setup(const Lattice& central, std::span<const SimilaritySpec> specs) {
  if (specs.empty()) throw Error("make_setup: need at least one description");
  std::vector<Lattice> sides;
  for (const SimilaritySpec& spec : specs) sides.push_back(similar_sublattice(central, spec));
  Lattice product = product_lattice(central, sides);
  return {central, std::move(sides), std::move(product)};
}

/// Setup with central cell volume nu and the first clean witness for each index.
inline LatticeSetup make_setup(LatticeKind kind, double nu, std::span<const std::int64_t> indices) {
  const Lattice central = Lattice::with_cell_volume(kind, nu);
  std::vector<SimilaritySpec> specs;
  for (std::int64_t n : indices) {
    if (n < 1) throw Error("make_setup: indices must be positive");
    specs.push_back(witness_for_index(central, n));
  }
  return make_setup(central, specs);
}

using Tuple = std::vector<LatticePoint>;

inline Tuple shift_tuple(const Tuple& t, const LatticePoint& shift) {
  Tuple out = t;
  for (LatticePoint& p : out) p = p + shift;
  return out;
}

/// Assignment cost weights derived from a channel, summed over kappa = 1..K-1.
/// kappa = K is decoded exactly through the inverse map and costs nothing.
struct CostModel {
  struct CentroidTerm {
    double weight = 0.0;         // p(L)
    std::vector<double> coeff;   // p(L_i) / (kappa p(L)); sums to one
  };

  int K = 0;
  std::vector<CentroidTerm> centroid_terms;
  std::vector<double> pairwise;  // K x K: sum_kappa (1/kappa^2)(p(L_i)p(L_j)/p(L) - p(L_{i,j}))

  static CostModel from_channel(const ChannelModel& channel) {
    CostModel model;
    model.K = channel.descriptions();
    model.pairwise.assign(static_cast<std::size_t>(model.K * model.K), 0.0);
    for (int kappa = 1; kappa < model.K; ++kappa) {
      const SubsetWeights w = weights(channel, kappa);
      if (w.pL < kMassFloor) continue;
      CentroidTerm term;
      term.weight = w.pL;
      for (int i = 0; i < model.K; ++i) term.coeff.push_back(w.pLi[static_cast<std::size_t>(i)] / (kappa * w.pL));
      model.centroid_terms.push_back(std::move(term));
      for (int i = 0; i < model.K; ++i)
        for (int j = 0; j < model.K; ++j)
          if (i != j) model.pairwise[static_cast<std::size_t>(i * model.K + j)] += w.association(i, j) / (kappa * kappa);
    }
    return model;
  }

  double pair_weight(int i, int j) const { return pairwise[static_cast<std::size_t>(i * K + j)]; }

  /// Weighted sum of pairwise squared distances of a tuple.
  double wspsd(const Lattice& central, const Tuple& t) const {
    double sum = 0.0;
    for (int i = 0; i + 1 < K; ++i)
      for (int j = i + 1; j < K; ++j)
        sum += pair_weight(i, j) * central.dnorm2_between(t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(j)]);
    return sum;
  }

  std::vector<Vector> centroids(const Lattice& central, const Tuple& t) const {
    std::vector<Vector> out;
    for (const CentroidTerm& term : centroid_terms) {
      Vector c{};
      for (int i = 0; i < K; ++i) {
        const Vector e = central.embed(t[static_cast<std::size_t>(i)]);
        c[0] += term.coeff[static_cast<std::size_t>(i)] * e[0];
        c[1] += term.coeff[static_cast<std::size_t>(i)] * e[1];
      }
      out.push_back(c);
    }
    return out;
  }

  /// Cost of labeling lambda_c with exactly the tuple t (no coset shift).
  double tuple_cost(const Lattice& central, const LatticePoint& lambda_c, const Tuple& t) const {
    const Vector x = central.embed(lambda_c);
    const auto cs = centroids(central, t);
    double cost = wspsd(central, t);
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const Vector d{x[0] - cs[k][0], x[1] - cs[k][1]};
      cost += centroid_terms[k].weight * dnorm2(d, central.dim());
    }
    return cost;
  }
};

struct TupleCandidate {
  Tuple points;
  double wspsd = 0.0;
  std::vector<Vector> centroids;  // one weighted centroid per CostModel term
};

/// Volume psi * nu * prod N_i^{1/(K-1)} of the tuple search region.
inline double tuple_region_volume(double nu, std::span<const std::int64_t> indices, double psi) {
  if (indices.size() < 2) throw Error("tuple_region_volume: need K >= 2 (K = 1 labels by identity)");
  if (!(psi >= 1.0)) throw Error("tuple_region_volume: psi must be >= 1");
  if (!(nu > 0.0)) throw Error("tuple_region_volume: nu must be positive");
  const double inv = 1.0 / static_cast<double>(indices.size() - 1);
  double volume = psi * nu;
  for (std::int64_t n : indices) {
    if (n < 1) throw Error("tuple_region_volume: indices must be >= 1");
    volume *= std::pow(static_cast<double>(n), inv);
  }
  return volume;
}

/// Radius of the L-ball with the given volume.
inline double ball_radius(int dim, double volume) {
  if (dim == 1) return volume / 2.0;
  if (dim == 2) return std::sqrt(volume / std::numbers::pi);
  throw DimensionError("ball_radius: unsupported dimension");
}

/// All K-tuples (lambda_0, lambda_1, ...) with lambda_i in the ball of the given radius around lambda_0.
inline std::vector<TupleCandidate> build_candidates(const LatticeSetup& setup, const CostModel& model,
                                                    const LatticePoint& lambda_0, double radius) {
  const int k = setup.K();
  std::vector<std::vector<LatticePoint>> choices;
  for (int i = 1; i < k; ++i) choices.push_back(setup.sides[static_cast<std::size_t>(i)].points_in_ball(lambda_0, radius));
  std::vector<TupleCandidate> out;
  for (const auto& c : choices)
    if (c.empty()) return out;
  std::vector<std::size_t> digit(choices.size(), 0);
  while (true) {
    TupleCandidate cand;
    cand.points.push_back(lambda_0);
    for (std::size_t i = 0; i < choices.size(); ++i) cand.points.push_back(choices[i][digit[i]]);
    cand.wspsd = model.wspsd(setup.central, cand.points);
    cand.centroids = model.centroids(setup.central, cand.points);
    out.push_back(std::move(cand));
    std::size_t pos = choices.size();
    while (pos > 0) {
      --pos;
      if (++digit[pos] < choices[pos].size()) break;
      digit[pos] = 0;
      if (pos == 0) return out;
    }
    if (choices.empty()) return out;
  }
}

struct CosetMatch {
  double cost = 0.0;
  LatticePoint shift;  // lambda_pi added to every element of the candidate
};

/// Cheapest member of the candidate's coset for lambda_c. The cost is an isotropic
/// quadratic in the shift, so the best shift is the product-lattice point nearest
/// to the weighted centroid defect.
inline CosetMatch best_coset_member(const LatticeSetup& setup, const CostModel& model, const LatticePoint& lambda_c,
                                    const TupleCandidate& cand) {
  const int dim = setup.dim();
  const Vector x = setup.central.embed(lambda_c);
  Vector defect{};
  double total_weight = 0.0;
  for (std::size_t k = 0; k < cand.centroids.size(); ++k) {
    const double w = model.centroid_terms[k].weight;
    defect[0] += w * (x[0] - cand.centroids[k][0]);
    defect[1] += w * (x[1] - cand.centroids[k][1]);
    total_weight += w;
  }
  if (total_weight > 0.0) {
    defect[0] /= total_weight;
    defect[1] /= total_weight;
  } else {
    const Vector anchor = setup.central.embed(cand.points.front());
    defect = {x[0] - anchor[0], x[1] - anchor[1]};
  }
  CosetMatch match;
  match.shift = setup.product.nearest_point(std::span<const double>(defect.data(), static_cast<std::size_t>(dim)));
  const Vector s = setup.central.embed(match.shift);
  match.cost = cand.wspsd;
  for (std::size_t k = 0; k < cand.centroids.size(); ++k) {
    const Vector d{x[0] - cand.centroids[k][0] - s[0], x[1] - cand.centroids[k][1] - s[1]};
    match.cost += model.centroid_terms[k].weight * dnorm2(d, dim);
  }
  return match;
}

inline double pair_cost(const LatticeSetup& setup, const CostModel& model, const LatticePoint& lambda_c,
                        const TupleCandidate& cand) {
  return best_coset_member(setup, model, lambda_c, cand).cost;
}

namespace detail {

struct PointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept {
    const auto a = static_cast<std::uint64_t>(p.coords[0]);
    const auto b = static_cast<std::uint64_t>(p.coords[1]);
    return static_cast<std::size_t>(a * 0x9E3779B97F4A7C15ULL ^ (b + 0x632BE59BD9B4E019ULL + (a << 6) + (a >> 2)));
  }
};

struct TupleHash {
  std::size_t operator()(const Tuple& t) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (const LatticePoint& p : t) h = (h ^ PointHash{}(p)) * 0x100000001b3ULL;
    return h;
  }
};

}  // namespace detail

/// The labeling function restricted to Lambda_c within V_pi(0), extended by shift invariance.
class IndexAssignment {
 public:
  IndexAssignment(LatticeSetup setup, double psi, std::optional<ChannelModel> channel, std::vector<LatticePoint> rows,
                  std::vector<Tuple> table, double total_cost)
      : setup_(std::move(setup)),
        psi_(psi),
        channel_(std::move(channel)),
        rows_(std::move(rows)),
        table_(std::move(table)),
        total_cost_(total_cost) {
    if (rows_.size() != table_.size()) throw Error("IndexAssignment: row and table sizes differ");
    if (static_cast<std::int64_t>(rows_.size()) != setup_.product_index())
      throw Error("IndexAssignment: expected " + std::to_string(setup_.product_index()) + " rows, got " +
                  std::to_string(rows_.size()));
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const LatticePoint& lc = rows_[r];
      const ExactNearest home = setup_.product.nearest_exact(lc);
      if (!home.origin_among_nearest || home.ties != 1)
        throw Error("IndexAssignment: central point outside V_pi(0)");
      if (!row_index_.emplace(lc, r).second) throw Error("IndexAssignment: duplicate central point");
      const Tuple& t = table_[r];
      if (static_cast<int>(t.size()) != setup_.K()) throw Error("IndexAssignment: tuple has the wrong length");
      for (int i = 0; i < setup_.K(); ++i)
        if (!setup_.sides[static_cast<std::size_t>(i)].contains(t[static_cast<std::size_t>(i)]))
          throw Error("IndexAssignment: tuple element not in its sublattice");
      if (!coset_index_.emplace(canonical(t), r).second)
        throw Error("IndexAssignment: two central points share a tuple coset");
    }
  }

  const LatticeSetup& setup() const { return setup_; }
  double psi() const { return psi_; }
  const std::optional<ChannelModel>& channel() const { return channel_; }
  const std::vector<LatticePoint>& central_points() const { return rows_; }
  const std::vector<Tuple>& table() const { return table_; }
  double total_cost() const { return total_cost_; }
  int K() const { return setup_.K(); }
  int dim() const { return setup_.dim(); }
  std::int64_t size() const { return static_cast<std::int64_t>(rows_.size()); }

  Tuple alpha(const LatticePoint& lambda_c) const {
    const LatticePoint pi = setup_.product.nearest_exact(lambda_c).point;
    const auto it = row_index_.find(lambda_c - pi);
    if (it == row_index_.end()) throw LookupError("alpha: point is not in the central lattice");
    return shift_tuple(table_[it->second], pi);
  }

  LatticePoint alpha_inverse(const Tuple& t) const {
    if (static_cast<int>(t.size()) != K()) throw LookupError("alpha_inverse: tuple has the wrong length");
    const LatticePoint pi = setup_.product.nearest_exact(t.front()).point;
    const auto it = coset_index_.find(shift_tuple(t, -pi));
    if (it == coset_index_.end()) throw LookupError("alpha_inverse: tuple is not in the image of alpha");
    const std::size_t r = it->second;
    // the stored row satisfies table_[r] = canonical + pi_r
    const LatticePoint pi_r = setup_.product.nearest_exact(table_[r].front()).point;
    return rows_[r] - pi_r + pi;
  }

  /// (1/N_pi) sum over V_pi(0) of dnorm2(lambda_c - mean of the received tuple elements).
  /// The full set decodes exactly and returns 0.
  double side_distortion(SubsetMask subset) const {
    const SubsetMask full = (SubsetMask{1} << K()) - 1;
    if (subset == 0) throw Error("side_distortion: empty subset");
    if ((subset & ~full) != 0) throw Error("side_distortion: subset refers to a description index >= K");
    if (subset == full) return 0.0;
    const int count = std::popcount(subset);
    double sum = 0.0;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const Vector x = setup_.central.embed(rows_[r]);
      Vector mean{};
      for (int j = 0; j < K(); ++j) {
        if (!(subset >> j & 1U)) continue;
        const Vector e = setup_.central.embed(table_[r][static_cast<std::size_t>(j)]);
        mean[0] += e[0];
        mean[1] += e[1];
      }
      const Vector d{x[0] - mean[0] / count, x[1] - mean[1] / count};
      sum += dnorm2(d, dim());
    }
    return sum / static_cast<double>(rows_.size());
  }

 private:
  Tuple canonical(const Tuple& t) const { return shift_tuple(t, -setup_.product.nearest_exact(t.front()).point); }

  LatticeSetup setup_;
  double psi_;
  std::optional<ChannelModel> channel_;
  std::vector<LatticePoint> rows_;
  std::vector<Tuple> table_;
  double total_cost_;
  std::unordered_map<LatticePoint, std::size_t, detail::PointHash> row_index_;
  std::unordered_map<Tuple, std::size_t, detail::TupleHash> coset_index_;
};

struct AssignOptions {
  std::int64_t cap = 10000;     // largest N_pi solved densely
  double volume_factor = 2.0;   // search region relative to the counting bound
  int max_doublings = 2;
};

/// Optimal shift-invariant labeling for the given channel.
inline IndexAssignment assign(const LatticeSetup& setup, const ChannelModel& channel, double psi,
                              const AssignOptions& options = {}) {
  const int k = setup.K();
  if (channel.descriptions() != k) throw Error("assign: channel and setup disagree on K");
  const std::int64_t n_pi = setup.product_index();
  if (n_pi > options.cap)
    throw CapacityError("assign: N_pi = " + std::to_string(n_pi) + " exceeds the cap of " + std::to_string(options.cap));

  std::vector<LatticePoint> rows = enumerate_in_cell(setup.central, setup.product);
  if (k == 1) {
    if (n_pi != 1) throw Error("assign: a single description must have index 1");
    std::vector<Tuple> table;
    for (const LatticePoint& p : rows) table.push_back({p});
    return IndexAssignment(setup, psi, channel, std::move(rows), std::move(table), 0.0);
  }

  const CostModel model = CostModel::from_channel(channel);
  const std::vector<std::int64_t> indices = setup.indices();
  const std::vector<LatticePoint> anchors = enumerate_in_cell(setup.sides.front(), setup.product);
  const auto needed = static_cast<std::size_t>(indices.front());

  double volume = options.volume_factor * tuple_region_volume(setup.nu(), indices, psi);
  std::vector<TupleCandidate> columns;
  bool enough = false;
  for (int attempt = 0; attempt <= options.max_doublings && !enough; ++attempt, volume *= 2.0) {
    columns.clear();
    enough = true;
    const double radius = ball_radius(setup.dim(), volume);
    for (const LatticePoint& anchor : anchors) {
      auto cands = build_candidates(setup, model, anchor, radius);
      if (cands.size() < needed) {
        enough = false;
        break;
      }
      for (auto& c : cands) columns.push_back(std::move(c));
    }
  }
  if (!enough || columns.size() < rows.size())
    throw Error("assign: not enough K-tuples after enlarging the search region");
  std::sort(columns.begin(), columns.end(),
            [](const TupleCandidate& x, const TupleCandidate& y) { return x.points < y.points; });

  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = columns.size();
  std::vector<double> cost(n_rows * n_cols);
  for (std::size_t r = 0; r < n_rows; ++r)
    for (std::size_t c = 0; c < n_cols; ++c) cost[r * n_cols + c] = pair_cost(setup, model, rows[r], columns[c]);

  const AssignmentResult solved = solve_assignment(cost, n_rows, n_cols);
  std::vector<Tuple> table;
  table.reserve(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const TupleCandidate& cand = columns[solved.row_to_col[r]];
    table.push_back(shift_tuple(cand.points, best_coset_member(setup, model, rows[r], cand).shift));
  }
  return IndexAssignment(setup, psi, channel, std::move(rows), std::move(table), solved.total_cost);
}

}  // namespace mdlvq
