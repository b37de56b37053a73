#pragma once

// Brute-force labeling references: cells found by distance comparison, costs by subset
// enumeration and coset members by exhaustive shift search. Library types are used only
// to name points and to map own-basis coordinates.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mdlvq/labeling.hpp"
#include "oracles.hpp"

namespace oracle {

using mdlvq::Lattice;
using mdlvq::LatticePoint;
using mdlvq::LatticeSetup;
using mdlvq::Tuple;
using mdlvq::Vector;

inline Vec2 emb(const Lattice& central, const LatticePoint& p) {
  const Vector v = central.embed(p);
  return {v[0], v[1]};
}

// Index-assignment cost of labeling x with tuple t, by direct subset enumeration over kappa = 1..K-1.
inline double direct_cost(const Lattice& central, const std::vector<double>& loss, const LatticePoint& x, const Tuple& t) {
  std::vector<Vec2> ys;
  for (const LatticePoint& p : t) ys.push_back(emb(central, p));
  double total = 0.0;
  for (int kappa = 1; kappa < static_cast<int>(loss.size()); ++kappa)
    total += direct_subset_sum(loss, kappa, emb(central, x), ys, central.dim());
  return total;
}

// Cheapest coset member by trying every product-lattice shift in a window of own coordinates.
inline double direct_coset_cost(const LatticeSetup& s, const std::vector<double>& loss, const LatticePoint& x, const Tuple& t,
                         int window) {
  double best = INFINITY;
  const int bw = s.dim() == 2 ? window : 0;
  for (int a = -window; a <= window; ++a)
    for (int b = -bw; b <= bw; ++b) {
      const LatticePoint shift = s.product.from_own_coords(LatticePoint{{a, b}});
      best = std::min(best, direct_cost(s.central, loss, x, mdlvq::shift_tuple(t, shift)));
    }
  return best;
}

// Points of `fine` strictly closer to the origin than to any other point of `coarse`, by distance comparison.
inline std::vector<LatticePoint> brute_cell(const LatticeSetup& s, const Lattice& fine, int window) {
  std::vector<LatticePoint> coarse;
  const int bw = s.dim() == 2 ? 3 : 0;
  for (int a = -3; a <= 3; ++a)
    for (int b = -bw; b <= bw; ++b) coarse.push_back(s.product.from_own_coords(LatticePoint{{a, b}}));
  std::vector<LatticePoint> out;
  const int fw = s.dim() == 2 ? window : 0;
  for (int a = -window; a <= window; ++a)
    for (int b = -fw; b <= fw; ++b) {
      const LatticePoint p = fine.from_own_coords(LatticePoint{{a, b}});
      const double d0 = dist2(emb(s.central, p), {0.0, 0.0});
      bool inside = true;
      for (const LatticePoint& c : coarse)
        if (!c.is_zero() && dist2(emb(s.central, p), emb(s.central, c)) <= d0 + 1e-9) inside = false;
      if (inside) out.push_back(p);
    }
  return out;
}

// Cost matrix built without the library's candidate generator, coset search or cost model.
inline std::vector<std::vector<double>> independent_cost_matrix(const LatticeSetup& s, const std::vector<double>& loss,
                                                         double radius, int window) {
  const auto rows = brute_cell(s, s.central, window);
  const auto anchors = brute_cell(s, s.sides[0], window);
  std::vector<Tuple> cols;
  for (const LatticePoint& a0 : anchors) {
    std::vector<Tuple> partial{{a0}};
    for (int i = 1; i < s.K(); ++i) {
      std::vector<LatticePoint> ball;
      const int bw = s.dim() == 2 ? window : 0;
      for (int a = -window; a <= window; ++a)
        for (int b = -bw; b <= bw; ++b) {
          const LatticePoint p = s.sides[static_cast<std::size_t>(i)].from_own_coords(LatticePoint{{a, b}});
          if (std::sqrt(dist2(emb(s.central, p), emb(s.central, a0))) <= radius * (1.0 + 1e-12)) ball.push_back(p);
        }
      std::vector<Tuple> next;
      for (const Tuple& t : partial)
        for (const LatticePoint& p : ball) {
          Tuple u = t;
          u.push_back(p);
          next.push_back(u);
        }
      partial = next;
    }
    cols.insert(cols.end(), partial.begin(), partial.end());
  }
  std::vector<std::vector<double>> cost(rows.size(), std::vector<double>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) cost[r][c] = direct_coset_cost(s, loss, rows[r], cols[c], 3);
  return cost;
}

}  // namespace oracle
