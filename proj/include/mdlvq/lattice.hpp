#pragma once

// Lattice geometry for Z^1, Z^2 and the hexagonal lattice A2.
//
// Every lattice handled here is an ideal g*R of one of three rings R: the
// integers (Z^1), the Gaussian integers (Z^2, basis 1, i) or the Eisenstein
// integers (A2, basis 1, w with w = e^{i pi/3}), scaled by a real factor.
// Points are stored by their integer coordinates in the basis of R, so
// membership, distances and Voronoi ties are decided in exact integer
// arithmetic.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mdlvq/errors.hpp"

namespace mdlvq {

enum class LatticeKind { Z1, Z2, A2 };

inline int dimension_of(LatticeKind kind) { return kind == LatticeKind::Z1 ? 1 : 2; }

inline std::string_view name_of(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::Z1:
      return "Z1";
    case LatticeKind::Z2:
      return "Z2";
    case LatticeKind::A2:
      return "A2";
  }
  return "?";
}

inline LatticeKind parse_lattice_kind(std::string_view name) {
  if (name == "Z1" || name == "Z") return LatticeKind::Z1;
  if (name == "Z2") return LatticeKind::Z2;
  if (name == "A2") return LatticeKind::A2;
  throw ConfigError("unknown lattice '" + std::string(name) + "' (expected Z1, Z2 or A2)");
}

/// Real vector of dimension 1 or 2; the unused trailing entry stays zero.
using Vector = std::array<double, 2>;

/// Integer coordinates in the central-lattice basis.
struct LatticePoint {
  std::array<std::int64_t, 2> coords{};

  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;

  friend LatticePoint operator+(const LatticePoint& x, const LatticePoint& y) {
    return {{x.coords[0] + y.coords[0], x.coords[1] + y.coords[1]}};
  }
  friend LatticePoint operator-(const LatticePoint& x, const LatticePoint& y) {
    return {{x.coords[0] - y.coords[0], x.coords[1] - y.coords[1]}};
  }
  friend LatticePoint operator-(const LatticePoint& x) { return {{-x.coords[0], -x.coords[1]}}; }

  bool is_zero() const { return coords[0] == 0 && coords[1] == 0; }
};

inline constexpr LatticePoint kOrigin{};
inline constexpr LatticePoint kUnit{{1, 0}};

/// Dimension-normalized squared norm (1/L) x^T x. Every distortion uses this.
inline double dnorm2(std::span<const double> x) {
  if (x.empty()) throw DimensionError("dnorm2: empty vector");
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return sum / static_cast<double>(x.size());
}

inline double dnorm2(std::span<const double> x, int dim) {
  if (static_cast<int>(x.size()) != dim)
    throw DimensionError("dnorm2: vector has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(dim));
  return dnorm2(x);
}

inline double dnorm2(const Vector& x, int dim) {
  if (dim != 1 && dim != 2) throw DimensionError("dnorm2: unsupported dimension");
  return dnorm2(std::span<const double>(x.data(), static_cast<std::size_t>(dim)));
}

namespace ring {

inline LatticePoint multiply(LatticeKind kind, const LatticePoint& x, const LatticePoint& y) {
  const auto [a, b] = x.coords;
  const auto [c, d] = y.coords;
  switch (kind) {
    case LatticeKind::Z1:
      return {{a * c, 0}};
    case LatticeKind::Z2:
      return {{a * c - b * d, a * d + b * c}};
    case LatticeKind::A2:  // w^2 = w - 1
      return {{a * c - b * d, a * d + b * c + b * d}};
  }
  return {};
}

inline LatticePoint conjugate(LatticeKind kind, const LatticePoint& x) {
  const auto [a, b] = x.coords;
  switch (kind) {
    case LatticeKind::Z1:
      return x;
    case LatticeKind::Z2:
      return {{a, -b}};
    case LatticeKind::A2:  // conj(w) = 1 - w
      return {{a + b, -b}};
  }
  return {};
}

/// Squared Euclidean length of the unscaled embedding; an integer for all three rings.
inline __int128 norm(LatticeKind kind, const LatticePoint& x) {
  const __int128 a = x.coords[0];
  const __int128 b = x.coords[1];
  switch (kind) {
    case LatticeKind::Z1:
      return a * a;
    case LatticeKind::Z2:
      return a * a + b * b;
    case LatticeKind::A2:
      return a * a + a * b + b * b;
  }
  return 0;
}

inline std::complex<double> to_complex(LatticeKind kind, const LatticePoint& x) {
  const double a = static_cast<double>(x.coords[0]);
  const double b = static_cast<double>(x.coords[1]);
  if (kind == LatticeKind::A2) return {a + 0.5 * b, 0.5 * std::numbers::sqrt3 * b};
  return {a, b};
}

inline std::int64_t floor_div(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  return q;
}

/// z / g when g divides z in the ring.
inline std::optional<LatticePoint> divide(LatticeKind kind, const LatticePoint& z, const LatticePoint& g) {
  const auto n = static_cast<std::int64_t>(norm(kind, g));
  if (n == 0) throw Error("ring::divide: division by zero");
  const LatticePoint q = multiply(kind, z, conjugate(kind, g));
  if (q.coords[0] % n != 0 || q.coords[1] % n != 0) return std::nullopt;
  return LatticePoint{{q.coords[0] / n, q.coords[1] / n}};
}

/// Nearest point of the unscaled root lattice to a real vector in embedding coordinates.
/// Z^L rounds half away from zero per coordinate; A2 takes the nearer of its two
/// rectangular cosets and prefers the lexicographically smaller coordinates on a tie.
inline LatticePoint nearest_root(LatticeKind kind, const Vector& w) {
  switch (kind) {
    case LatticeKind::Z1:
      return {{std::llround(w[0]), 0}};
    case LatticeKind::Z2:
      return {{std::llround(w[0]), std::llround(w[1])}};
    case LatticeKind::A2: {
      constexpr double s3 = std::numbers::sqrt3;
      const double y = w[1] / s3;
      const std::int64_t a1 = std::llround(w[0]);
      const std::int64_t b1 = std::llround(y);
      const double dx1 = w[0] - static_cast<double>(a1);
      const double dy1 = w[1] - static_cast<double>(b1) * s3;
      const LatticePoint p1{{a1 - b1, 2 * b1}};
      const std::int64_t a2 = std::llround(w[0] - 0.5);
      const std::int64_t b2 = std::llround(y - 0.5);
      const double dx2 = w[0] - (static_cast<double>(a2) + 0.5);
      const double dy2 = w[1] - (static_cast<double>(b2) + 0.5) * s3;
      const LatticePoint p2{{a2 - b2, 2 * b2 + 1}};
      const double d1 = dx1 * dx1 + dy1 * dy1;
      const double d2 = dx2 * dx2 + dy2 * dy2;
      LatticePoint best = d1 <= d2 ? p1 : p2;
      // ties are only possible with a neighbour of the winner; resolve them lexicographically
      auto dist = [&](const LatticePoint& p) {
        const double px = static_cast<double>(p.coords[0]) + 0.5 * static_cast<double>(p.coords[1]);
        const double py = 0.5 * s3 * static_cast<double>(p.coords[1]);
        return (w[0] - px) * (w[0] - px) + (w[1] - py) * (w[1] - py);
      };
      const LatticePoint center = best;
      double best_d = dist(best);
      constexpr std::array<std::array<std::int64_t, 2>, 6> kNeighbours{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}}};
      for (const auto& n : kNeighbours) {
        const LatticePoint q{{center.coords[0] + n[0], center.coords[1] + n[1]}};
        const double d = dist(q);
        if (d < best_d || (d == best_d && q < best)) {
          best = q;
          best_d = d;
        }
      }
      return best;
    }
  }
  return {};
}

inline double unit_cell_volume(LatticeKind kind) {
  return kind == LatticeKind::A2 ? 0.5 * std::numbers::sqrt3 : 1.0;
}

inline double unit_covering_radius(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::Z1:
      return 0.5;
    case LatticeKind::Z2:
      return 0.5 * std::numbers::sqrt2;
    case LatticeKind::A2:
      return 1.0 / std::numbers::sqrt3;
  }
  return 1.0;
}

}  // namespace ring

/// Result of an exact nearest-point query for a point of the root lattice.
struct ExactNearest {
  LatticePoint point;            // minimizer with the lexicographically smallest own-basis coords
  int ties = 1;                  // number of equidistant minimizers
  bool origin_among_nearest = false;
};

/// A scaled ideal g*R: the central lattice when g = 1, a similar sublattice otherwise.
class Lattice {
 public:
  explicit Lattice(LatticeKind kind, double scale = 1.0, LatticePoint generator = kUnit)
      : kind_(kind), scale_(scale), generator_(generator) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw Error("Lattice: scale must be positive and finite");
    if (ring::norm(kind, generator) == 0) throw Error("Lattice: zero generator");
    if (kind == LatticeKind::Z1 && generator.coords[1] != 0) throw Error("Lattice: Z1 generator must be real");
  }

  /// Central lattice of the given family, scaled so that one cell has volume nu.
  static Lattice with_cell_volume(LatticeKind kind, double nu) {
    if (!(nu > 0.0)) throw Error("Lattice: cell volume must be positive");
    const int dim = dimension_of(kind);
    return Lattice(kind, std::pow(nu / ring::unit_cell_volume(kind), 1.0 / dim));
  }

  LatticeKind kind() const { return kind_; }
  int dim() const { return dimension_of(kind_); }
  std::string_view name() const { return name_of(kind_); }
  double scale() const { return scale_; }
  const LatticePoint& generator() const { return generator_; }

  /// Index relative to the unscaled root lattice: |g|^L.
  std::int64_t index() const {
    const auto n = static_cast<std::int64_t>(ring::norm(kind_, generator_));
    if (kind_ == LatticeKind::Z1) return std::llabs(generator_.coords[0]);
    return n;
  }

  double cell_volume() const {
    return static_cast<double>(index()) * ring::unit_cell_volume(kind_) * std::pow(scale_, dim());
  }

  /// Normalized second moment G; a property of the lattice family, invariant under similarity.
  double second_moment() const {
    if (kind_ == LatticeKind::A2) return 5.0 / (36.0 * std::numbers::sqrt3);
    return 1.0 / 12.0;
  }

  double covering_radius() const {
    return ring::unit_covering_radius(kind_) * scale_ * std::sqrt(static_cast<double>(ring::norm(kind_, generator_)));
  }

  /// Generator rows of the embedded basis (one row for Z1).
  std::vector<Vector> basis() const {
    std::vector<Vector> rows{embed(generator_)};
    if (dim() == 2) rows.push_back(embed(ring::multiply(kind_, generator_, LatticePoint{{0, 1}})));
    return rows;
  }

  Vector embed(const LatticePoint& p) const {
    const auto z = ring::to_complex(kind_, p) * scale_;
    return {z.real(), z.imag()};
  }

  bool contains(const LatticePoint& p) const { return ring::divide(kind_, p, generator_).has_value(); }

  /// Coordinates of p in this lattice's own basis {g, g*e2}.
  LatticePoint own_coords(const LatticePoint& p) const {
    auto k = ring::divide(kind_, p, generator_);
    if (!k) throw Error("own_coords: point is not in the lattice");
    return *k;
  }

  LatticePoint from_own_coords(const LatticePoint& k) const { return ring::multiply(kind_, generator_, k); }

  /// Exact dnorm2 between two root-lattice points after scaling.
  double dnorm2_between(const LatticePoint& p, const LatticePoint& q) const {
    return static_cast<double>(ring::norm(kind_, p - q)) * scale_ * scale_ / dim();
  }

  LatticePoint nearest_point(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim())
      throw DimensionError("nearest_point: vector has length " + std::to_string(x.size()) + ", expected " +
                           std::to_string(dim()));
    Vector w{x[0] / scale_, dim() == 2 ? x[1] / scale_ : 0.0};
    if (generator_ == kUnit) return ring::nearest_root(kind_, w);
    const auto z = std::complex<double>(w[0], w[1]) / ring::to_complex(kind_, generator_);
    const LatticePoint k = ring::nearest_root(kind_, {z.real(), kind_ == LatticeKind::Z1 ? 0.0 : z.imag()});
    return ring::multiply(kind_, generator_, k);
  }

  LatticePoint nearest_point(const Vector& x) const {
    return nearest_point(std::span<const double>(x.data(), static_cast<std::size_t>(dim())));
  }

  /// Exact nearest point of this lattice to a root-lattice point p, with tie count.
  ExactNearest nearest_exact(const LatticePoint& p) const {
    const auto qg = static_cast<std::int64_t>(ring::norm(kind_, generator_));
    const LatticePoint q = ring::multiply(kind_, p, ring::conjugate(kind_, generator_));
    const std::int64_t fa = ring::floor_div(q.coords[0], qg);
    const std::int64_t fb = ring::floor_div(q.coords[1], qg);
    const std::int64_t b_lo = dim() == 2 ? fb - 1 : 0;
    const std::int64_t b_hi = dim() == 2 ? fb + 2 : 0;
    ExactNearest best;
    __int128 best_metric = -1;
    for (std::int64_t a = fa - 1; a <= fa + 2; ++a) {
      for (std::int64_t b = b_lo; b <= b_hi; ++b) {
        const LatticePoint k{{a, b}};
        const LatticePoint diff{{q.coords[0] - qg * a, q.coords[1] - qg * b}};
        const __int128 metric = ring::norm(kind_, diff);
        if (best_metric < 0 || metric < best_metric) {
          best_metric = metric;
          best.point = k;
          best.ties = 1;
        } else if (metric == best_metric) {
          ++best.ties;
        }
      }
    }
    best.origin_among_nearest = ring::norm(kind_, q) == best_metric;
    best.point = ring::multiply(kind_, generator_, best.point);
    return best;
  }

  /// Points of this lattice within Euclidean distance radius of a root-lattice point, in lexicographic order.
  std::vector<LatticePoint> points_in_ball(const LatticePoint& center, double radius) const {
    std::vector<LatticePoint> out;
    if (radius < 0.0) return out;
    const double unit_radius = radius / scale_;
    const double limit = unit_radius * unit_radius * (1.0 + 1e-12);
    const auto c = ring::to_complex(kind_, center) / ring::to_complex(kind_, generator_);
    // ring coordinates of the real center
    double cu = c.real();
    double cv = 0.0;
    if (kind_ == LatticeKind::Z2) cv = c.imag();
    if (kind_ == LatticeKind::A2) {
      cv = 2.0 * c.imag() / std::numbers::sqrt3;
      cu = c.real() - 0.5 * cv;
    }
    const double gabs = std::sqrt(static_cast<double>(ring::norm(kind_, generator_)));
    const auto span = static_cast<std::int64_t>(std::ceil(2.0 * unit_radius / gabs)) + 1;
    const auto u0 = static_cast<std::int64_t>(std::floor(cu));
    const auto v0 = static_cast<std::int64_t>(std::floor(cv));
    const std::int64_t v_span = dim() == 2 ? span : 0;
    for (std::int64_t u = u0 - span; u <= u0 + span + 1; ++u) {
      for (std::int64_t v = v0 - v_span; v <= v0 + (dim() == 2 ? v_span + 1 : 0); ++v) {
        const LatticePoint p = ring::multiply(kind_, generator_, LatticePoint{{u, v}});
        if (static_cast<double>(ring::norm(kind_, p - center)) <= limit) out.push_back(p);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  friend bool operator==(const Lattice& x, const Lattice& y) {
    return x.kind_ == y.kind_ && x.scale_ == y.scale_ && x.generator_ == y.generator_;
  }

 private:
  LatticeKind kind_;
  double scale_;
  LatticePoint generator_;
};

namespace detail {

template <class F>
void for_each_in_box(int dim, std::int64_t bound, F&& f) {
  const std::int64_t b_bound = dim == 2 ? bound : 0;
  for (std::int64_t a = -bound; a <= bound; ++a)
    for (std::int64_t b = -b_bound; b <= b_bound; ++b) f(LatticePoint{{a, b}});
}

/// Box half-width (in ring coordinates) covering V(0) of the ideal hR, inflated by one covering radius.
inline std::int64_t cell_box_bound(LatticeKind kind, const LatticePoint& h) {
  const double rho = ring::unit_covering_radius(kind) * std::sqrt(static_cast<double>(ring::norm(kind, h)));
  return static_cast<std::int64_t>(std::ceil(2.0 * rho)) + 1;
}

inline LatticePoint relative_generator(const Lattice& fine, const Lattice& coarse) {
  if (fine.kind() != coarse.kind() || fine.scale() != coarse.scale())
    throw Error("lattices belong to different families or scales");
  auto h = ring::divide(fine.kind(), coarse.generator(), fine.generator());
  if (!h) throw Error("coarse lattice is not a sublattice of the fine lattice");
  return *h;
}

}  // namespace detail

/// Points of `fine` whose nearest `coarse` point is the origin, in lexicographic order.
/// Throws NonCleanError if one of them is equidistant to the origin and another coarse point.
inline std::vector<LatticePoint> enumerate_in_cell(const Lattice& fine, const Lattice& coarse) {
  const LatticeKind kind = fine.kind();
  const LatticePoint h = detail::relative_generator(fine, coarse);
  const Lattice relative(kind, 1.0, h);
  std::vector<LatticePoint> out;
  detail::for_each_in_box(fine.dim(), detail::cell_box_bound(kind, h), [&](const LatticePoint& k) {
    const ExactNearest nearest = relative.nearest_exact(k);
    if (!nearest.origin_among_nearest) return;
    if (nearest.ties > 1) throw NonCleanError("enumerate_in_cell: point lies on a Voronoi boundary of the coarse lattice");
    out.push_back(ring::multiply(kind, fine.generator(), k));
  });
  std::sort(out.begin(), out.end());
  return out;
}

/// G(S_L) = Gamma(L/2+1)^{2/L} / ((L+2) pi).
inline double sphere_second_moment(int dim) {
  if (dim != 1 && dim != 2) throw DimensionError("sphere_second_moment: only L = 1 and L = 2 are supported");
  const double l = dim;
  return std::pow(std::tgamma(l / 2.0 + 1.0), 2.0 / l) / ((l + 2.0) * std::numbers::pi);
}

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo estimate of G: uniform points in a fundamental cell are folded into V(0).
inline MonteCarloEstimate second_moment_mc(const Lattice& lattice, std::size_t samples, std::uint64_t seed) {
  if (samples < 10000) throw Error("second_moment_mc: at least 10^4 samples required");
  std::mt19937_64 engine(seed);
  const auto basis = lattice.basis();
  const int dim = lattice.dim();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    Vector x{};
    for (int r = 0; r < dim; ++r) {
      const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
      x[0] += u * basis[r][0];
      x[1] += u * basis[r][1];
    }
    const Vector c = lattice.embed(lattice.nearest_point(x));
    const Vector e{x[0] - c[0], x[1] - c[1]};
    const double d = dnorm2(e, dim);
    sum += d;
    sum_sq += d * d;
  }
  const double count = static_cast<double>(samples);
  const double mean = sum / count;
  const double var = std::max(0.0, sum_sq / count - mean * mean);
  const double norm = std::pow(lattice.cell_volume(), 2.0 / dim);
  return {mean / norm, std::sqrt(var / count) / norm};
}

}  // namespace mdlvq
