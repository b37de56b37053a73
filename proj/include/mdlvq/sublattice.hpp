#pragma once

// Similar, clean sublattices of the central lattice and their product lattice.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "mdlvq/errors.hpp"
#include "mdlvq/lattice.hpp"

namespace mdlvq {

/// Algebraic integer a + b*e2 (e2 = i for Z2, e^{i pi/3} for A2, unused for Z1)
/// acting on the parent lattice by multiplication: a rotation plus a scaling.
struct SimilaritySpec {
  std::int64_t a = 1;
  std::int64_t b = 0;

  friend auto operator<=>(const SimilaritySpec&, const SimilaritySpec&) = default;

  LatticePoint as_point() const { return {{a, b}}; }
};

/// Index of the sublattice produced by `spec`: |a| for Z1, a^2+b^2 for Z2, a^2+ab+b^2 for A2.
inline std::int64_t similarity_index(LatticeKind kind, const SimilaritySpec& spec) {
  if (kind == LatticeKind::Z1) return std::llabs(spec.a);
  return static_cast<std::int64_t>(ring::norm(kind, spec.as_point()));
}

inline void validate_spec(LatticeKind kind, const SimilaritySpec& spec) {
  if (spec.a == 0 && spec.b == 0) throw Error("similarity spec must be nonzero");
  if (kind == LatticeKind::Z1 && spec.b != 0) throw Error("Z1 similarity spec must have b = 0");
}

inline Lattice similar_sublattice(const Lattice& parent, const SimilaritySpec& spec) {
  validate_spec(parent.kind(), spec);
  return Lattice(parent.kind(), parent.scale(),
                 ring::multiply(parent.kind(), parent.generator(), spec.as_point()));
}

/// Index [parent : sub].
inline std::int64_t relative_index(const Lattice& parent, const Lattice& sub) {
  const LatticePoint h = detail::relative_generator(parent, sub);
  return similarity_index(parent.kind(), SimilaritySpec{h.coords[0], h.coords[1]});
}

/// True iff no parent point is equidistant from two nearest sub points.
inline bool is_clean(const Lattice& parent, const Lattice& sub) {
  const LatticeKind kind = parent.kind();
  const LatticePoint h = detail::relative_generator(parent, sub);
  const Lattice relative(kind, 1.0, h);
  const std::int64_t bound = detail::cell_box_bound(kind, h);
  const std::int64_t b_bound = parent.dim() == 2 ? bound : 0;
  for (std::int64_t a = -bound; a <= bound; ++a)
    for (std::int64_t b = -b_bound; b <= b_bound; ++b)
      if (relative.nearest_exact(LatticePoint{{a, b}}).ties > 1) return false;
  return true;
}

struct AdmissibleIndex {
  std::int64_t index = 1;
  SimilaritySpec witness;

  friend bool operator==(const AdmissibleIndex&, const AdmissibleIndex&) = default;
};

/// Every index N <= max_index realized by a clean similar sublattice, each with the
/// first witness found scanning a = 1, 2, ... and then b = 0, 1, ... (rotations only).
inline std::vector<AdmissibleIndex> admissible_indices(const Lattice& parent, std::int64_t max_index) {
  if (max_index < 1) throw Error("admissible_indices: max_index must be >= 1");
  const LatticeKind kind = parent.kind();
  std::map<std::int64_t, SimilaritySpec> found;
  for (std::int64_t a = 1; a <= max_index; ++a) {
    const std::int64_t b_max = kind == LatticeKind::Z1 ? 0 : max_index;
    for (std::int64_t b = 0; b <= b_max; ++b) {
      const SimilaritySpec spec{a, b};
      const std::int64_t n = similarity_index(kind, spec);
      if (n > max_index) break;
      if (found.contains(n)) continue;
      if (is_clean(parent, similar_sublattice(parent, spec))) found.emplace(n, spec);
    }
    if (kind != LatticeKind::Z1 && a * a > max_index) break;
  }
  std::vector<AdmissibleIndex> out;
  out.reserve(found.size());
  for (const auto& [n, spec] : found) out.push_back({n, spec});
  return out;
}

/// Clean witness for index n, or throws if n is not admissible.
inline SimilaritySpec witness_for_index(const Lattice& parent, std::int64_t n) {
  for (const auto& entry : admissible_indices(parent, n))
    if (entry.index == n) return entry.witness;
  throw InfeasibleDesignError("index " + std::to_string(n) + " is not realizable by a clean similar sublattice of " +
                              std::string(parent.name()));
}

/// Product lattice whose similarity element is the product of the sublattice elements.
/// Throws NonCleanError when the product is not clean with respect to the parent.
inline Lattice product_lattice(const Lattice& parent, std::span<const Lattice> subs) {
  if (subs.empty()) throw Error("product_lattice: need at least one sublattice");
  const LatticeKind kind = parent.kind();
  LatticePoint g = parent.generator();
  for (const Lattice& sub : subs) g = ring::multiply(kind, g, detail::relative_generator(parent, sub));
  Lattice product(kind, parent.scale(), g);
  for (const Lattice& sub : subs)
    if (!sub.contains(product.generator()) ||
        !sub.contains(ring::multiply(kind, product.generator(), LatticePoint{{0, 1}})))
      throw Error("product_lattice: containment check failed");
  if (!is_clean(parent, product)) throw NonCleanError("product lattice is not clean; choose different indices");
  return product;
}

}  // namespace mdlvq
