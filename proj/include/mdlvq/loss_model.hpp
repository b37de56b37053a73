#pragma once

// Probability bookkeeping over subsets of received descriptions.
// A subset l of {0, ..., K-1} is a bitmask; bit i set means description i arrived.

#include <bit>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mdlvq/errors.hpp"

namespace mdlvq {

using SubsetMask = std::uint32_t;

inline constexpr double kMassFloor = 1e-300;

class ChannelModel {
 public:
  ChannelModel() = default;
  explicit ChannelModel(std::vector<double> loss) : loss_(std::move(loss)) {
    if (loss_.empty()) throw Error("ChannelModel: need at least one description");
    if (loss_.size() > 20) throw Error("ChannelModel: at most 20 descriptions are supported");
    for (double p : loss_)
      if (!(p >= 0.0 && p <= 1.0)) throw Error("ChannelModel: loss probabilities must lie in [0, 1]");
  }

  int descriptions() const { return static_cast<int>(loss_.size()); }
  double loss(int i) const { return loss_.at(static_cast<std::size_t>(i)); }
  double receive(int i) const { return 1.0 - loss(i); }
  const std::vector<double>& losses() const { return loss_; }
  SubsetMask full_mask() const { return (SubsetMask{1} << loss_.size()) - 1; }

  double all_lost() const {
    double prod = 1.0;
    for (double p : loss_) prod *= p;
    return prod;
  }

  friend bool operator==(const ChannelModel&, const ChannelModel&) = default;

 private:
  std::vector<double> loss_;
};

/// p(l): members received, non-members lost.
inline double subset_prob(const ChannelModel& channel, SubsetMask subset) {
  const int k = channel.descriptions();
  if ((subset >> k) != 0) throw Error("subset_prob: subset refers to a description index >= K");
  double prob = 1.0;
  for (int i = 0; i < k; ++i) prob *= (subset >> i & 1U) ? channel.receive(i) : channel.loss(i);
  return prob;
}

struct SubsetWeights {
  int K = 0;
  int kappa = 0;
  double pL = 0.0;                  // p(L)
  std::vector<double> pLi;          // p(L_i)
  std::vector<double> pLij;         // p(L_{i,j}), K x K row-major; diagonal holds p(L_i)
  double beta = 0.0;                // (1/kappa^2) sum_{i<j} (p(L_i)p(L_j)/p(L) - p(L_{i,j}))

  double pair(int i, int j) const { return pLij[static_cast<std::size_t>(i * K + j)]; }

  /// The bracket p(L_i)p(L_j)/p(L) - p(L_{i,j}), zero when p(L) vanishes.
  double association(int i, int j) const {
    if (pL < kMassFloor) return 0.0;
    return pLi[static_cast<std::size_t>(i)] * pLi[static_cast<std::size_t>(j)] / pL - pair(i, j);
  }
};

inline SubsetWeights weights(const ChannelModel& channel, int kappa) {
  const int k = channel.descriptions();
  if (kappa < 1 || kappa > k) throw Error("weights: kappa must lie in 1..K, got " + std::to_string(kappa));
  SubsetWeights w;
  w.K = k;
  w.kappa = kappa;
  w.pLi.assign(static_cast<std::size_t>(k), 0.0);
  w.pLij.assign(static_cast<std::size_t>(k * k), 0.0);
  for (SubsetMask l = 0; l <= channel.full_mask(); ++l) {
    if (std::popcount(l) != kappa) continue;
    const double p = subset_prob(channel, l);
    w.pL += p;
    for (int i = 0; i < k; ++i) {
      if (!(l >> i & 1U)) continue;
      w.pLi[static_cast<std::size_t>(i)] += p;
      for (int j = 0; j < k; ++j)
        if (l >> j & 1U) w.pLij[static_cast<std::size_t>(i * k + j)] += p;
    }
  }
  double sum = 0.0;
  for (int i = 0; i + 1 < k; ++i)
    for (int j = i + 1; j < k; ++j) sum += w.association(i, j);
  w.beta = sum / (static_cast<double>(kappa) * kappa);
  return w;
}

struct ChannelAggregates {
  double p_hat = 0.0;     // sum over kappa = 1..K of p(L)
  double beta_hat = 0.0;  // sum over kappa = 1..K of beta
};

inline ChannelAggregates aggregates(const ChannelModel& channel) {
  ChannelAggregates agg;
  for (int kappa = 1; kappa <= channel.descriptions(); ++kappa) {
    const SubsetWeights w = weights(channel, kappa);
    agg.p_hat += w.pL;
    agg.beta_hat += w.beta;
  }
  return agg;
}

}  // namespace mdlvq
