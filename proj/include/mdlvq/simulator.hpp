#pragma once

// Monte-Carlo evaluation of a designed quantizer over an erasure channel.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <thread>
#include <vector>

#include "mdlvq/errors.hpp"
#include "mdlvq/hr_design.hpp"
#include "mdlvq/labeling.hpp"
#include "mdlvq/loss_model.hpp"
#include "mdlvq/rng.hpp"

namespace mdlvq {

inline constexpr std::size_t kChunkSize = 8192;

/// Deterministic Gaussian source vectors; vector n depends only on (seed, n).
inline std::vector<Vector> generate(const SourceModel& src, std::size_t n, std::uint64_t seed) {
  if (src.kind != SourceKind::Gaussian) throw Error("generate: only Gaussian sources can be sampled");
  std::vector<Vector> out(n, Vector{});
  const double sd = std::sqrt(src.variance);
  for (std::size_t start = 0; start < n; start += kChunkSize) {
    StreamRng rng(seed, Stream::Source, start / kChunkSize);
    for (std::size_t i = start; i < std::min(n, start + kChunkSize); ++i)
      for (int d = 0; d < src.dim; ++d) out[i][static_cast<std::size_t>(d)] = sd * rng.gaussian();
  }
  return out;
}

struct Encoded {
  LatticePoint central;
  Tuple descriptions;
};

inline Encoded encode(const IndexAssignment& asg, const Vector& x) {
  const LatticePoint c = asg.setup().central.nearest_point(x);
  return {c, asg.alpha(c)};
}

/// Received-description mask: bit i set when description i survives (u_i >= p_i).
inline SubsetMask erase(const ChannelModel& channel, StreamRng& rng) {
  SubsetMask received = 0;
  for (int i = 0; i < channel.descriptions(); ++i)
    if (rng.uniform() >= channel.loss(i)) received |= SubsetMask{1} << i;
  return received;
}

/// All received: exact inverse map. Some received: mean of the received points. None: the source mean (zero).
inline Vector decode(const IndexAssignment& asg, SubsetMask received, const Tuple& descriptions) {
  const Lattice& central = asg.setup().central;
  const int k = asg.K();
  const SubsetMask full = (SubsetMask{1} << k) - 1;
  if (received == full) return central.embed(asg.alpha_inverse(descriptions));
  if (received == 0) return Vector{};
  Vector mean{};
  int count = 0;
  for (int i = 0; i < k; ++i) {
    if (!(received >> i & 1U)) continue;
    const Vector e = central.embed(descriptions[static_cast<std::size_t>(i)]);
    mean[0] += e[0];
    mean[1] += e[1];
    ++count;
  }
  return {mean[0] / count, mean[1] / count};
}

struct SimConfig {
  std::size_t vectors = 200000;
  std::uint64_t seed = 1;
  SourceModel source;
  ChannelModel channel;
  std::shared_ptr<const IndexAssignment> assignment;
  bool per_subset = true;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct SubsetStats {
  std::uint64_t count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double std_error() const {
    if (count < 2) return 0.0;
    const double c = static_cast<double>(count);
    const double var = std::max(0.0, (sum_sq - sum * sum / c) / (c - 1.0));
    return std::sqrt(var / c);
  }
};

struct SimReport {
  std::size_t vectors = 0;
  double empirical_total = 0.0;
  double std_error = 0.0;
  double empirical_central = 0.0;          // conditional on every description arriving
  std::vector<SubsetStats> per_subset;     // indexed by received mask
  std::vector<double> side_entropy;        // plug-in, bits per dimension
  DistortionPrediction predicted;
};

namespace detail {

struct ChunkResult {
  std::vector<SubsetStats> subsets;
  std::vector<std::map<LatticePoint, std::uint64_t>> symbols;
};

inline ChunkResult run_chunk(const SimConfig& cfg, std::size_t chunk) {
  const IndexAssignment& asg = *cfg.assignment;
  const int k = asg.K();
  const int dim = asg.dim();
  ChunkResult res;
  res.subsets.assign(std::size_t{1} << k, SubsetStats{});
  res.symbols.resize(static_cast<std::size_t>(k));
  StreamRng source(cfg.seed, Stream::Source, chunk);
  StreamRng erasure(cfg.seed, Stream::Erasure, chunk);
  const double sd = std::sqrt(cfg.source.variance);
  const std::size_t begin = chunk * kChunkSize;
  const std::size_t end = std::min(cfg.vectors, begin + kChunkSize);
  for (std::size_t n = begin; n < end; ++n) {
    Vector x{};
    for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = sd * source.gaussian();
    const Encoded enc = encode(asg, x);
    const SubsetMask received = erase(cfg.channel, erasure);
    const Vector y = decode(asg, received, enc.descriptions);
    const double err = dnorm2(Vector{x[0] - y[0], x[1] - y[1]}, dim);
    SubsetStats& s = res.subsets[received];
    ++s.count;
    s.sum += err;
    s.sum_sq += err * err;
    for (int i = 0; i < k; ++i) ++res.symbols[static_cast<std::size_t>(i)][enc.descriptions[static_cast<std::size_t>(i)]];
  }
  return res;
}

}  // namespace detail

inline SimReport run(const SimConfig& cfg) {
  if (cfg.vectors < 1) throw Error("simulate: need at least one vector");
  if (!cfg.assignment) throw Error("simulate: no assignment");
  const IndexAssignment& asg = *cfg.assignment;
  if (asg.dim() != cfg.source.dim) throw DimensionError("simulate: source and lattice dimensions differ");
  if (cfg.channel.descriptions() != asg.K()) throw Error("simulate: channel and assignment disagree on K");
  if (cfg.source.kind != SourceKind::Gaussian) throw Error("simulate: only Gaussian sources can be sampled");

  const std::size_t chunks = (cfg.vectors + kChunkSize - 1) / kChunkSize;
  std::vector<detail::ChunkResult> results(chunks);
  unsigned workers = cfg.threads ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, chunks));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) results[c] = detail::run_chunk(cfg, c);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  const int k = asg.K();
  const int dim = asg.dim();
  SimReport rep;
  rep.vectors = cfg.vectors;
  rep.per_subset.assign(std::size_t{1} << k, SubsetStats{});
  std::vector<std::map<LatticePoint, std::uint64_t>> symbols(static_cast<std::size_t>(k));
  for (const auto& r : results) {
    for (std::size_t m = 0; m < r.subsets.size(); ++m) {
      rep.per_subset[m].count += r.subsets[m].count;
      rep.per_subset[m].sum += r.subsets[m].sum;
      rep.per_subset[m].sum_sq += r.subsets[m].sum_sq;
    }
    for (std::size_t i = 0; i < symbols.size(); ++i)
      for (const auto& [sym, count] : r.symbols[i]) symbols[i][sym] += count;
  }

  double sum = 0.0;
  double sum_sq = 0.0;
  for (const SubsetStats& s : rep.per_subset) {
    sum += s.sum;
    sum_sq += s.sum_sq;
  }
  const double n = static_cast<double>(cfg.vectors);
  rep.empirical_total = sum / n;
  rep.std_error = cfg.vectors > 1 ? std::sqrt(std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0)) / n) : 0.0;
  rep.empirical_central = rep.per_subset.back().mean();

  for (const auto& counts : symbols) {
    double h = 0.0;
    for (const auto& [sym, count] : counts) {
      const double f = static_cast<double>(count) / n;
      h -= f * std::log2(f);
    }
    rep.side_entropy.push_back(h / dim);
  }

  const LatticeSetup& setup = asg.setup();
  std::vector<double> idx;
  for (std::int64_t v : setup.indices()) idx.push_back(static_cast<double>(v));
  rep.predicted = predict_distortion({cfg.source, cfg.channel, setup.nu(), idx, asg.psi(), setup.central.second_moment(),
                                      sphere_second_moment(dim)});
  if (!cfg.per_subset) rep.per_subset.clear();
  return rep;
}

}  // namespace mdlvq
