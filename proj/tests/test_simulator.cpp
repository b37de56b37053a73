#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "mdlvq/hr_design.hpp"
#include "mdlvq/labeling.hpp"
#include "mdlvq/rng.hpp"
#include "mdlvq/simulator.hpp"

using namespace mdlvq;

namespace {

std::shared_ptr<const IndexAssignment> labeled(LatticeKind kind, double nu, std::vector<std::int64_t> idx,
                                               const std::vector<double>& loss) {
  return std::make_shared<const IndexAssignment>(assign(make_setup(kind, nu, idx), ChannelModel(loss), 1.0));
}

SimConfig config_for(std::shared_ptr<const IndexAssignment> asg, const std::vector<double>& loss, std::size_t n,
                     std::uint64_t seed = 1) {
  SimConfig cfg;
  cfg.vectors = n;
  cfg.seed = seed;
  cfg.source = SourceModel::gaussian(1.0, asg->dim());
  cfg.channel = ChannelModel(loss);
  cfg.assignment = std::move(asg);
  return cfg;
}

// The rate-6 two-description design on Z2 with p = (0.05, 0.05): N = (5, 5), R_i = 3.
double design_nu_5_5() { return std::exp2(2.0 * (0.5 * std::log2(2.0 * M_PI * M_E) - 3.0)) / 5.0; }

}  // namespace

TEST(StreamRng, SameTripleSameSequence) {
  StreamRng a(42, Stream::Source, 3);
  StreamRng b(42, Stream::Source, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.gaussian(), b.gaussian());
}

TEST(StreamRng, StreamsAndChunksDiffer) {
  StreamRng a(42, Stream::Source, 0);
  StreamRng b(42, Stream::Erasure, 0);
  StreamRng c(42, Stream::Source, 1);
  StreamRng d(43, Stream::Source, 0);
  const double x = a.uniform();
  EXPECT_NE(x, b.uniform());
  EXPECT_NE(x, c.uniform());
  EXPECT_NE(x, d.uniform());
}

TEST(StreamRng, UniformRangeAndMoments) {
  StreamRng r(5, Stream::Erasure, 0);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(StreamRng, GaussianMoments) {
  StreamRng r(9, Stream::Source, 0);
  const int n = 200000;
  double s1 = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = r.gaussian();
    s1 += g;
    s2 += g * g;
  }
  EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Generate, DeterministicAndPrefixStable) {
  const SourceModel src = SourceModel::gaussian(2.0, 2);
  const auto a = generate(src, 20000, 3);
  const auto b = generate(src, 9000, 3);
  for (std::size_t i = 0; i < b.size(); ++i) ASSERT_EQ(a[i], b[i]);
  EXPECT_NE(generate(src, 1, 4)[0], a[0]);
  double power = 0.0;
  for (const Vector& v : a) power += dnorm2(v, 2);
  // per-dimension power of a variance-2 Gaussian; dnorm2 of one vector has variance 2 * 2^2 / 2
  EXPECT_NEAR(power / a.size(), 2.0, 4.0 * std::sqrt(4.0 / a.size()));
}

TEST(Generate, RejectsCustomSource) {
  EXPECT_THROW(generate(SourceModel::custom(1.0, 1.0, 2), 10, 1), Error);
}

TEST(Erase, ExtremeChannels) {
  StreamRng r(1, Stream::Erasure, 0);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(erase(ChannelModel({0.0, 0.0, 0.0}), r), SubsetMask{7});
    EXPECT_EQ(erase(ChannelModel({1.0, 1.0, 1.0}), r), SubsetMask{0});
  }
}

TEST(Erase, SubsetFrequenciesMatchProbabilities) {
  const ChannelModel channel({0.1, 0.3, 0.55});
  StreamRng r(2, Stream::Erasure, 0);
  const int n = 100000;
  std::vector<int> counts(8, 0);
  for (int i = 0; i < n; ++i) ++counts[erase(channel, r)];
  for (SubsetMask l = 0; l < 8; ++l) {
    const double p = subset_prob(channel, l);
    EXPECT_NEAR(static_cast<double>(counts[l]) / n, p, 4.0 * std::sqrt(p * (1.0 - p) / n)) << "subset " << l;
  }
}

TEST(Decode, MeanOfReceivedDescriptions) {
  const auto asg = labeled(LatticeKind::Z2, 1.0, {1, 1, 1}, {0.1, 0.1, 0.1});
  const Tuple t{{{0, 5}}, {{3, -1}}, {{7, 7}}};
  const Vector y = decode(*asg, 0b011, t);
  EXPECT_DOUBLE_EQ(y[0], 1.5);
  EXPECT_DOUBLE_EQ(y[1], 2.0);
  const Vector none = decode(*asg, 0, t);
  EXPECT_EQ(none, (Vector{0.0, 0.0}));
}

TEST(EncodeDecode, RoundTripAndShiftConsistency) {
  const auto asg = labeled(LatticeKind::Z2, 0.5, {5, 13}, {0.1, 0.2});
  const Lattice& central = asg->setup().central;
  StreamRng r(6, Stream::Source, 0);
  const LatticePoint shift = asg->setup().product.from_own_coords(LatticePoint{{1, -2}});
  const Vector sv = central.embed(shift);
  for (int i = 0; i < 200; ++i) {
    const Vector x{3.0 * r.gaussian(), 3.0 * r.gaussian()};
    const Encoded e = encode(*asg, x);
    EXPECT_EQ(e.central, central.nearest_point(x));
    const Vector back = decode(*asg, 0b11, e.descriptions);
    EXPECT_EQ(back, central.embed(e.central));
    const Encoded moved = encode(*asg, Vector{x[0] + sv[0], x[1] + sv[1]});
    EXPECT_EQ(moved.descriptions, shift_tuple(e.descriptions, shift));
  }
  // a point exactly on the lattice encodes to itself
  const LatticePoint p{{4, -3}};
  EXPECT_EQ(encode(*asg, central.embed(p)).central, p);
}

TEST(Run, DeterministicAcrossThreadCounts) {
  const std::vector<double> loss{0.1, 0.2};
  const auto asg = labeled(LatticeKind::Z2, 0.05, {5, 5}, loss);
  SimConfig one = config_for(asg, loss, 30000, 17);
  one.threads = 1;
  SimConfig four = one;
  four.threads = 4;
  const SimReport a = run(one);
  const SimReport b = run(four);
  EXPECT_EQ(a.empirical_total, b.empirical_total);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.side_entropy, b.side_entropy);
  for (std::size_t m = 0; m < a.per_subset.size(); ++m) {
    EXPECT_EQ(a.per_subset[m].count, b.per_subset[m].count);
    EXPECT_EQ(a.per_subset[m].sum, b.per_subset[m].sum);
  }
  SimConfig other = one;
  other.seed = 18;
  EXPECT_NE(run(other).empirical_total, a.empirical_total);
}

TEST(Run, TotalDecomposesOverSubsets) {
  const std::vector<double> loss{0.2, 0.3};
  const auto asg = labeled(LatticeKind::A2, 0.05, {7, 7}, loss);
  const SimReport rep = run(config_for(asg, loss, 20000));
  double weighted = 0.0;
  std::uint64_t count = 0;
  for (const SubsetStats& s : rep.per_subset) {
    weighted += static_cast<double>(s.count) / rep.vectors * s.mean();
    count += s.count;
  }
  EXPECT_EQ(count, rep.vectors);
  EXPECT_NEAR(weighted, rep.empirical_total, 1e-12 * rep.empirical_total);
}

TEST(Run, RejectsBadInputs) {
  const std::vector<double> loss{0.1, 0.1};
  const auto asg = labeled(LatticeKind::Z2, 0.05, {5, 5}, loss);
  SimConfig cfg = config_for(asg, loss, 0);
  EXPECT_THROW(run(cfg), Error);
  cfg.vectors = 10;
  cfg.source = SourceModel::gaussian(1.0, 1);
  EXPECT_THROW(run(cfg), DimensionError);
  cfg = config_for(asg, {0.1, 0.1, 0.1}, 10);
  EXPECT_THROW(run(cfg), Error);
}

TEST(Run, CentralLawWhenEverythingArrives) {
  // R_c = h - log2(nu)/2 with h = log2(2 pi e)/2 about 2.05; nu = 2^-7 gives R_c about 5.5
  for (LatticeKind kind : {LatticeKind::Z2, LatticeKind::A2}) {
    const std::vector<double> loss{0.0, 0.0};
    const double nu = std::exp2(-7.0);
    const auto asg = labeled(kind, nu, {1, 1}, loss);
    const SimReport rep = run(config_for(asg, loss, 200000));
    const double dc = asg->setup().central.second_moment() * nu;
    EXPECT_NEAR(rep.empirical_central, dc, 0.02 * dc) << name_of(kind);
    EXPECT_EQ(rep.per_subset.back().count, 200000U);
  }
}

TEST(Run, NothingArrivesGivesSourcePower) {
  const std::vector<double> loss{1.0, 1.0};
  const auto asg = labeled(LatticeKind::Z2, 0.05, {5, 5}, loss);
  const SimReport rep = run(config_for(asg, loss, 50000));
  EXPECT_EQ(rep.per_subset[0].count, 50000U);
  EXPECT_NEAR(rep.empirical_total, 1.0, 3.0 * rep.std_error);
}

TEST(Run, PerSubsetDistortionMatchesTable) {
  const std::vector<double> loss{0.05, 0.05};
  const double nu = design_nu_5_5();
  const auto asg = labeled(LatticeKind::Z2, nu, {5, 5}, loss);
  const SimReport rep = run(config_for(asg, loss, 200000));
  const double dc = asg->setup().central.second_moment() * nu;
  for (SubsetMask l : {SubsetMask{1}, SubsetMask{2}}) {
    const SubsetStats& s = rep.per_subset[l];
    EXPECT_NEAR(s.mean(), dc + asg->side_distortion(l), 3.0 * s.std_error()) << "subset " << l;
  }
}

TEST(Run, TotalWithinTenPercentOfPrediction) {
  const std::vector<double> loss{0.05, 0.05};
  const auto asg = labeled(LatticeKind::Z2, design_nu_5_5(), {5, 5}, loss);
  const SimReport rep = run(config_for(asg, loss, 200000));
  EXPECT_NEAR(rep.empirical_total / rep.predicted.total, 1.0, 0.10);
}

TEST(Run, PluginSideEntropyNearRate) {
  const std::vector<double> loss{0.05, 0.05};
  const double nu = design_nu_5_5();
  const auto asg = labeled(LatticeKind::Z2, nu, {5, 5}, loss);
  const SimReport rep = run(config_for(asg, loss, 100000));
  const std::vector<double> idx{5.0, 5.0};
  const Rates r = rates(nu, idx, SourceModel::gaussian(1.0, 2));
  ASSERT_NEAR(r.side[0], 3.0, 1e-9);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(rep.side_entropy[static_cast<std::size_t>(i)], r.side[static_cast<std::size_t>(i)], 0.1);
}
