#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "support/oracles.hpp"
#include "vattr/baselines.hpp"
#include "vattr/error.hpp"
#include "vattr/experiments.hpp"
#include "vattr/kernels.hpp"
#include "vattr/metrics.hpp"
#include "vattr/synth.hpp"

namespace vattr {
namespace {

using testing::random_video;
using testing::random_volume;

TEST(Auc, ConstantScorerGivesConstant) {
  const Shape3 s{2, 14, 14};
  const ConstantScorer constant(s, 1, {0.37, 0.63});
  const VideoTensor x = random_video(s, 1, 1), xbar = gaussian_blur2d(x, 3.0);
  for (Operation op : {Operation::insertion, Operation::deletion})
    for (Order order : {Order::morf, Order::lerf}) {
      const AucResult r = auc(x, random_volume(s, 2), constant, 1, xbar, {op, order, {UnitKind::patch, 7}});
      EXPECT_NEAR(r.auc, 0.63, 1e-12);
      EXPECT_EQ(r.curve.size(), 2u * 4 + 1);
    }
}

TEST(Auc, MeanOverStepsOneToL) {
  // Two single-voxel units; Phi is 0, 0.4, 1.0 after revealing 0, 1, 2 of them.
  const Shape3 s{1, 1, 2};
  const testing::FunctionScorer f(s, 1, [](const VideoTensor& y) {
    const double revealed = y[0] + y[1];
    return revealed < 0.5 ? 0.0 : revealed < 1.5 ? 0.4 : 1.0;
  });
  const VideoTensor x(s, 1, 1.0), xbar(s, 1, 0.0);
  const UnitPartition part = partition_from_labels(s, {0, 1});
  const AucResult r = auc(x, Volume(s, {0.9, 0.1}), f, 1, xbar, part, Operation::insertion, Order::morf);
  EXPECT_EQ(r.curve, (std::vector<double>{0.0, 0.4, 1.0}));
  EXPECT_NEAR(r.auc, 0.7, 1e-15);
}

TEST(Auc, TubeMapBeatsRandomOnOracle) {
  SynthSpec spec;
  spec.frames = 4;
  spec.size = 32;
  spec.shape_scale = 10;
  spec.num_classes = 2;
  spec.videos_per_class = 2;
  for (const SynthSample& sample : generate(spec)) {
    const OracleTubeScorer o(sample.video.frame_shape(), 1, sample.boxes, 0.25);
    const VideoTensor xbar = gaussian_blur2d(sample.video, 10.0);
    const AucConfig cfg{Operation::insertion, Order::morf, {UnitKind::patch, 7}};
    const double tube = auc(sample.video, box_mask(sample.boxes, sample.video.frame_shape()), o, 1, xbar, cfg).auc;
    const double rnd = auc(sample.video, attribute_random(sample.video.frame_shape(), 3), o, 1, xbar, cfg).auc;
    EXPECT_GT(tube, rnd);
  }
}

TEST(Auc, InvariantUnderMonotoneTransforms) {
  const Shape3 s{2, 10, 10};
  const VideoTensor x = random_video(s, 1, 4);
  const testing::LogisticProbeScorer probe(s, 1, [&] {
    std::vector<double> w(s.count());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (double& v : w) v = u(rng);
    return w;
  }(), 0.0);
  const VideoTensor xbar(s, 1, 0.0);
  const Volume m = random_volume(s, 6);
  Volume affine = m, warped = m;
  for (double& v : affine.values()) v = 0.5 * v + 2.0;
  for (double& v : warped.values()) v = std::tanh(3.0 * v) + v * v * v;
  const AucConfig patches{Operation::deletion, Order::morf, {UnitKind::patch, 3}};
  EXPECT_EQ(auc(x, m, probe, 1, xbar, patches).auc, auc(x, affine, probe, 1, xbar, patches).auc);
  const AucConfig pixels{Operation::insertion, Order::lerf, {UnitKind::patch, 1}};
  EXPECT_EQ(auc(x, m, probe, 1, xbar, pixels).curve, auc(x, warped, probe, 1, xbar, pixels).curve);
}

TEST(Auc, ConfigName) {
  EXPECT_EQ((AucConfig{Operation::deletion, Order::lerf, {UnitKind::supervoxel, 256}}).name(),
            "deletion+lerf+supervoxel:256");
}

TEST(Pointing, Geometry) {
  const Box b{20, 20, 29, 29};
  EXPECT_EQ(distance_to_box(25, 25, b), 0.0);
  EXPECT_EQ(distance_to_box(25, 36, b), 7.0);
  EXPECT_DOUBLE_EQ(distance_to_box(32, 33, b), 5.0);

  const BoxTrack track(1, b);
  auto map_with_peak = [](long i, long j) {
    Volume m({1, 64, 64}, 0.0);
    m(0, static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 1.0;
    return m;
  };
  EXPECT_EQ(pointing_hit(map_with_peak(24, 24), track), true);
  EXPECT_EQ(pointing_hit(map_with_peak(24, 37), track), false);  // 8 px right of the edge
  EXPECT_EQ(pointing_hit(map_with_peak(24, 36), track), true);   // tangent disc
  EXPECT_EQ(pointing_hit(map_with_peak(13, 24), track), true);
}

TEST(Pointing, OnlyAnnotatedFramesCount) {
  Volume m({2, 16, 16}, 0.0);
  m(0, 0, 0) = 1.0;   // frame without a box
  m(1, 8, 8) = 0.5;
  BoxTrack track{std::nullopt, Box{7, 7, 9, 9}};
  EXPECT_EQ(pointing_hit(m, track), true);
  EXPECT_EQ(pointing_hit(m, BoxTrack(2, std::nullopt)), std::nullopt);

  const std::vector<Volume> maps{m, m, m};
  const std::vector<BoxTrack> boxes{track, BoxTrack(2, std::nullopt), BoxTrack(2, Box{0, 14, 1, 15})};
  const PointingResult r = pointing_game(maps, boxes);
  EXPECT_EQ(r.evaluated, 2u);
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_EQ(r.hits, 1u);
  EXPECT_DOUBLE_EQ(r.hit_ratio, 0.5);
}

TEST(Spearman, Examples) {
  const std::vector<double> a{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(spearman(a, a), 1.0);
  EXPECT_DOUBLE_EQ(spearman(a, std::vector<double>{4, 3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(spearman(a, std::vector<double>{1, 3, 2, 4}), 0.8);
  const SpearmanResult flat = spearman_checked(a, std::vector<double>{2, 2, 2, 2});
  EXPECT_TRUE(flat.degenerate);
  EXPECT_EQ(flat.rho, 0.0);
  EXPECT_THROW(spearman(a, std::vector<double>{1, 2}), ContractError);
}

TEST(Spearman, MatchesBruteForceWithTies) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> small(0, 5);
  std::uniform_int_distribution<std::size_t> len(3, 12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = len(rng);
    std::vector<double> a(n), b(n);
    for (double& v : a) v = small(rng);
    for (double& v : b) v = small(rng);
    const auto ra = testing::brute_ranks(a), rb = testing::brute_ranks(b);
    EXPECT_EQ(average_ranks(a), ra);
    const bool flat = std::all_of(ra.begin(), ra.end(), [&](double r) { return r == ra[0]; }) ||
                      std::all_of(rb.begin(), rb.end(), [&](double r) { return r == rb[0]; });
    const SpearmanResult s = spearman_checked(a, b);
    EXPECT_EQ(s.degenerate, flat);
    if (!flat) EXPECT_EQ(s.rho, testing::brute_pearson(ra, rb)) << "trial " << trial;
  }
}

TEST(Reliability, Directions) {
  EXPECT_EQ(better_direction(Operation::insertion, Order::morf), BetterDirection::higher);
  EXPECT_EQ(better_direction(Operation::deletion, Order::lerf), BetterDirection::higher);
  EXPECT_EQ(better_direction(Operation::deletion, Order::morf), BetterDirection::lower);
  EXPECT_EQ(better_direction(Operation::insertion, Order::lerf), BetterDirection::lower);
}

TEST(Reliability, IdenticalOrderingsGiveOne) {
  EvaluationMatrix a(4, 3, BetterDirection::higher);
  for (std::size_t p = 0; p < 4; ++p) {
    for (std::size_t j = 0; j < 3; ++j) a.at(p, j) = 0.2 + 0.1 * static_cast<double>(j) + 0.01 * static_cast<double>(p);
    a.random[p] = 0.1;
  }
  const ReliabilityReport r = reliability(a);
  EXPECT_EQ(r.alpha, 1.0);
  EXPECT_EQ(r.weights, std::vector<double>(4, 1.0));
}

TEST(Reliability, ReversedRowsGiveMinusOne) {
  EvaluationMatrix a(2, 3, BetterDirection::lower);
  a.values = {0.1, 0.2, 0.3, 0.3, 0.2, 0.1};
  a.random = {0.9, 0.9};
  EXPECT_EQ(reliability(a).alpha, -1.0);
}

TEST(Reliability, WeightExample) {
  EvaluationMatrix a(1, 2, BetterDirection::higher);
  a.values = {0.3, 0.5};
  a.random = {0.4};
  EXPECT_EQ(reliability_weights(a), std::vector<double>{0.5});
  // Lower-is-better flips which method counts.
  a.better = BetterDirection::lower;
  EXPECT_EQ(reliability_weights(a), std::vector<double>{0.5});
  a.random = {0.3};
  EXPECT_EQ(reliability_weights(a), std::vector<double>{0.0});
}

TEST(Reliability, WeightsScaleContributions) {
  // Sample 2 never beats random, so only the pair (0, 1) counts.
  EvaluationMatrix a(3, 3, BetterDirection::higher);
  a.values = {0.5, 0.6, 0.7, 0.5, 0.6, 0.7, 0.7, 0.6, 0.5};
  a.random = {0.1, 0.1, 0.9};
  EXPECT_EQ(reliability(a).alpha, 1.0);
}

TEST(Reliability, UndefinedAndInvalid) {
  EvaluationMatrix a(2, 2, BetterDirection::higher);
  a.values = {0.1, 0.2, 0.1, 0.2};
  a.random = {0.5, 0.5};
  EXPECT_THROW(reliability(a), UndefinedAlphaError);
  EvaluationMatrix one(1, 2, BetterDirection::higher);
  EXPECT_THROW(reliability(one), ParameterError);
  EvaluationMatrix broken(2, 2, BetterDirection::higher);
  broken.random.pop_back();
  EXPECT_THROW(reliability(broken), ContractError);
  EvaluationMatrix nan(2, 2, BetterDirection::higher);
  nan.values[1] = std::nan("");
  EXPECT_THROW(reliability(nan), ContractError);
}

TEST(KeepTop, KeepsRankedPixels) {
  const Shape3 s{1, 2, 3};
  std::vector<double> values(18);
  std::iota(values.begin(), values.end(), 1.0);
  const VideoTensor x(s, 3, values);
  const VideoTensor fill(s, 3, -1.0);
  const Volume m(s, {0.1, 0.9, 0.5, 0.5, 0.0, 0.2});
  // Three pixels: pixel 1, then the tie between pixels 2 and 3 in index order.
  const VideoTensor y = keep_top(x, m, 0.5, fill);
  EXPECT_EQ(y, VideoTensor(s, 3, std::vector<double>{-1, -1, -1, 4, 5, 6, 7, 8, 9, 10, 11, 12, -1, -1, -1, -1, -1, -1}));
  EXPECT_EQ(keep_top(x, m, 1.0, fill), x);
  EXPECT_EQ(keep_top(x, m, 0.0, fill), fill);
  EXPECT_THROW(keep_top(x, m, 1.5, fill), ParameterError);
}

TEST(Kar, FullRatioMatchesPlainRetrain) {
  SynthSpec spec;
  spec.frames = 4;
  spec.size = 16;
  spec.shape_scale = 6;
  spec.videos_per_class = 4;
  spec.num_classes = 2;
  const auto train = generate(spec);
  spec.seed = 99;
  const auto test = generate(spec);
  std::vector<Volume> train_maps, test_maps;
  for (const auto& t : train) train_maps.push_back(attribute_random(t.video.frame_shape(), 1));
  for (const auto& t : test) test_maps.push_back(attribute_random(t.video.frame_shape(), 2));
  ToyArch arch;
  arch.input = {4, 16, 16};
  arch.classes = 2;
  arch.conv1 = 3;
  arch.conv2 = 4;
  ToyTrainConfig cfg;
  cfg.epochs = 3;
  const std::vector<double> ratios{1.0};
  const auto points = kar_harness(train, test, train_maps, test_maps, ratios, arch, cfg);
  ASSERT_EQ(points.size(), 1u);
  std::vector<LabeledVideo> tr, te;
  for (const auto& t : train) tr.push_back({&t.video, t.label});
  for (const auto& t : test) te.push_back({&t.video, t.label});
  const ToyTrainResult plain = train_toy(tr, arch, cfg);
  EXPECT_NEAR(points[0].test_accuracy, classification_accuracy(plain.model, te), 0.02);
  EXPECT_NEAR(points[0].train_accuracy, plain.train_accuracy, 0.02);
  const std::vector<Volume> short_maps(train_maps.begin(), train_maps.end() - 1);
  EXPECT_THROW(kar_harness(train, test, short_maps, test_maps, ratios, arch, cfg), ContractError);
}

TEST(ParallelErrors, WorkerExceptionsReachTheCaller) {
  SynthSpec spec;
  spec.frames = 3;
  spec.size = 16;
  spec.shape_scale = 6;
  spec.videos_per_class = 2;
  const auto data = generate(spec);
  // Map shape mismatch inside the parallel keep_top loop.
  std::vector<Volume> maps(data.size(), Volume({3, 16, 15}, 0.5)), good(data.size(), Volume({3, 16, 16}, 0.5));
  ToyArch arch;
  arch.input = {3, 16, 16};
  arch.classes = 4;
  const std::vector<double> ratios{0.5};
  EXPECT_THROW(kar_harness(data, data, maps, good, ratios, arch, {}), ContractError);
  // Grad-CAM on a scorer without an activation tap, inside the parallel suite.
  const OracleTubeScorer o = oracle_for(data[0]);
  const std::vector<Method> methods{Method::gradcam};
  const std::vector<AucConfig> metrics{AucConfig{}};
  EXPECT_THROW(reliability_suite(data, o, methods, metrics, dataset_mean(data), {}), UnsupportedError);
}

}  // namespace
}  // namespace vattr
