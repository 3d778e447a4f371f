#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "support/oracles.hpp"
#include "vattr/error.hpp"
#include "vattr/scorer.hpp"
#include "vattr/synth.hpp"
#include "vattr/toy_model.hpp"

namespace vattr {
namespace {

using testing::random_video;

BoxTrack square_tube(std::size_t frames, long i0, long j0, long side) {
  return BoxTrack(frames, Box{i0, j0, i0 + side - 1, j0 + side - 1});
}

TEST(OracleTube, ClosedForms) {
  const Shape3 s{4, 14, 14};
  const OracleTubeScorer o(s, 1, square_tube(4, 3, 5, 6), 0.25);
  const VideoTensor half(s, 1, 0.5);
  EXPECT_DOUBLE_EQ(o.probability(half, 1), 0.5);
  VideoTensor inside = half;
  const Volume ind = o.tube_indicator();
  for (std::size_t k = 0; k < ind.size(); ++k)
    if (ind[k] > 0) inside[k] = 1.0;
  EXPECT_NEAR(o.probability(inside, 1), logistic(0.5 / 0.25), 1e-15);
  const auto p = o.score(inside);
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(OracleTube, GradientSupportAndValue) {
  const Shape3 s{4, 14, 14};
  const OracleTubeScorer o(s, 3, square_tube(4, 2, 2, 5), 0.3);
  const VideoTensor x = random_video(s, 3, 1);
  const VideoTensor g = o.input_gradient(x, 1);
  const double p = o.probability(x, 1);
  const double inside = p * (1 - p) / (25.0 * 4.0 * 3.0 * 0.3);
  const Volume ind = o.tube_indicator();
  EXPECT_EQ(o.tube_elements(), 25u * 4u * 3u);
  for (std::size_t v = 0; v < ind.size(); ++v)
    for (std::size_t c = 0; c < 3; ++c) {
      if (ind[v] > 0) {
        EXPECT_NEAR(g[v * 3 + c], inside, 1e-15);
      } else {
        EXPECT_EQ(g[v * 3 + c], 0.0);
      }
    }
}

TEST(OracleTube, Errors) {
  const Shape3 s{2, 8, 8};
  EXPECT_THROW(OracleTubeScorer(s, 1, square_tube(2, 0, 0, 3), 0.0), ParameterError);
  EXPECT_THROW(OracleTubeScorer(s, 1, square_tube(3, 0, 0, 3), 1.0), ContractError);
  const OracleTubeScorer o(s, 1, square_tube(2, 0, 0, 3), 1.0);
  EXPECT_THROW(o.score(VideoTensor({2, 8, 9}, 1)), ContractError);
  EXPECT_THROW(o.input_gradient(VideoTensor(s, 1), 2), ParameterError);
  EXPECT_THROW(o.activation_tap(VideoTensor(s, 1), 0), UnsupportedError);
}

template <class S>
double max_gradient_error(const S& scorer, const VideoTensor& x, std::size_t c, std::size_t probes,
                          std::uint64_t seed) {
  const VideoTensor g = scorer.input_gradient(x, c);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  std::vector<std::size_t> idx(probes);
  for (auto& k : idx) k = pick(rng);
  const auto fd = testing::central_differences(x, [&](const VideoTensor& y) { return scorer.probability(y, c); }, idx);
  double worst = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) worst = std::max(worst, testing::relative_error(g[idx[k]], fd[k]));
  return worst;
}

TEST(OracleTube, FiniteDifferences) {
  const Shape3 s{4, 14, 14};
  const OracleTubeScorer o(s, 1, square_tube(4, 4, 4, 6), 0.25);
  // Probe only inside the tube, where the gradient is nonzero.
  const VideoTensor x = random_video(s, 1, 2);
  const VideoTensor g = o.input_gradient(x, 1);
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < g.size() && idx.size() < 24; k += 7)
    if (g[k] != 0.0) idx.push_back(k);
  ASSERT_GE(idx.size(), 20u);
  const auto fd = testing::central_differences(x, [&](const VideoTensor& y) { return o.probability(y, 1); }, idx);
  for (std::size_t k = 0; k < idx.size(); ++k) EXPECT_LT(testing::relative_error(g[idx[k]], fd[k]), 1e-4);
}

ToyArch small_arch(std::size_t channels = 1) {
  ToyArch a;
  a.input = {4, 14, 14};
  a.channels = channels;
  a.classes = 3;
  a.conv1 = 3;
  a.conv2 = 4;
  return a;
}

TEST(Toy, ProbabilitiesSumToOne) {
  const ToyConv3dScorer m(small_arch(3), 3);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto p = m.score(random_video({4, 14, 14}, 3, s));
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Toy, InputGradientMatchesFiniteDifferences) {
  const ToyConv3dScorer m(small_arch(), 11);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_LT(max_gradient_error(m, random_video({4, 14, 14}, 1, 20 + c), c, 24, 30 + c), 1e-4);
  }
}

TEST(Toy, SoftmaxShiftInvariance) {
  const std::vector<double> z{0.3, -1.2, 2.5, 0.0};
  std::vector<double> shifted = z;
  for (double& v : shifted) v += 123.456;
  const auto a = softmax(z), b = softmax(shifted);
  for (std::size_t k = 0; k < z.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-9);
}

TEST(Toy, ParameterGradientMatchesFiniteDifferences) {
  ToyConv3dScorer m(small_arch(), 5);
  const VideoTensor x = random_video({4, 14, 14}, 1, 6);
  std::vector<double> g(m.parameters().size(), 0.0);
  m.loss_and_gradient(x, 2, g);
  std::vector<double> scratch(g.size());
  for (std::size_t k = 0; k < g.size(); k += 13) {
    const double o = m.parameters()[k];
    m.parameters()[k] = o + 1e-5;
    const double lp = m.loss_and_gradient(x, 2, scratch);
    m.parameters()[k] = o - 1e-5;
    const double lm = m.loss_and_gradient(x, 2, scratch);
    m.parameters()[k] = o;
    EXPECT_LT(testing::relative_error(g[k], (lp - lm) / 2e-5), 1e-4) << "parameter " << k;
  }
}

TEST(Toy, ActivationTapGradientMatchesFiniteDifferences) {
  // d p_c / d a2 checked by perturbing the tap through its producer is not
  // possible from outside; instead check the chain rule total:
  // sum(tap gradient * tap activation) equals the directional derivative of
  // p_c along a positive rescaling of the second-layer weights and biases.
  ToyConv3dScorer m(small_arch(), 8);
  const VideoTensor x = random_video({4, 14, 14}, 1, 9);
  const ActivationTap tap = m.activation_tap(x, 1);
  double dot = 0.0;
  for (std::size_t k = 0; k < tap.activation.values.size(); ++k) dot += tap.gradient.values[k] * tap.activation.values[k];
  // a2 = relu(W2 * p1 + b2) is positively homogeneous in (W2, b2).
  const ToyArch a = small_arch();
  const std::size_t w2_begin = 27 * a.channels * a.conv1 + a.conv1;
  const std::size_t w2_end = w2_begin + 27 * a.conv1 * a.conv2 + a.conv2;
  auto prob_at = [&](double scale) {
    ToyConv3dScorer s = m;
    for (std::size_t k = w2_begin; k < w2_end; ++k) s.parameters()[k] *= scale;
    return s.probability(x, 1);
  };
  const double fd = (prob_at(1 + 1e-5) - prob_at(1 - 1e-5)) / 2e-5;
  EXPECT_LT(testing::relative_error(dot, fd), 1e-4);
  EXPECT_EQ(tap.activation.shape, (Shape3{4, 4, 4}));
  EXPECT_EQ(tap.activation.channels, a.conv2);
}

TEST(Toy, SeedDeterminismAndErrors) {
  EXPECT_EQ(ToyConv3dScorer(small_arch(), 1).parameters().size(), ToyConv3dScorer::parameter_count(small_arch()));
  const ToyConv3dScorer a(small_arch(), 4), b(small_arch(), 4), c(small_arch(), 5);
  EXPECT_TRUE(std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin()));
  EXPECT_FALSE(std::equal(a.parameters().begin(), a.parameters().end(), c.parameters().begin()));
  EXPECT_THROW(ToyConv3dScorer(small_arch(), std::vector<double>(3)), ContractError);
  EXPECT_THROW(a.score(VideoTensor({4, 14, 13}, 1)), ContractError);
  EXPECT_THROW(a.input_gradient(VideoTensor({4, 14, 14}, 1), 3), ParameterError);
}

TEST(Layers, ParallelConvMatchesSerial) {
  FeatureMap in{{3, 6, 7}, 2, {}};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  in.values.resize(in.shape.count() * 2);
  for (double& v : in.values) v = u(rng);
  std::vector<double> w(27 * 2 * 3), b(3);
  for (double& v : w) v = u(rng);
  for (double& v : b) v = u(rng);
  const FeatureMap out = layers::conv3_forward(in, w, b, 3);
  const FeatureMap ref = layers::serial::conv3_forward(in, w, b, 3);
  ASSERT_EQ(out.values.size(), ref.values.size());
  for (std::size_t k = 0; k < out.values.size(); ++k) EXPECT_NEAR(out.values[k], ref.values[k], 1e-12);

  FeatureMap go = out;
  for (double& v : go.values) v = u(rng);
  FeatureMap gi, gi_ref;
  std::vector<double> gw(w.size(), 0.0), gb(3, 0.0), gw_ref(w.size(), 0.0), gb_ref(3, 0.0);
  layers::conv3_backward(in, w, go, &gi, gw, gb);
  layers::serial::conv3_backward(in, w, go, &gi_ref, gw_ref, gb_ref);
  for (std::size_t k = 0; k < gi.values.size(); ++k) EXPECT_NEAR(gi.values[k], gi_ref.values[k], 1e-12);
  for (std::size_t k = 0; k < gw.size(); ++k) EXPECT_NEAR(gw[k], gw_ref[k], 1e-12);
  for (std::size_t k = 0; k < gb.size(); ++k) EXPECT_NEAR(gb[k], gb_ref[k], 1e-12);
}

TEST(Layers, AvgPoolBackwardIsAdjoint) {
  FeatureMap in{{2, 5, 7}, 3, std::vector<double>(2 * 5 * 7 * 3)};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : in.values) v = u(rng);
  const FeatureMap out = layers::avg_pool_spatial(in, 2);
  EXPECT_EQ(out.shape, (Shape3{2, 3, 4}));
  FeatureMap y = out;
  for (double& v : y.values) v = u(rng);
  const FeatureMap back = layers::avg_pool_spatial_backward(y, in.shape, 2);
  double lhs = 0, rhs = 0;
  for (std::size_t k = 0; k < y.values.size(); ++k) lhs += out.values[k] * y.values[k];
  for (std::size_t k = 0; k < in.values.size(); ++k) rhs += in.values[k] * back.values[k];
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(Training, EmptyDatasetRejected) {
  std::vector<LabeledVideo> none;
  EXPECT_THROW(train_toy(none, small_arch(), {}), ParameterError);
}

TEST(Training, ZeroEpochsIsChanceLevelAndDeterministic) {
  SynthSpec spec;
  spec.frames = 4;
  spec.size = 16;
  spec.shape_scale = 6;
  spec.videos_per_class = 6;
  spec.num_classes = 3;
  const auto data = generate(spec);
  std::vector<LabeledVideo> set;
  for (const auto& d : data) set.push_back({&d.video, d.label});
  ToyArch a = small_arch();
  a.input = {4, 16, 16};
  ToyTrainConfig cfg;
  cfg.epochs = 0;
  const auto r0 = train_toy(set, a, cfg);
  EXPECT_NEAR(r0.train_accuracy, 1.0 / 3.0, 0.1);

  cfg.epochs = 2;
  const auto r1 = train_toy(set, a, cfg), r2 = train_toy(set, a, cfg);
  ASSERT_EQ(r1.model.parameters().size(), r2.model.parameters().size());
  EXPECT_TRUE(std::equal(r1.model.parameters().begin(), r1.model.parameters().end(), r2.model.parameters().begin()));
  EXPECT_EQ(r1.epoch_loss, r2.epoch_loss);
}

}  // namespace
}  // namespace vattr
