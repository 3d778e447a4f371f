#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "support/expect.hpp"
#include "support/oracles.hpp"
#include "vattr/error.hpp"
#include "vattr/kernels.hpp"
#include "vattr/step.hpp"

namespace vattr {
namespace {

using testing::random_video;
using testing::random_volume;
using testing::expect_close;

TEST(Hadamard, IdentityZeroAndArithmetic) {
  const Volume x = random_volume({2, 3, 4}, 1);
  EXPECT_EQ(hadamard(Volume(x.shape(), 1.0), x), x);
  EXPECT_EQ(hadamard(Volume(x.shape(), 0.0), x), Volume(x.shape(), 0.0));
  const Volume a({1, 1, 2}, {0.5, 2.0}), b({1, 1, 2}, {4.0, 3.0});
  EXPECT_EQ(hadamard(a, b), Volume({1, 1, 2}, {2.0, 6.0}));
  EXPECT_THROW(hadamard(a, Volume({1, 2, 1})), ContractError);
}

TEST(ReflectIndex, MirrorsWithoutRepeatingEdge) {
  EXPECT_EQ(reflect_index(-1, 4), 1u);
  EXPECT_EQ(reflect_index(-3, 4), 3u);
  EXPECT_EQ(reflect_index(4, 4), 2u);
  EXPECT_EQ(reflect_index(2, 4), 2u);
  EXPECT_EQ(reflect_index(-5, 1), 0u);
  // Far outside the range still lands inside it.
  for (long i = -40; i < 40; ++i) EXPECT_LT(reflect_index(i, 3), 3u);
}

TEST(GaussianBlur, PreservesConstants) {
  const VideoTensor c({2, 9, 11}, 3, 0.37);
  const VideoTensor b = gaussian_blur2d(c, 2.5);
  for (double v : b.values()) EXPECT_NEAR(v, 0.37, 1e-12);
}

TEST(GaussianBlur, ImpulseGivesNormalizedBump) {
  VideoTensor x({1, 21, 21}, 1, 0.0);
  x(0, 10, 10) = 1.0;
  const VideoTensor b = gaussian_blur2d(x, 1.0);
  const auto taps = gaussian_taps(1.0);
  ASSERT_EQ(taps.size(), 5u);  // half-width ceil(2 * sigma)
  double sum = 0.0;
  for (std::size_t i = 0; i < 21; ++i)
    for (std::size_t j = 0; j < 21; ++j) {
      sum += b(0, i, j);
      const long di = static_cast<long>(i) - 10, dj = static_cast<long>(j) - 10;
      const double expect = std::abs(di) <= 2 && std::abs(dj) <= 2 ? taps[di + 2] * taps[dj + 2] : 0.0;
      EXPECT_NEAR(b(0, i, j), expect, 1e-15);
    }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(GaussianBlur, InteriorMeanPreserved) {
  VideoTensor x({1, 64, 64}, 1, 0.0);
  const VideoTensor noise = random_video({1, 20, 20}, 1, 3);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) x(0, 22 + i, 22 + j) = noise(0, i, j);
  const VideoTensor b = gaussian_blur2d(x, 2.0);
  double s0 = 0, s1 = 0;
  for (std::size_t k = 0; k < x.size(); ++k) s0 += x[k], s1 += b[k];
  EXPECT_NEAR(s0 / 4096.0, s1 / 4096.0, 1e-9);
}

TEST(GaussianBlur, Linear) {
  const VideoTensor x = random_video({2, 12, 10}, 3, 4), y = random_video({2, 12, 10}, 3, 5);
  VideoTensor z(x.frame_shape(), 3);
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = 2.0 * x[k] - 0.7 * y[k];
  const VideoTensor bx = gaussian_blur2d(x, 1.7), by = gaussian_blur2d(y, 1.7), bz = gaussian_blur2d(z, 1.7);
  for (std::size_t k = 0; k < z.size(); ++k) EXPECT_NEAR(bz[k], 2.0 * bx[k] - 0.7 * by[k], 1e-9);
}

TEST(GaussianBlur, RejectsNonPositiveSigma) {
  EXPECT_THROW(gaussian_blur2d(VideoTensor({1, 4, 4}, 1), 0.0), ParameterError);
  EXPECT_THROW(gaussian_blur2d(VideoTensor({1, 4, 4}, 1), -1.0), ParameterError);
}

TEST(GaussianBlur, ParallelMatchesSerial) {
  const VideoTensor x = random_video({3, 17, 23}, 3, 6);
  const VideoTensor a = gaussian_blur2d(x, 3.3), b = serial::gaussian_blur2d(x, 3.3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
}

TEST(Conv3d, OutputShapeArithmetic) {
  EXPECT_EQ(conv3d_output_shape({16, 112, 112}, {8, 11, 11}, {1, 11, 11}, 0), (Shape3{9, 10, 10}));
  EXPECT_EQ(conv3d_output_shape({4, 8, 8}, {3, 3, 3}, {1, 1, 1}, 1), (Shape3{4, 8, 8}));
  EXPECT_THROW(conv3d_output_shape({2, 8, 8}, {3, 3, 3}, {1, 1, 1}, 0), ParameterError);
}

TEST(Conv3d, AllOnesWithNormalizedKernel) {
  const Volume m({5, 9, 9}, 1.0);
  const Volume out = conv3d(m, ellipsoid_kernel(3, 5, 5), {1, 2, 2}, 0);
  for (double v : out.values()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Conv3d, IdentityKernel) {
  const Volume m = random_volume({3, 5, 6}, 7);
  EXPECT_EQ(conv3d(m, Kernel3D(Volume({1, 1, 1}, 1.0)), {1, 1, 1}, 0), m);
}

TEST(Conv3d, MatchesLoopOracle) {
  const Volume m = random_volume({4, 8, 8}, 8);
  const Kernel3D k = ellipsoid_kernel(3, 3, 3);
  for (std::size_t pad : {0u, 1u}) {
    for (Stride3 st : {Stride3{1, 1, 1}, Stride3{1, 2, 3}, Stride3{2, 3, 2}}) {
      const Volume got = conv3d(m, k, st, pad);
      const Volume want = testing::conv3d_loops(m, k.weights(), st, pad);
      ASSERT_EQ(got.shape(), want.shape());
      for (std::size_t e = 0; e < got.size(); ++e) EXPECT_NEAR(got[e], want[e], 1e-12);
      EXPECT_EQ(got, serial::conv3d(m, k, st, pad));
    }
  }
}

TEST(Conv3d, UnitIntervalPreserved) {
  const Volume m = random_volume({6, 10, 10}, 9);
  const Volume out = conv3d(m, ellipsoid_kernel(3, 5, 5), {1, 1, 1}, 0);
  for (double v : out.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Conv3d, KernelLargerThanInputRejected) {
  EXPECT_THROW(conv3d(Volume({2, 5, 5}), ellipsoid_kernel(3, 3, 3), {1, 1, 1}, 0), ParameterError);
}

TEST(Conv3d, AdjointIdentity) {
  const Shape3 in{5, 13, 12};
  const Kernel3D k = ellipsoid_kernel(3, 5, 3);
  for (std::size_t pad : {0u, 2u}) {
    const Stride3 st{1, 3, 2};
    const Volume x = random_volume(in, 10, -1, 1);
    const Volume y = random_volume(conv3d_output_shape(in, k.shape(), st, pad), 11, -1, 1);
    const Volume ax = conv3d(x, k, st, pad), aty = conv3d_adjoint(y, k, in, st, pad);
    double lhs = 0, rhs = 0;
    for (std::size_t e = 0; e < ax.size(); ++e) lhs += ax[e] * y[e];
    for (std::size_t e = 0; e < x.size(); ++e) rhs += x[e] * aty[e];
    EXPECT_NEAR(lhs, rhs, 1e-10);
    expect_close(aty, serial::conv3d_adjoint(y, k, in, st, pad));
  }
}

TEST(Vecsort, Examples) {
  EXPECT_EQ(vecsort(Volume({1, 1, 3}, {0.2, 0.9, 0.5})), (std::vector<double>{0.9, 0.5, 0.2}));
  EXPECT_EQ(vecsort(Volume({2, 2, 2}, 0.3)), std::vector<double>(8, 0.3));
}

// Top-down merge sort written independently of the standard library sorts.
std::vector<double> merge_sort_desc(std::vector<double> v) {
  if (v.size() < 2) return v;
  std::vector<double> l(v.begin(), v.begin() + static_cast<long>(v.size() / 2)), r(v.begin() + static_cast<long>(v.size() / 2), v.end());
  l = merge_sort_desc(l);
  r = merge_sort_desc(r);
  std::size_t a = 0, b = 0, k = 0;
  while (a < l.size() && b < r.size()) v[k++] = l[a] >= r[b] ? l[a++] : r[b++];
  while (a < l.size()) v[k++] = l[a++];
  while (b < r.size()) v[k++] = r[b++];
  return v;
}

TEST(Vecsort, MatchesMergeSortOracle) {
  const Volume m = random_volume({10, 10, 10}, 12);
  EXPECT_EQ(vecsort(m), merge_sort_desc({m.values().begin(), m.values().end()}));
}

TEST(DescendingOrder, TiesKeepIndexOrder) {
  const std::vector<double> v{0.5, 0.9, 0.5, 0.1, 0.9};
  EXPECT_EQ(descending_order(v), (std::vector<std::size_t>{1, 4, 0, 2, 3}));
}

TEST(Upsample, ConstantSeedStaysConstant) {
  const Volume out = upsample_smooth(Volume({2, 3, 4}, 0.5), 7);
  EXPECT_EQ(out.shape(), (Shape3{2, 21, 28}));
  for (double v : out.values()) EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(Upsample, FactorOneTinySigmaIsIdentity) {
  const Volume seed = random_volume({2, 4, 5}, 13);
  const Volume out = upsample_smooth(seed, 1, 1e-3);
  for (std::size_t e = 0; e < seed.size(); ++e) EXPECT_NEAR(out[e], seed[e], 1e-12);
}

TEST(Upsample, ImpulseArgmaxAtMappedLocation) {
  // Centre cell, so the renormalization is symmetric around it.
  Volume seed({1, 5, 5}, 0.0);
  seed(0, 2, 2) = 1.0;
  const Volume out = upsample_smooth(seed, 7);
  std::size_t best = 0;
  for (std::size_t e = 0; e < out.size(); ++e)
    if (out[e] > out[best]) best = e;
  EXPECT_EQ(best / 35, 2u * 7 + 3);
  EXPECT_EQ(best % 35, 2u * 7 + 3);
}

TEST(Upsample, StaysWithinSeedExtrema) {
  const Volume seed = random_volume({3, 4, 4}, 14, 0.2, 0.8);
  const Volume out = upsample_smooth(seed, 7, 3.5, 26, 27);
  EXPECT_EQ(out.shape(), (Shape3{3, 26, 27}));
  for (double v : out.values()) {
    EXPECT_GE(v, seed.min() - 1e-12);
    EXPECT_LE(v, seed.max() + 1e-12);
  }
}

TEST(Upsample, AdjointIdentityAndSerialParity) {
  const Shape3 s{2, 3, 4};
  const Volume seed = random_volume(s, 15, -1, 1);
  const Volume up = upsample_smooth(seed, 7, 3.5, 20, 26);
  const Volume y = random_volume(up.shape(), 16, -1, 1);
  const Volume back = upsample_smooth_adjoint(y, s, 7, 3.5);
  double lhs = 0, rhs = 0;
  for (std::size_t e = 0; e < up.size(); ++e) lhs += up[e] * y[e];
  for (std::size_t e = 0; e < seed.size(); ++e) rhs += seed[e] * back[e];
  EXPECT_NEAR(lhs, rhs, 1e-10);
  expect_close(up, serial::upsample_smooth(seed, 7, 3.5, 20, 26));
}

TEST(Upsample, RejectsZeroFactor) { EXPECT_THROW(upsample_smooth(Volume({1, 2, 2}), 0), ParameterError); }

TEST(Normalize, MinMaxAndConstant) {
  const Volume v({1, 1, 3}, {2.0, 4.0, 3.0});
  EXPECT_EQ(minmax_normalize(v), Volume({1, 1, 3}, {0.0, 1.0, 0.5}));
  EXPECT_EQ(minmax_normalize(Volume({1, 2, 2}, 7.0)), Volume({1, 2, 2}, 0.0));
}

}  // namespace
}  // namespace vattr
