#include "vattr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "vattr/error.hpp"

namespace vattr {

std::string to_string(ShapeKind s) {
  switch (s) {
    case ShapeKind::square: return "square";
    case ShapeKind::circle: return "circle";
    case ShapeKind::cross: return "cross";
    case ShapeKind::triangle: return "triangle";
  }
  return "?";
}

std::string to_string(Trajectory t) { return t == Trajectory::linear ? "linear" : "sinusoidal"; }

Trajectory parse_trajectory(const std::string& text) {
  if (text == "linear") return Trajectory::linear;
  if (text == "sinusoidal") return Trajectory::sinusoidal;
  throw ParameterError("trajectory must be linear or sinusoidal, got '" + text + "'");
}

void SynthSpec::validate() const {
  if (num_classes < 1 || num_classes > 4) throw ParameterError("synth: num_classes must lie in [1, 4]");
  if (videos_per_class < 1) throw ParameterError("synth: videos_per_class must be >= 1");
  if (frames < 1 || size < 1) throw ParameterError("synth: frames and size must be >= 1");
  if (shape_scale < 3) throw ParameterError("synth: shape scale must be >= 3 px");
  // A box no larger than a quarter of the frame keeps the pointing game meaningful.
  if (shape_scale * 2 > size) throw ParameterError("synth: shape too large for the frame");
  if (!(noise_sigma >= 0.0)) throw ParameterError("synth: noise sigma must be >= 0");
  if (channels != 1 && channels != 3) throw ParameterError("synth: channels must be 1 or 3");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::uint8_t> shape_stamp(ShapeKind kind, std::size_t s) {
  std::vector<std::uint8_t> st(s * s, 0);
  const double c = (static_cast<double>(s) - 1.0) / 2.0;
  const double r = static_cast<double>(s) / 2.0;
  const double arm = static_cast<double>(s) / 6.0;
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) {
      const double di = static_cast<double>(i) - c, dj = static_cast<double>(j) - c;
      bool on = false;
      switch (kind) {
        case ShapeKind::square: on = true; break;
        case ShapeKind::circle: on = di * di + dj * dj <= r * r; break;
        case ShapeKind::cross: on = std::abs(di) <= arm || std::abs(dj) <= arm; break;
        case ShapeKind::triangle: on = std::abs(dj) <= (static_cast<double>(i) + 0.5) / 2.0; break;
      }
      st[i * s + j] = on ? 1 : 0;
    }
  return st;
}

std::vector<SynthSample> generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.num_classes * spec.videos_per_class;
  const Shape3 shape{spec.frames, spec.size, spec.size};
  const std::size_t s = spec.shape_scale;
  const double span = static_cast<double>(spec.size - s);
  std::vector<SynthSample> out(n);
#pragma omp parallel for schedule(static)
  for (long nl = 0; nl < static_cast<long>(n); ++nl) {
    const std::size_t idx = static_cast<std::size_t>(nl);
    std::mt19937_64 rng(derive_seed(spec.seed, idx));
    std::normal_distribution<double> noise(0.5, spec.noise_sigma);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SynthSample& smp = out[idx];
    smp.label = idx % spec.num_classes;
    smp.video = VideoTensor(shape, spec.channels, 0.5);
    if (spec.noise_sigma > 0.0)
      for (double& v : smp.video.values()) v = noise(rng);

    // Top-left corner of the stamp per frame.
    const double y0 = unit(rng) * span, x0 = unit(rng) * span;
    const double y1 = unit(rng) * span, x1 = unit(rng) * span;
    const double phase = unit(rng) * 2.0 * std::numbers::pi;
    std::vector<long> top(spec.frames), left(spec.frames);
    for (std::size_t t = 0; t < spec.frames; ++t) {
      const double a = spec.frames > 1 ? static_cast<double>(t) / static_cast<double>(spec.frames - 1) : 0.0;
      double y = y0 + (y1 - y0) * a;
      const double x = x0 + (x1 - x0) * a;
      if (spec.trajectory == Trajectory::sinusoidal) {
        // Oscillate around the midline with the largest amplitude that stays in frame.
        const double mid = span / 2.0;
        y = mid + std::min(std::abs(y0 - mid), mid) * std::sin(2.0 * std::numbers::pi * a + phase);
      }
      top[t] = std::clamp(std::lround(y), 0L, static_cast<long>(spec.size - s));
      left[t] = std::clamp(std::lround(x), 0L, static_cast<long>(spec.size - s));
    }

    const auto stamp = shape_stamp(static_cast<ShapeKind>(smp.label), s);
    smp.tube_mask = Volume(shape, 0.0);
    smp.boxes.assign(spec.frames, std::nullopt);
    for (std::size_t t = 0; t < spec.frames; ++t) {
      Box b{std::numeric_limits<long>::max(), std::numeric_limits<long>::max(), -1, -1};
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j) {
          if (!stamp[i * s + j]) continue;
          const long pi = top[t] + static_cast<long>(i), pj = left[t] + static_cast<long>(j);
          for (std::size_t c = 0; c < spec.channels; ++c) smp.video(t, pi, pj, c) = 1.0;
          smp.tube_mask(t, pi, pj) = 1.0;
          b.i0 = std::min(b.i0, pi);
          b.j0 = std::min(b.j0, pj);
          b.i1 = std::max(b.i1, pi);
          b.j1 = std::max(b.j1, pj);
        }
      smp.boxes[t] = b;
    }
  }
  return out;
}

VideoTensor dataset_mean(std::span<const VideoTensor> videos) {
  if (videos.empty()) throw ParameterError("dataset_mean: no samples");
  VideoTensor mean(videos.front().frame_shape(), videos.front().channels(), 0.0);
  for (const auto& v : videos) {
    if (!(v.frame_shape() == mean.frame_shape()) || v.channels() != mean.channels()) {
      throw ContractError("dataset_mean: inconsistent sample shapes");
    }
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += v[k];
  }
  const double inv = static_cast<double>(videos.size());
  for (double& v : mean.values()) v /= inv;
  return mean;
}

VideoTensor dataset_mean(std::span<const SynthSample> samples) {
  if (samples.empty()) throw ParameterError("dataset_mean: no samples");
  std::vector<VideoTensor> videos;
  videos.reserve(samples.size());
  for (const auto& s : samples) videos.push_back(s.video);
  return dataset_mean(videos);
}

Volume box_mask(const BoxTrack& boxes, Shape3 shape) {
  if (boxes.size() != shape.t) throw ContractError("box_mask: need one entry per frame");
  Volume m(shape, 0.0);
  for (std::size_t t = 0; t < shape.t; ++t) {
    if (!boxes[t]) continue;
    const Box& b = *boxes[t];
    for (long i = std::max(0L, b.i0); i <= std::min<long>(b.i1, static_cast<long>(shape.h) - 1); ++i)
      for (long j = std::max(0L, b.j0); j <= std::min<long>(b.j1, static_cast<long>(shape.w) - 1); ++j)
        m(t, i, j) = 1.0;
  }
  return m;
}

}  // namespace vattr
