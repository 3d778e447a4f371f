#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vattr/tensor.hpp"

namespace vattr {

enum class ShapeKind { square, circle, cross, triangle };
enum class Trajectory { linear, sinusoidal };

std::string to_string(ShapeKind s);
std::string to_string(Trajectory t);
Trajectory parse_trajectory(const std::string& text);

// Class k renders ShapeKind(k); at most four classes.
struct SynthSpec {
  std::size_t num_classes = 4;
  std::size_t videos_per_class = 16;
  std::size_t frames = 16;
  std::size_t size = 64;
  std::size_t shape_scale = 16;  // side of the shape's bounding square, px
  Trajectory trajectory = Trajectory::linear;
  double noise_sigma = 0.1;
  std::size_t channels = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthSample {
  VideoTensor video;
  std::size_t label = 0;
  BoxTrack boxes;     // tight box around the rendered shape, every frame
  Volume tube_mask;   // exact shape support
};

// Deterministic in (spec, seed). Sample n has label n % num_classes and its
// own generator derived from (seed, n); background noise is drawn before any
// class-dependent quantity so it follows the same schema for every class.
std::vector<SynthSample> generate(const SynthSpec& spec);

// Binary s x s stamp of a shape.
std::vector<std::uint8_t> shape_stamp(ShapeKind kind, std::size_t s);

VideoTensor dataset_mean(std::span<const SynthSample> samples);
VideoTensor dataset_mean(std::span<const VideoTensor> videos);

// Indicator of the per-frame boxes.
Volume box_mask(const BoxTrack& boxes, Shape3 shape);

// Deterministic 64-bit mix used to derive per-item seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace vattr
