#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "vattr/scorer.hpp"
#include "vattr/tensor.hpp"

namespace vattr {

enum class ChannelReduce { mean_abs, max_abs };

struct BaselineConfig {
  std::size_t ig_steps = 50;
  std::size_t sg_samples = 50;
  double sg_sigma = 0.15;  // fraction of the input value range
  double big_sigma_max = 50.0;
  std::size_t big_steps = 50;
  ChannelReduce channel_reduce = ChannelReduce::mean_abs;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class Method { step, grad, gxi, ig, sg, sg2, big, gradcam, random };

std::string to_string(Method m);
Method parse_method(const std::string& name);

// |g| collapsed over channels, then min-max normalized (all-zero stays zero).
Volume reduce_channels(const VideoTensor& g, ChannelReduce mode);
Volume finalize_map(const VideoTensor& raw, ChannelReduce mode);

Volume attribute_gradient(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg = {});
Volume attribute_grad_x_input(const VideoTensor& x, const Scorer& scorer, std::size_t c,
                              const BaselineConfig& cfg = {});

// Right-endpoint Riemann sum with a black baseline, before channel reduction:
//   x * (1/m) * sum_{k=1..m} grad Phi_c(k/m * x).
VideoTensor integrated_gradients_raw(const VideoTensor& x, const Scorer& scorer, std::size_t c, std::size_t steps);
Volume attribute_ig(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg = {});

// Mean gradient (SG) or mean squared gradient (SG2) over noisy copies.
VideoTensor smoothgrad_raw(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg,
                           bool squared);
Volume attribute_sg(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg = {});
Volume attribute_sg2(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg = {});

// Blur path sigma_k = (k-1) sigma_max / m, k = 1..m+1:
//   sum_{k=1..m} grad Phi_c(g(x, sigma_k)) * (g(x, sigma_k) - g(x, sigma_{k+1})).
VideoTensor blur_ig_raw(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg);
Volume attribute_big(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg = {});

// Channel weights are the mean tap gradient over (t, i, j); the ReLU of the
// weighted activation sum is resized trilinearly to the input grid.
Volume gradcam_raw(const ActivationTap& tap, Shape3 out_shape);
Volume attribute_gradcam(const VideoTensor& x, const Scorer& scorer, std::size_t c);

Volume attribute_random(Shape3 shape, std::uint64_t seed);

// Half-pixel-centred trilinear resize with edge clamping.
Volume trilinear_resize(const Volume& in, Shape3 out);

// Dispatches every method except step.
Volume attribute(Method m, const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg);

}  // namespace vattr
