#include "vattr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vattr/error.hpp"
#include "vattr/kernels.hpp"

namespace vattr {

void BaselineConfig::validate() const {
  if (ig_steps < 1) throw ParameterError("ig_steps must be >= 1");
  if (sg_samples < 1) throw ParameterError("sg_samples must be >= 1");
  if (!(sg_sigma > 0.0)) throw ParameterError("sg_sigma must be > 0");
  if (!(big_sigma_max > 0.0)) throw ParameterError("big_sigma_max must be > 0");
  if (big_steps < 1) throw ParameterError("big_steps must be >= 1");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::step: return "step";
    case Method::grad: return "grad";
    case Method::gxi: return "gxi";
    case Method::ig: return "ig";
    case Method::sg: return "sg";
    case Method::sg2: return "sg2";
    case Method::big: return "big";
    case Method::gradcam: return "gradcam";
    case Method::random: return "random";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::step, Method::grad, Method::gxi, Method::ig, Method::sg, Method::sg2, Method::big,
                   Method::gradcam, Method::random}) {
    if (to_string(m) == name) return m;
  }
  throw ParameterError("unknown attribution method '" + name + "'");
}

Volume reduce_channels(const VideoTensor& g, ChannelReduce mode) {
  const std::size_t C = g.channels();
  Volume out(g.frame_shape());
  for (std::size_t k = 0; k < out.size(); ++k) {
    double acc = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double a = std::abs(g[k * C + c]);
      acc = mode == ChannelReduce::mean_abs ? acc + a : std::max(acc, a);
    }
    out[k] = mode == ChannelReduce::mean_abs ? acc / static_cast<double>(C) : acc;
  }
  return out;
}

Volume finalize_map(const VideoTensor& raw, ChannelReduce mode) { return minmax_normalize(reduce_channels(raw, mode)); }

Volume attribute_gradient(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg) {
  return finalize_map(scorer.input_gradient(x, c), cfg.channel_reduce);
}

Volume attribute_grad_x_input(const VideoTensor& x, const Scorer& scorer, std::size_t c,
                              const BaselineConfig& cfg) {
  return finalize_map(hadamard(scorer.input_gradient(x, c), x), cfg.channel_reduce);
}

VideoTensor integrated_gradients_raw(const VideoTensor& x, const Scorer& scorer, std::size_t c, std::size_t steps) {
  if (steps < 1) throw ParameterError("integrated gradients: steps must be >= 1");
  VideoTensor acc(x.frame_shape(), x.channels(), 0.0);
  VideoTensor point(x.frame_shape(), x.channels());
  for (std::size_t k = 1; k <= steps; ++k) {
    const double a = static_cast<double>(k) / static_cast<double>(steps);
    for (std::size_t e = 0; e < x.size(); ++e) point[e] = a * x[e];
    const VideoTensor g = scorer.input_gradient(point, c);
    for (std::size_t e = 0; e < x.size(); ++e) acc[e] += g[e];
  }
  for (std::size_t e = 0; e < x.size(); ++e) acc[e] *= x[e] / static_cast<double>(steps);
  return acc;
}

Volume attribute_ig(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg) {
  cfg.validate();
  return finalize_map(integrated_gradients_raw(x, scorer, c, cfg.ig_steps), cfg.channel_reduce);
}

VideoTensor smoothgrad_raw(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg,
                           bool squared) {
  cfg.validate();
  const double sigma = cfg.sg_sigma * (x.max() - x.min());
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  VideoTensor acc(x.frame_shape(), x.channels(), 0.0);
  VideoTensor noisy(x.frame_shape(), x.channels());
  for (std::size_t s = 0; s < cfg.sg_samples; ++s) {
    for (std::size_t e = 0; e < x.size(); ++e) noisy[e] = x[e] + sigma * noise(rng);
    const VideoTensor g = scorer.input_gradient(noisy, c);
    for (std::size_t e = 0; e < x.size(); ++e) acc[e] += squared ? g[e] * g[e] : g[e];
  }
  for (double& v : acc.values()) v /= static_cast<double>(cfg.sg_samples);
  return acc;
}

Volume attribute_sg(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg) {
  return finalize_map(smoothgrad_raw(x, scorer, c, cfg, false), cfg.channel_reduce);
}

Volume attribute_sg2(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg) {
  return finalize_map(smoothgrad_raw(x, scorer, c, cfg, true), cfg.channel_reduce);
}

VideoTensor blur_ig_raw(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg) {
  cfg.validate();
  const std::size_t m = cfg.big_steps;
  auto blurred = [&](std::size_t k) {
    const double sigma = static_cast<double>(k - 1) * cfg.big_sigma_max / static_cast<double>(m);
    return k == 1 ? x : gaussian_blur2d(x, sigma);
  };
  VideoTensor acc(x.frame_shape(), x.channels(), 0.0);
  VideoTensor current = blurred(1);
  for (std::size_t k = 1; k <= m; ++k) {
    VideoTensor next = blurred(k + 1);
    const VideoTensor g = scorer.input_gradient(current, c);
    for (std::size_t e = 0; e < x.size(); ++e) acc[e] += g[e] * (current[e] - next[e]);
    current = std::move(next);
  }
  return acc;
}

Volume attribute_big(const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg) {
  return finalize_map(blur_ig_raw(x, scorer, c, cfg), cfg.channel_reduce);
}

Volume trilinear_resize(const Volume& in, Shape3 out) {
  if (in.empty() || out.count() == 0) throw ParameterError("trilinear_resize: empty shape");
  struct Lerp {
    std::size_t lo, hi;
    double a;
  };
  auto axis = [](std::size_t n_in, std::size_t n_out) {
    std::vector<Lerp> l(n_out);
    const double scale = static_cast<double>(n_in) / static_cast<double>(n_out);
    for (std::size_t o = 0; o < n_out; ++o) {
      const double src = std::clamp((static_cast<double>(o) + 0.5) * scale - 0.5, 0.0, static_cast<double>(n_in - 1));
      const auto lo = static_cast<std::size_t>(std::floor(src));
      const std::size_t hi = std::min(lo + 1, n_in - 1);
      l[o] = {lo, hi, src - static_cast<double>(lo)};
    }
    return l;
  };
  const auto lt = axis(in.frames(), out.t), li = axis(in.height(), out.h), lj = axis(in.width(), out.w);
  Volume r(out);
  for (std::size_t t = 0; t < out.t; ++t)
    for (std::size_t i = 0; i < out.h; ++i)
      for (std::size_t j = 0; j < out.w; ++j) {
        const Lerp &a = lt[t], &b = li[i], &c = lj[j];
        auto plane = [&](std::size_t tt) {
          const double top = (1 - c.a) * in(tt, b.lo, c.lo) + c.a * in(tt, b.lo, c.hi);
          const double bot = (1 - c.a) * in(tt, b.hi, c.lo) + c.a * in(tt, b.hi, c.hi);
          return (1 - b.a) * top + b.a * bot;
        };
        r(t, i, j) = (1 - a.a) * plane(a.lo) + a.a * plane(a.hi);
      }
  return r;
}

Volume gradcam_raw(const ActivationTap& tap, Shape3 out_shape) {
  const FeatureMap& A = tap.activation;
  const FeatureMap& G = tap.gradient;
  if (!(A.shape == G.shape) || A.channels != G.channels) throw ContractError("gradcam: tap shapes differ");
  const std::size_t K = A.channels, npos = A.shape.count();
  std::vector<double> alpha(K, 0.0);
  for (std::size_t p = 0; p < npos; ++p)
    for (std::size_t k = 0; k < K; ++k) alpha[k] += G.values[p * K + k];
  for (double& a : alpha) a /= static_cast<double>(npos);
  Volume cam(A.shape, 0.0);
  for (std::size_t p = 0; p < npos; ++p) {
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) acc += alpha[k] * A.values[p * K + k];
    cam[p] = std::max(acc, 0.0);
  }
  return trilinear_resize(cam, out_shape);
}

Volume attribute_gradcam(const VideoTensor& x, const Scorer& scorer, std::size_t c) {
  if (!scorer.has_activation_tap()) throw UnsupportedError("gradcam needs a scorer with an activation tap");
  return minmax_normalize(gradcam_raw(scorer.activation_tap(x, c), x.frame_shape()));
}

Volume attribute_random(Shape3 shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Volume out(shape);
  for (double& v : out.values()) v = u(rng);
  return out;
}

Volume attribute(Method m, const VideoTensor& x, const Scorer& scorer, std::size_t c, const BaselineConfig& cfg) {
  switch (m) {
    case Method::grad: return attribute_gradient(x, scorer, c, cfg);
    case Method::gxi: return attribute_grad_x_input(x, scorer, c, cfg);
    case Method::ig: return attribute_ig(x, scorer, c, cfg);
    case Method::sg: return attribute_sg(x, scorer, c, cfg);
    case Method::sg2: return attribute_sg2(x, scorer, c, cfg);
    case Method::big: return attribute_big(x, scorer, c, cfg);
    case Method::gradcam: return attribute_gradcam(x, scorer, c);
    case Method::random: return attribute_random(x.frame_shape(), cfg.seed);
    case Method::step: break;
  }
  throw ParameterError("attribute: step is dispatched through run_step");
}

}  // namespace vattr
