#include "vattr/step.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vattr/error.hpp"
#include "vattr/kernels.hpp"
#include "vattr/perturbation.hpp"

namespace vattr {

namespace {

// Values closer than this are treated as one rank block in the area gradient.
constexpr double kTieTolerance = 1e-12;

double sorted_template_loss(std::span<const double> values, std::size_t ones, std::span<double> grad) {
  const auto order = descending_order(values);
  const std::size_t n = values.size();
  double loss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = values[order[k]] - (k < ones ? 1.0 : 0.0);
    loss += d * d;
  }
  if (grad.empty()) return loss;
  std::size_t a = 0;
  while (a < n) {
    std::size_t b = a + 1;
    while (b < n && values[order[a]] - values[order[b]] <= kTieTolerance) ++b;
    const std::size_t block_ones = ones > a ? std::min(ones - a, b - a) : 0;
    const double rbar = static_cast<double>(block_ones) / static_cast<double>(b - a);
    for (std::size_t k = a; k < b; ++k) grad[order[k]] = 2.0 * (values[order[k]] - rbar);
    a = b;
  }
  return loss;
}

}  // namespace

void StepConfig::validate() const {
  if (areas.empty()) throw ParameterError("step: at least one area is required");
  for (std::size_t k = 0; k < areas.size(); ++k) {
    if (!(areas[k] > 0.0 && areas[k] <= 1.0)) throw ParameterError("step: areas must lie in (0, 1]");
    if (k > 0 && !(areas[k] > areas[k - 1])) throw ParameterError("step: areas must be strictly ascending");
  }
  if (!(lambda1 > 0.0)) throw ParameterError("step: lambda1 must be > 0");
  if (smoothness_enabled() && !(lambda2_final > 0.0)) throw ParameterError("step: lambda2 must be > 0");
  if (!(lambda2_warmup_fraction >= 0.0 && lambda2_warmup_fraction <= 1.0)) {
    throw ParameterError("step: lambda2 warm-up fraction must lie in [0, 1]");
  }
  if (iterations < 1) throw ParameterError("step: iterations must be >= 1");
  if (!(lr > 0.0)) throw ParameterError("step: lr must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ParameterError("step: momentum must lie in [0, 1)");
  if (seed_scale < 1) throw ParameterError("step: seed scale must be >= 1");
  if (!(upsample_sigma > 0.0)) throw ParameterError("step: upsample sigma must be > 0");
  if (!(blur_sigma > 0.0)) throw ParameterError("step: blur sigma must be > 0");
  if (phi0 && !(*phi0 >= 0.0)) throw ParameterError("step: phi0 must be >= 0");
  if (!(phi0_fraction > 0.0 && phi0_fraction < 1.0)) throw ParameterError("step: phi0 fraction must lie in (0, 1)");
  if (heatmap_sigma < 0.0) throw ParameterError("step: heatmap sigma must be >= 0");
  if (smoothness_enabled() && (kernel_stride.t == 0 || kernel_stride.h == 0 || kernel_stride.w == 0)) {
    throw ParameterError("step: kernel strides must be >= 1");
  }
}

Kernel3D ellipsoid_kernel(std::size_t tk, std::size_t hk, std::size_t wk) {
  if (tk == 0 || hk == 0 || wk == 0) throw ParameterError("ellipsoid kernel dims must be >= 1");
  auto coord = [](std::size_t x, std::size_t k) {
    if (k == 1) return 0.0;
    return 2.0 * static_cast<double>(x) / static_cast<double>(k - 1) - 1.0;
  };
  Volume w({tk, hk, wk}, 0.0);
  std::size_t z = 0;
  for (std::size_t t = 0; t < tk; ++t)
    for (std::size_t i = 0; i < hk; ++i)
      for (std::size_t j = 0; j < wk; ++j) {
        const double a = coord(t, tk), b = coord(i, hk), c = coord(j, wk);
        if (a * a + b * b + c * c <= 1.0) {
          w(t, i, j) = 1.0;
          ++z;
        }
      }
  for (double& v : w.values()) v /= static_cast<double>(z);
  return Kernel3D(std::move(w));
}

std::size_t template_ones(std::size_t n, double v) {
  const double ones = std::floor(v * static_cast<double>(n) + 0.5);
  return std::min(n, static_cast<std::size_t>(std::max(0.0, ones)));
}

double loss_area(const Volume& m, double v, Volume* grad) {
  if (!(v > 0.0 && v <= 1.0)) throw ParameterError("loss_area: v must lie in (0, 1]");
  std::span<double> g;
  if (grad) {
    *grad = Volume(m.shape(), 0.0);
    g = grad->values();
  }
  return sorted_template_loss(m.values(), template_ones(m.size(), v), g);
}

double smooth_beta(Shape3 mask, Shape3 kernel, Stride3 stride, std::size_t padding, SmoothBeta rule) {
  const double n = static_cast<double>(mask.count());
  if (rule == SmoothBeta::strided_output) {
    return n / static_cast<double>(conv3d_output_shape(mask, kernel, stride, padding).count());
  }
  return n / (static_cast<double>(mask.t + kernel.t - 1) * static_cast<double>(mask.h + kernel.h - 1) *
              static_cast<double>(mask.w + kernel.w - 1));
}

double loss_smooth(const Volume& m, double v, const Kernel3D& k, Stride3 stride, std::size_t padding,
                   SmoothBeta rule, Volume* grad) {
  if (!(v > 0.0 && v <= 1.0)) throw ParameterError("loss_smooth: v must lie in (0, 1]");
  const Volume y = conv3d(m, k, stride, padding);
  const double bv = std::min(1.0, smooth_beta(m.shape(), k.shape(), stride, padding, rule) * v);
  const std::size_t ones = template_ones(y.size(), bv);
  if (!grad) return sorted_template_loss(y.values(), ones, {});
  Volume gy(y.shape(), 0.0);
  const double loss = sorted_template_loss(y.values(), ones, gy.values());
  *grad = conv3d_adjoint(gy, k, m.shape(), stride, padding);
  return loss;
}

Shape3 seed_shape_for(Shape3 video, std::size_t scale) {
  if (scale < 1) throw ParameterError("seed scale must be >= 1");
  return {video.t, (video.h + scale - 1) / scale, (video.w + scale - 1) / scale};
}

Volume upsample_seed(const Volume& seed, Shape3 video, const StepConfig& cfg) {
  Volume m = upsample_smooth(seed, cfg.seed_scale, cfg.upsample_sigma, video.h, video.w);
  clamp_inplace(m);
  return m;
}

ObjectiveTerms step_objective(const VideoTensor& x, const VideoTensor& baseline, const Scorer& scorer,
                              std::size_t c, double v, const Volume& seed, double lambda1, double lambda2,
                              const StepConfig& cfg, Volume* seed_grad) {
  const Shape3 shape = x.frame_shape();
  if (!(seed.shape() == seed_shape_for(shape, cfg.seed_scale))) {
    throw ContractError("step_objective: seed shape does not match the video");
  }
  const Volume m = upsample_seed(seed, shape, cfg);
  const bool want = seed_grad != nullptr;
  // Both template losses enter per element so the weights do not depend on resolution.
  const double a1 = lambda1 / static_cast<double>(m.size());
  double a2 = 0.0;
  ObjectiveTerms terms;
  Volume g_area, g_smooth;
  terms.area = loss_area(m, v, want ? &g_area : nullptr);
  const bool smooth = cfg.smoothness_enabled() && lambda2 > 0.0;
  if (smooth) {
    const Kernel3D k = ellipsoid_kernel(cfg.kernel.t, cfg.kernel.h, cfg.kernel.w);
    a2 = lambda2 / static_cast<double>(conv3d_output_shape(shape, k.shape(), cfg.kernel_stride, cfg.kernel_padding).count());
    terms.smooth = loss_smooth(m, v, k, cfg.kernel_stride, cfg.kernel_padding, cfg.beta_rule,
                               want ? &g_smooth : nullptr);
  }
  const VideoTensor xp = perturb_with(x, m, baseline);
  if (!want) {
    terms.phi = scorer.probability(xp, c);
  } else {
    ScoreGrad sg = scorer.score_and_gradient(xp, c);
    terms.phi = sg.probs[c];
    Volume g_phi = perturb_mask_gradient(x, baseline, sg.gradient);
    Volume g(shape, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
      g[k] = a1 * g_area[k] - g_phi[k];
      if (smooth) g[k] += a2 * g_smooth[k];
    }
    *seed_grad = upsample_smooth_adjoint(g, seed.shape(), cfg.seed_scale, cfg.upsample_sigma);
  }
  terms.value = a1 * terms.area + (smooth ? a2 * terms.smooth : 0.0) - terms.phi;
  return terms;
}

MaskResult optimize_mask(const VideoTensor& x, const Scorer& scorer, std::size_t c, double v,
                         const StepConfig& cfg) {
  cfg.validate();
  if (!(v > 0.0 && v <= 1.0)) throw ParameterError("optimize_mask: v must lie in (0, 1]");
  if (!(x.frame_shape() == scorer.input_shape()) || x.channels() != scorer.input_channels()) {
    throw ContractError("optimize_mask: video shape does not match the scorer");
  }
  const Shape3 shape = x.frame_shape();
  const VideoTensor baseline = gaussian_blur2d(x, cfg.blur_sigma);
  Volume seed(seed_shape_for(shape, cfg.seed_scale), 0.5);
  if (cfg.initial_seed) {
    if (!(cfg.initial_seed->shape() == seed.shape())) throw ContractError("optimize_mask: initial seed has the wrong shape");
    seed = *cfg.initial_seed;
    clamp_inplace(seed);
  }
  Volume velocity(seed.shape(), 0.0);
  // Diagonal preconditioner: each seed cell's gradient is divided by the total
  // upsampling weight it receives, so a spatially uniform pixel gradient moves
  // every cell equally (border cells cover fewer pixels).
  const Volume coverage = upsample_smooth_adjoint(Volume(shape, 1.0), seed.shape(), cfg.seed_scale,
                                                  cfg.upsample_sigma);
  Volume grad;
  double scale = 0.0;
  const auto warmup = static_cast<std::size_t>(std::ceil(cfg.lambda2_warmup_fraction * static_cast<double>(cfg.iterations)));
  MaskResult result;
  result.trace.reserve(cfg.iterations);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const double lambda2 = it < warmup ? 0.01 * cfg.lambda2_final : cfg.lambda2_final;
    const ObjectiveTerms terms = step_objective(x, baseline, scorer, c, v, seed, cfg.lambda1, lambda2, cfg, &grad);
    if (!std::isfinite(terms.value)) throw NumericError("optimize_mask: non-finite objective", it);
    for (double gk : grad.values())
      if (!std::isfinite(gk)) throw NumericError("optimize_mask: non-finite gradient", it);
    result.trace.push_back(terms);
    // The first gradient calibrates the step size; after that this is plain
    // SGD with momentum on a fixed rescaling of the objective.
    if (it == 0) {
      for (std::size_t k = 0; k < seed.size(); ++k) scale = std::max(scale, std::abs(grad[k] / coverage[k]));
      if (!(scale > 0.0)) scale = 1.0;
    }
    for (std::size_t k = 0; k < seed.size(); ++k) {
      velocity[k] = cfg.momentum * velocity[k] + grad[k] / coverage[k] / scale;
      seed[k] -= cfg.lr * velocity[k];
    }
    clamp_inplace(seed);
  }
  result.mask = upsample_seed(seed, shape, cfg);
  result.phi = scorer.probability(perturb_with(x, result.mask, baseline), c);
  result.seed = std::move(seed);
  return result;
}

ExtremalChoice select_extremal(std::span<const double> areas, std::span<const double> phis, double phi0) {
  if (areas.empty() || areas.size() != phis.size()) throw ParameterError("select_extremal: need one output per area");
  for (std::size_t k = 1; k < areas.size(); ++k)
    if (!(areas[k] > areas[k - 1])) throw ParameterError("select_extremal: areas must be ascending");
  for (std::size_t k = 0; k < areas.size(); ++k)
    if (phis[k] >= phi0) return {k, areas[k], true};
  return {areas.size() - 1, areas.back(), false};
}

ExtremalChoice extremal_search(const VideoTensor& x, const Scorer& scorer, std::size_t c, const StepConfig& cfg) {
  cfg.validate();
  const double phi0 = cfg.phi0 ? *cfg.phi0 : cfg.phi0_fraction * scorer.probability(x, c);
  for (std::size_t k = 0; k < cfg.areas.size(); ++k) {
    if (optimize_mask(x, scorer, c, cfg.areas[k], cfg).phi >= phi0) return {k, cfg.areas[k], true};
  }
  return {cfg.areas.size() - 1, cfg.areas.back(), false};
}

Volume aggregate_heatmap(std::span<const Volume> masks, double sigma) {
  if (masks.empty()) throw ParameterError("aggregate_heatmap: no masks");
  if (sigma < 0.0) throw ParameterError("aggregate_heatmap: sigma must be >= 0");
  Volume sum(masks.front().shape(), 0.0);
  for (const Volume& m : masks) {
    if (!(m.shape() == sum.shape())) throw ContractError("aggregate_heatmap: mask shapes differ");
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += m[k];
  }
  if (sigma > 0.0) sum = gaussian_blur2d(sum, sigma);
  return minmax_normalize(sum);
}

StepResult run_step(const VideoTensor& x, const Scorer& scorer, std::size_t c, const StepConfig& cfg) {
  cfg.validate();
  StepResult r;
  r.areas = cfg.areas;
  r.phi_input = scorer.probability(x, c);
  r.phi0 = cfg.phi0 ? *cfg.phi0 : cfg.phi0_fraction * r.phi_input;
  for (double v : cfg.areas) {
    MaskResult m = optimize_mask(x, scorer, c, v, cfg);
    r.masks.push_back(std::move(m.mask));
    r.phis.push_back(m.phi);
    r.traces.push_back(std::move(m.trace));
  }
  r.extremal = select_extremal(r.areas, r.phis, r.phi0);
  r.heatmap = aggregate_heatmap(r.masks, cfg.heatmap_sigma);
  return r;
}

std::size_t count_components(const Volume& m, double threshold) {
  const Shape3 s = m.shape();
  std::vector<char> seen(m.size(), 0);
  std::vector<std::size_t> stack;
  std::size_t count = 0;
  for (std::size_t start = 0; start < m.size(); ++start) {
    if (seen[start] || !(m[start] >= threshold)) continue;
    ++count;
    seen[start] = 1;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      const std::size_t j = k % s.w, i = (k / s.w) % s.h, t = k / (s.w * s.h);
      auto visit = [&](std::size_t n) {
        if (!seen[n] && m[n] >= threshold) {
          seen[n] = 1;
          stack.push_back(n);
        }
      };
      if (t > 0) visit(k - s.h * s.w);
      if (t + 1 < s.t) visit(k + s.h * s.w);
      if (i > 0) visit(k - s.w);
      if (i + 1 < s.h) visit(k + s.w);
      if (j > 0) visit(k - 1);
      if (j + 1 < s.w) visit(k + 1);
    }
  }
  return count;
}

double mask_iou(const Volume& a, const Volume& b, double threshold) {
  if (!(a.shape() == b.shape())) throw ContractError("mask_iou: shape mismatch");
  std::size_t inter = 0, uni = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const bool x = a[k] >= threshold, y = b[k] >= threshold;
    inter += x && y;
    uni += x || y;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace vattr
