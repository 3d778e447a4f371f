#include "vattr/toy_model.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "vattr/error.hpp"

namespace vattr {

namespace {

constexpr std::size_t kTaps = 27;

struct Offsets {
  std::size_t w1, b1, w2, b2, wfc, bfc, total;
};

Offsets offsets_for(const ToyArch& a) {
  Offsets o{};
  o.w1 = 0;
  o.b1 = o.w1 + a.conv1 * kTaps * a.channels;
  o.w2 = o.b1 + a.conv1;
  o.b2 = o.w2 + a.conv2 * kTaps * a.conv1;
  o.wfc = o.b2 + a.conv2;
  o.bfc = o.wfc + a.classes * a.conv2;
  o.total = o.bfc + a.classes;
  return o;
}

void validate(const ToyArch& a) {
  if (a.input.count() == 0) throw ParameterError("ToyArch: empty input shape");
  if (a.channels != 1 && a.channels != 3) throw ParameterError("ToyArch: channels must be 1 or 3");
  if (a.classes < 2) throw ParameterError("ToyArch: need at least two classes");
  if (a.conv1 == 0 || a.conv2 == 0 || a.pool == 0) throw ParameterError("ToyArch: layer sizes must be >= 1");
}

FeatureMap relu(const FeatureMap& pre) {
  FeatureMap out = pre;
  for (double& v : out.values) v = std::max(v, 0.0);
  return out;
}

void relu_backward_inplace(FeatureMap& grad, const FeatureMap& pre) {
  for (std::size_t k = 0; k < grad.values.size(); ++k)
    if (!(pre.values[k] > 0.0)) grad.values[k] = 0.0;
}

// Gathers the 3x3x3 neighbourhood of (t, i, j) with zero padding.
void gather_patch(const FeatureMap& in, long t, long i, long j, double* patch) {
  const std::size_t C = in.channels;
  const long T = static_cast<long>(in.shape.t), H = static_cast<long>(in.shape.h),
             W = static_cast<long>(in.shape.w);
  std::size_t k = 0;
  for (long dt = -1; dt <= 1; ++dt)
    for (long di = -1; di <= 1; ++di)
      for (long dj = -1; dj <= 1; ++dj, k += C) {
        const long tt = t + dt, ii = i + di, jj = j + dj;
        if (tt < 0 || tt >= T || ii < 0 || ii >= H || jj < 0 || jj >= W) {
          std::fill(patch + k, patch + k + C, 0.0);
        } else {
          const double* src = &in.values[((tt * H + ii) * W + jj) * C];
          std::copy(src, src + C, patch + k);
        }
      }
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - mx);
    z += p[k];
  }
  for (double& v : p) v /= z;
  return p;
}

namespace layers {

FeatureMap conv3_forward(const FeatureMap& in, std::span<const double> weights, std::span<const double> bias,
                         std::size_t out_channels) {
  const std::size_t C = in.channels, K = kTaps * C;
  if (weights.size() != out_channels * K || bias.size() != out_channels) {
    throw ContractError("conv3_forward: parameter size mismatch");
  }
  FeatureMap out{in.shape, out_channels, std::vector<double>(in.shape.count() * out_channels)};
  const long T = static_cast<long>(in.shape.t);
#pragma omp parallel
  {
    std::vector<double> patch(K);
#pragma omp for schedule(static)
    for (long t = 0; t < T; ++t)
      for (std::size_t i = 0; i < in.shape.h; ++i)
        for (std::size_t j = 0; j < in.shape.w; ++j) {
          gather_patch(in, t, static_cast<long>(i), static_cast<long>(j), patch.data());
          double* dst = &out.values[((t * in.shape.h + i) * in.shape.w + j) * out_channels];
          for (std::size_t o = 0; o < out_channels; ++o) {
            const double* w = &weights[o * K];
            double acc = bias[o];
            for (std::size_t k = 0; k < K; ++k) acc += w[k] * patch[k];
            dst[o] = acc;
          }
        }
  }
  return out;
}

void conv3_backward(const FeatureMap& in, std::span<const double> weights, const FeatureMap& grad_out,
                    FeatureMap* grad_in, std::span<double> grad_w, std::span<double> grad_b) {
  const std::size_t C = in.channels, O = grad_out.channels, K = kTaps * C;
  const long T = static_cast<long>(in.shape.t), H = static_cast<long>(in.shape.h),
             W = static_cast<long>(in.shape.w);
  if (grad_in) {
    *grad_in = FeatureMap{in.shape, C, std::vector<double>(in.values.size(), 0.0)};
    // Gather form: every input voxel collects from the outputs whose window covers it.
#pragma omp parallel for schedule(static)
    for (long t = 0; t < T; ++t)
      for (long i = 0; i < H; ++i)
        for (long j = 0; j < W; ++j) {
          double* dst = &grad_in->values[((t * H + i) * W + j) * C];
          std::size_t tap = 0;
          for (long dt = -1; dt <= 1; ++dt)
            for (long di = -1; di <= 1; ++di)
              for (long dj = -1; dj <= 1; ++dj, ++tap) {
                const long ot = t - dt, oi = i - di, oj = j - dj;
                if (ot < 0 || ot >= T || oi < 0 || oi >= H || oj < 0 || oj >= W) continue;
                const double* g = &grad_out.values[((ot * H + oi) * W + oj) * O];
                for (std::size_t o = 0; o < O; ++o) {
                  if (g[o] == 0.0) continue;
                  const double* w = &weights[o * K + tap * C];
                  for (std::size_t c = 0; c < C; ++c) dst[c] += g[o] * w[c];
                }
              }
        }
  }
  if (grad_w.empty() && grad_b.empty()) return;
  const int nthreads = omp_get_max_threads();
  std::vector<std::vector<double>> local_w(nthreads), local_b(nthreads);
#pragma omp parallel
  {
    const int tid = omp_get_thread_num();
    local_w[tid].assign(O * K, 0.0);
    local_b[tid].assign(O, 0.0);
    std::vector<double> patch(K);
#pragma omp for schedule(static)
    for (long t = 0; t < T; ++t)
      for (long i = 0; i < H; ++i)
        for (long j = 0; j < W; ++j) {
          const double* g = &grad_out.values[((t * H + i) * W + j) * O];
          gather_patch(in, t, i, j, patch.data());
          for (std::size_t o = 0; o < O; ++o) {
            if (g[o] == 0.0) continue;
            double* dw = &local_w[tid][o * K];
            for (std::size_t k = 0; k < K; ++k) dw[k] += g[o] * patch[k];
            local_b[tid][o] += g[o];
          }
        }
  }
  // Fixed thread-order reduction keeps results reproducible.
  for (int tid = 0; tid < nthreads; ++tid) {
    if (local_w[tid].empty()) continue;
    if (!grad_w.empty())
      for (std::size_t k = 0; k < O * K; ++k) grad_w[k] += local_w[tid][k];
    if (!grad_b.empty())
      for (std::size_t o = 0; o < O; ++o) grad_b[o] += local_b[tid][o];
  }
}

FeatureMap avg_pool_spatial(const FeatureMap& in, std::size_t factor) {
  const std::size_t H = in.shape.h, W = in.shape.w, C = in.channels;
  const Shape3 os{in.shape.t, (H + factor - 1) / factor, (W + factor - 1) / factor};
  FeatureMap out{os, C, std::vector<double>(os.count() * C, 0.0)};
  for (std::size_t t = 0; t < os.t; ++t)
    for (std::size_t a = 0; a < os.h; ++a)
      for (std::size_t b = 0; b < os.w; ++b) {
        const std::size_t i1 = std::min(H, (a + 1) * factor), j1 = std::min(W, (b + 1) * factor);
        const double n = static_cast<double>((i1 - a * factor) * (j1 - b * factor));
        for (std::size_t i = a * factor; i < i1; ++i)
          for (std::size_t j = b * factor; j < j1; ++j)
            for (std::size_t c = 0; c < C; ++c) out.at(t, a, b, c) += in.at(t, i, j, c);
        for (std::size_t c = 0; c < C; ++c) out.at(t, a, b, c) /= n;
      }
  return out;
}

FeatureMap avg_pool_spatial_backward(const FeatureMap& grad_out, Shape3 in_shape, std::size_t factor) {
  const std::size_t C = grad_out.channels;
  FeatureMap grad{in_shape, C, std::vector<double>(in_shape.count() * C, 0.0)};
  for (std::size_t t = 0; t < in_shape.t; ++t)
    for (std::size_t i = 0; i < in_shape.h; ++i)
      for (std::size_t j = 0; j < in_shape.w; ++j) {
        const std::size_t a = i / factor, b = j / factor;
        const std::size_t i1 = std::min(in_shape.h, (a + 1) * factor),
                          j1 = std::min(in_shape.w, (b + 1) * factor);
        const double n = static_cast<double>((i1 - a * factor) * (j1 - b * factor));
        for (std::size_t c = 0; c < C; ++c) grad.at(t, i, j, c) = grad_out.at(t, a, b, c) / n;
      }
  return grad;
}

namespace serial {

FeatureMap conv3_forward(const FeatureMap& in, std::span<const double> weights, std::span<const double> bias,
                         std::size_t out_channels) {
  const std::size_t C = in.channels;
  const long T = static_cast<long>(in.shape.t), H = static_cast<long>(in.shape.h),
             W = static_cast<long>(in.shape.w);
  FeatureMap out{in.shape, out_channels, std::vector<double>(in.shape.count() * out_channels)};
  for (long t = 0; t < T; ++t)
    for (long i = 0; i < H; ++i)
      for (long j = 0; j < W; ++j)
        for (std::size_t o = 0; o < out_channels; ++o) {
          double acc = bias[o];
          for (long dt = 0; dt < 3; ++dt)
            for (long di = 0; di < 3; ++di)
              for (long dj = 0; dj < 3; ++dj) {
                const long tt = t + dt - 1, ii = i + di - 1, jj = j + dj - 1;
                if (tt < 0 || tt >= T || ii < 0 || ii >= H || jj < 0 || jj >= W) continue;
                for (std::size_t c = 0; c < C; ++c)
                  acc += weights[(((o * 3 + dt) * 3 + di) * 3 + dj) * C + c] * in.at(tt, ii, jj, c);
              }
          out.at(t, i, j, o) = acc;
        }
  return out;
}

void conv3_backward(const FeatureMap& in, std::span<const double> weights, const FeatureMap& grad_out,
                    FeatureMap* grad_in, std::span<double> grad_w, std::span<double> grad_b) {
  const std::size_t C = in.channels, O = grad_out.channels;
  const long T = static_cast<long>(in.shape.t), H = static_cast<long>(in.shape.h),
             W = static_cast<long>(in.shape.w);
  if (grad_in) *grad_in = FeatureMap{in.shape, C, std::vector<double>(in.values.size(), 0.0)};
  for (long t = 0; t < T; ++t)
    for (long i = 0; i < H; ++i)
      for (long j = 0; j < W; ++j)
        for (std::size_t o = 0; o < O; ++o) {
          const double g = grad_out.at(t, i, j, o);
          if (!grad_b.empty()) grad_b[o] += g;
          for (long dt = 0; dt < 3; ++dt)
            for (long di = 0; di < 3; ++di)
              for (long dj = 0; dj < 3; ++dj) {
                const long tt = t + dt - 1, ii = i + di - 1, jj = j + dj - 1;
                if (tt < 0 || tt >= T || ii < 0 || ii >= H || jj < 0 || jj >= W) continue;
                for (std::size_t c = 0; c < C; ++c) {
                  const std::size_t widx = (((o * 3 + dt) * 3 + di) * 3 + dj) * C + c;
                  if (!grad_w.empty()) grad_w[widx] += g * in.at(tt, ii, jj, c);
                  if (grad_in) grad_in->at(tt, ii, jj, c) += g * weights[widx];
                }
              }
        }
}

}  // namespace serial

}  // namespace layers

struct ToyConv3dScorer::Cache {
  FeatureMap x0, pre1, a1, p1, pre2, a2;
  std::vector<double> gap, logits, probs;
};

struct ToyConv3dScorer::Backward {
  bool want_input = false;
  bool want_params = false;
  bool stop_at_tap = false;
  std::vector<double> grad_params;  // accumulated when want_params
  FeatureMap grad_tap;
  FeatureMap grad_x;
};

ToyConv3dScorer::ToyConv3dScorer(ToyArch arch, std::uint64_t seed) : arch_(arch) {
  validate(arch_);
  const Offsets o = offsets_for(arch_);
  params_.assign(o.total, 0.0);
  std::mt19937_64 rng(seed);
  auto fill = [&](std::size_t begin, std::size_t count, double fan_in) {
    std::uniform_real_distribution<double> dist(-std::sqrt(6.0 / fan_in), std::sqrt(6.0 / fan_in));
    for (std::size_t k = 0; k < count; ++k) params_[begin + k] = dist(rng);
  };
  fill(o.w1, o.b1 - o.w1, static_cast<double>(kTaps * arch_.channels));
  fill(o.w2, o.b2 - o.w2, static_cast<double>(kTaps * arch_.conv1));
  fill(o.wfc, o.bfc - o.wfc, static_cast<double>(arch_.conv2));
}

ToyConv3dScorer::ToyConv3dScorer(ToyArch arch, std::vector<double> parameters)
    : arch_(arch), params_(std::move(parameters)) {
  validate(arch_);
  if (params_.size() != parameter_count(arch_)) {
    throw ContractError("ToyConv3dScorer: expected " + std::to_string(parameter_count(arch_)) + " parameters, got " +
                        std::to_string(params_.size()));
  }
}

std::size_t ToyConv3dScorer::parameter_count(const ToyArch& arch) { return offsets_for(arch).total; }

ToyConv3dScorer::Cache ToyConv3dScorer::forward(const VideoTensor& x) const {
  check_input(x);
  const Offsets o = offsets_for(arch_);
  const std::span<const double> p = params_;
  Cache c;
  FeatureMap raw{x.frame_shape(), x.channels(), std::vector<double>(x.values().begin(), x.values().end())};
  for (double& v : raw.values) v -= arch_.input_offset;
  c.x0 = layers::avg_pool_spatial(raw, arch_.pool);
  c.pre1 = layers::conv3_forward(c.x0, p.subspan(o.w1, o.b1 - o.w1), p.subspan(o.b1, arch_.conv1), arch_.conv1);
  c.a1 = relu(c.pre1);
  c.p1 = layers::avg_pool_spatial(c.a1, arch_.pool);
  c.pre2 = layers::conv3_forward(c.p1, p.subspan(o.w2, o.b2 - o.w2), p.subspan(o.b2, arch_.conv2), arch_.conv2);
  c.a2 = relu(c.pre2);
  const std::size_t K = arch_.conv2;
  const std::size_t npos = c.a2.shape.count();
  c.gap.assign(K, 0.0);
  for (std::size_t pos = 0; pos < npos; ++pos)
    for (std::size_t k = 0; k < K; ++k) c.gap[k] += c.a2.values[pos * K + k];
  for (double& g : c.gap) g /= static_cast<double>(npos);
  c.logits.assign(arch_.classes, 0.0);
  for (std::size_t cl = 0; cl < arch_.classes; ++cl) {
    double acc = p[o.bfc + cl];
    for (std::size_t k = 0; k < K; ++k) acc += p[o.wfc + cl * K + k] * c.gap[k];
    c.logits[cl] = acc;
  }
  c.probs = softmax(c.logits);
  return c;
}

void ToyConv3dScorer::backward(const Cache& c, std::span<const double> dlogits, Backward& out) const {
  const Offsets o = offsets_for(arch_);
  const std::span<const double> p = params_;
  const std::size_t K = arch_.conv2;
  std::span<double> gp;
  if (out.want_params) {
    if (out.grad_params.size() != o.total) out.grad_params.assign(o.total, 0.0);
    gp = out.grad_params;
  }
  std::vector<double> dgap(K, 0.0);
  for (std::size_t cl = 0; cl < arch_.classes; ++cl) {
    for (std::size_t k = 0; k < K; ++k) {
      dgap[k] += dlogits[cl] * p[o.wfc + cl * K + k];
      if (out.want_params) gp[o.wfc + cl * K + k] += dlogits[cl] * c.gap[k];
    }
    if (out.want_params) gp[o.bfc + cl] += dlogits[cl];
  }
  const std::size_t npos = c.a2.shape.count();
  FeatureMap da2{c.a2.shape, K, std::vector<double>(npos * K)};
  for (std::size_t pos = 0; pos < npos; ++pos)
    for (std::size_t k = 0; k < K; ++k) da2.values[pos * K + k] = dgap[k] / static_cast<double>(npos);
  if (out.stop_at_tap) {
    out.grad_tap = std::move(da2);
    return;
  }
  relu_backward_inplace(da2, c.pre2);
  FeatureMap dp1;
  layers::conv3_backward(c.p1, p.subspan(o.w2, o.b2 - o.w2), da2, &dp1,
                         out.want_params ? gp.subspan(o.w2, o.b2 - o.w2) : std::span<double>{},
                         out.want_params ? gp.subspan(o.b2, arch_.conv2) : std::span<double>{});
  FeatureMap da1 = layers::avg_pool_spatial_backward(dp1, c.a1.shape, arch_.pool);
  relu_backward_inplace(da1, c.pre1);
  FeatureMap dx0;
  layers::conv3_backward(c.x0, p.subspan(o.w1, o.b1 - o.w1), da1, out.want_input ? &dx0 : nullptr,
                         out.want_params ? gp.subspan(o.w1, o.b1 - o.w1) : std::span<double>{},
                         out.want_params ? gp.subspan(o.b1, arch_.conv1) : std::span<double>{});
  if (out.want_input) out.grad_x = layers::avg_pool_spatial_backward(dx0, arch_.input, arch_.pool);
}

std::vector<double> ToyConv3dScorer::score(const VideoTensor& x) const { return forward(x).probs; }

std::vector<double> ToyConv3dScorer::logits(const VideoTensor& x) const { return forward(x).logits; }

namespace {
std::vector<double> probability_adjoint(const std::vector<double>& probs, std::size_t c) {
  std::vector<double> d(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) d[k] = probs[c] * ((k == c ? 1.0 : 0.0) - probs[k]);
  return d;
}
}  // namespace

ScoreGrad ToyConv3dScorer::score_and_gradient(const VideoTensor& x, std::size_t c) const {
  check_class(c);
  const Cache cache = forward(x);
  Backward b;
  b.want_input = true;
  backward(cache, probability_adjoint(cache.probs, c), b);
  return {cache.probs, VideoTensor(x.frame_shape(), x.channels(), std::move(b.grad_x.values))};
}

ActivationTap ToyConv3dScorer::activation_tap(const VideoTensor& x, std::size_t c) const {
  check_class(c);
  const Cache cache = forward(x);
  Backward b;
  b.stop_at_tap = true;
  backward(cache, probability_adjoint(cache.probs, c), b);
  return {cache.a2, std::move(b.grad_tap)};
}

double ToyConv3dScorer::loss_and_gradient(const VideoTensor& x, std::size_t label, std::span<double> grad) const {
  check_class(label);
  if (grad.size() != params_.size()) throw ContractError("loss_and_gradient: gradient buffer size mismatch");
  const Cache cache = forward(x);
  std::vector<double> dlogits = cache.probs;
  dlogits[label] -= 1.0;
  Backward b;
  b.want_params = true;
  backward(cache, dlogits, b);
  for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += b.grad_params[k];
  return -std::log(std::max(cache.probs[label], 1e-300));
}

double classification_accuracy(const Scorer& scorer, std::span<const LabeledVideo> dataset) {
  if (dataset.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& s : dataset) {
    const auto p = scorer.score(*s.video);
    if (static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()) == s.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(dataset.size());
}

ToyTrainResult train_toy(std::span<const LabeledVideo> dataset, const ToyArch& arch, const ToyTrainConfig& cfg) {
  if (dataset.empty()) throw ParameterError("train_toy: empty dataset");
  if (cfg.batch_size == 0) throw ParameterError("train_toy: batch_size must be >= 1");
  for (const auto& s : dataset) {
    if (!(s.video->frame_shape() == arch.input) || s.video->channels() != arch.channels) {
      throw ParameterError("train_toy: sample shape does not match the architecture");
    }
    if (s.label >= arch.classes) throw ParameterError("train_toy: label out of range");
  }
  ToyConv3dScorer model(arch, cfg.seed);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> velocity(model.parameters().size(), 0.0), grad(velocity.size());
  std::vector<double> second(velocity.size(), 0.0);
  std::size_t step = 0;
  std::vector<double> epoch_loss;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = dataset[order[k]];
        total += model.loss_and_gradient(*s.video, s.label, grad);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      auto params = model.parameters();
      ++step;
      if (cfg.optimizer == ToyOptimizer::sgd) {
        for (std::size_t k = 0; k < params.size(); ++k) {
          velocity[k] = cfg.momentum * velocity[k] + grad[k] * scale;
          params[k] -= cfg.lr * velocity[k];
        }
      } else {
        constexpr double beta2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(cfg.momentum, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t k = 0; k < params.size(); ++k) {
          const double g = grad[k] * scale;
          velocity[k] = cfg.momentum * velocity[k] + (1.0 - cfg.momentum) * g;
          second[k] = beta2 * second[k] + (1.0 - beta2) * g * g;
          params[k] -= cfg.lr * (velocity[k] / c1) / (std::sqrt(second[k] / c2) + eps);
        }
      }
    }
    epoch_loss.push_back(total / static_cast<double>(order.size()));
  }
  const double acc = classification_accuracy(model, dataset);
  return {std::move(model), acc, std::move(epoch_loss)};
}

}  // namespace vattr
