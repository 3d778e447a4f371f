#include "vattr/perturbation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "vattr/error.hpp"
#include "vattr/kernels.hpp"

namespace vattr {

VideoTensor make_baseline(const VideoTensor& x, const PerturbConfig& cfg, const VideoTensor* mean) {
  switch (cfg.baseline_mode) {
    case BaselineMode::blur:
      return gaussian_blur2d(x, cfg.blur_sigma);
    case BaselineMode::black:
      return VideoTensor(x.frame_shape(), x.channels(), 0.0);
    case BaselineMode::dataset_mean:
      if (!mean) throw ParameterError("dataset-mean baseline requested without a mean tensor");
      if (!(mean->frame_shape() == x.frame_shape()) || mean->channels() != x.channels()) {
        throw ContractError("dataset mean shape does not match the input");
      }
      return *mean;
  }
  throw ParameterError("unknown baseline mode");
}

VideoTensor perturb_with(const VideoTensor& x, const Volume& m, const VideoTensor& baseline) {
  if (!(m.shape() == x.frame_shape())) throw ContractError("perturb: mask shape does not match the video");
  if (!(baseline.frame_shape() == x.frame_shape()) || baseline.channels() != x.channels()) {
    throw ContractError("perturb: baseline shape does not match the video");
  }
  const std::size_t C = x.channels();
  VideoTensor out(x.frame_shape(), C);
  const long n = static_cast<long>(m.size());
#pragma omp parallel for schedule(static)
  for (long k = 0; k < n; ++k) {
    const double a = m[k];
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t e = k * C + c;
      out[e] = a * x[e] + (1.0 - a) * baseline[e];
    }
  }
  return out;
}

VideoTensor perturb(const VideoTensor& x, const Volume& m, const PerturbConfig& cfg, const VideoTensor* mean) {
  return perturb_with(x, m, make_baseline(x, cfg, mean));
}

Volume perturb_mask_gradient(const VideoTensor& x, const VideoTensor& baseline, const VideoTensor& grad) {
  if (!(grad.frame_shape() == x.frame_shape()) || grad.channels() != x.channels()) {
    throw ContractError("perturb_mask_gradient: gradient shape mismatch");
  }
  const std::size_t C = x.channels();
  Volume out(x.frame_shape());
  for (std::size_t k = 0; k < out.size(); ++k) {
    double acc = 0.0;
    for (std::size_t c = 0; c < C; ++c) acc += (x[k * C + c] - baseline[k * C + c]) * grad[k * C + c];
    out[k] = acc;
  }
  return out;
}

UnitSpec UnitSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ParameterError("unit spec must look like patch:7 or supervoxel:256");
  const auto kind = text.substr(0, colon);
  const auto num = text.substr(colon + 1);
  UnitSpec spec;
  if (kind == "patch") {
    spec.kind = UnitKind::patch;
  } else if (kind == "supervoxel") {
    spec.kind = UnitKind::supervoxel;
  } else {
    throw ParameterError("unknown unit kind '" + std::string(kind) + "'");
  }
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
  if (ec != std::errc() || ptr != num.data() + num.size() || value == 0) {
    throw ParameterError("unit size must be a positive integer, got '" + std::string(num) + "'");
  }
  spec.size = value;
  return spec;
}

std::string UnitSpec::str() const {
  return (kind == UnitKind::patch ? "patch:" : "supervoxel:") + std::to_string(size);
}

UnitPartition partition_from_labels(Shape3 shape, std::vector<std::uint32_t> labels) {
  if (labels.size() != shape.count()) throw ContractError("partition: label count does not match shape");
  UnitPartition p{shape, std::move(labels), {}};
  std::uint32_t hi = 0;
  for (auto l : p.labels) hi = std::max(hi, l);
  p.units.resize(p.labels.empty() ? 0 : hi + 1);
  for (std::size_t k = 0; k < p.labels.size(); ++k) p.units[p.labels[k]].push_back(k);
  for (const auto& u : p.units)
    if (u.empty()) throw ContractError("partition: labels are not dense");
  return p;
}

UnitPartition partition_patches(Shape3 shape, std::size_t size) {
  if (size == 0) throw ParameterError("patch size must be >= 1");
  if (size > shape.h || size > shape.w) throw ParameterError("patch size exceeds the frame");
  const std::size_t rows = (shape.h + size - 1) / size, cols = (shape.w + size - 1) / size;
  std::vector<std::uint32_t> labels(shape.count());
  for (std::size_t t = 0; t < shape.t; ++t)
    for (std::size_t i = 0; i < shape.h; ++i)
      for (std::size_t j = 0; j < shape.w; ++j) {
        labels[(t * shape.h + i) * shape.w + j] =
            static_cast<std::uint32_t>((t * rows + i / size) * cols + j / size);
      }
  return partition_from_labels(shape, std::move(labels));
}

namespace {

struct Grid3 {
  std::size_t t, h, w;
};

// Grid of roughly `target` cells; exact products first, then the most even split.
Grid3 choose_grid(Shape3 shape, std::size_t target) {
  Grid3 best{1, 1, 1};
  double best_err = std::numeric_limits<double>::infinity(), best_balance = 0.0;
  for (std::size_t gt = 1; gt <= shape.t; ++gt)
    for (std::size_t gh = 1; gh <= shape.h; ++gh) {
      const double want = static_cast<double>(target) / static_cast<double>(gt * gh);
      if (want < 0.5) break;
      const std::size_t gw = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(want)), 1, shape.w);
      const double err = std::abs(static_cast<double>(gt * gh * gw) - static_cast<double>(target));
      const double balance = static_cast<double>(std::max({gt, gh, gw})) / static_cast<double>(std::min({gt, gh, gw}));
      if (err < best_err || (err == best_err && balance < best_balance)) {
        best = {gt, gh, gw};
        best_err = err;
        best_balance = balance;
      }
    }
  return best;
}

struct Center {
  double v, t, i, j;
};

}  // namespace

UnitPartition partition_supervoxels(const VideoTensor& x, std::size_t target, const SupervoxelOptions& opt) {
  if (target == 0) throw ParameterError("supervoxel count must be >= 1");
  if (!(opt.compactness > 0.0)) throw ParameterError("supervoxel compactness must be > 0");
  const Shape3 s = x.frame_shape();
  const std::size_t N = s.count(), C = x.channels();
  const Grid3 g = choose_grid(s, std::min(target, N));

  std::vector<double> intensity(N);
  for (std::size_t k = 0; k < N; ++k) {
    double acc = 0.0;
    for (std::size_t c = 0; c < C; ++c) acc += x[k * C + c];
    intensity[k] = acc / static_cast<double>(C);
  }
  // Positions are measured in grid cells so one cell spans unit distance on every axis.
  const double st = static_cast<double>(g.t) / static_cast<double>(s.t);
  const double sh = static_cast<double>(g.h) / static_cast<double>(s.h);
  const double sw = static_cast<double>(g.w) / static_cast<double>(s.w);
  auto cell_of = [&](std::size_t t, std::size_t i, std::size_t j) {
    return Grid3{std::min(g.t - 1, static_cast<std::size_t>((static_cast<double>(t) + 0.5) * st)),
                 std::min(g.h - 1, static_cast<std::size_t>((static_cast<double>(i) + 0.5) * sh)),
                 std::min(g.w - 1, static_cast<std::size_t>((static_cast<double>(j) + 0.5) * sw))};
  };

  const std::size_t K = g.t * g.h * g.w;
  std::vector<Center> centers(K);
  for (std::size_t a = 0; a < g.t; ++a)
    for (std::size_t b = 0; b < g.h; ++b)
      for (std::size_t c = 0; c < g.w; ++c) {
        const double ct = (static_cast<double>(a) + 0.5) / st - 0.5;
        const double ci = (static_cast<double>(b) + 0.5) / sh - 0.5;
        const double cj = (static_cast<double>(c) + 0.5) / sw - 0.5;
        const std::size_t vt = std::min(s.t - 1, static_cast<std::size_t>(std::lround(std::max(0.0, ct))));
        const std::size_t vi = std::min(s.h - 1, static_cast<std::size_t>(std::lround(std::max(0.0, ci))));
        const std::size_t vj = std::min(s.w - 1, static_cast<std::size_t>(std::lround(std::max(0.0, cj))));
        centers[(a * g.h + b) * g.w + c] = {intensity[(vt * s.h + vi) * s.w + vj], ct * st, ci * sh, cj * sw};
      }

  const double m2 = opt.compactness * opt.compactness;
  std::vector<std::uint32_t> assign(N, 0);
  for (std::size_t iter = 0; iter < opt.iterations; ++iter) {
#pragma omp parallel for schedule(static)
    for (long tl = 0; tl < static_cast<long>(s.t); ++tl) {
      const std::size_t t = static_cast<std::size_t>(tl);
      for (std::size_t i = 0; i < s.h; ++i)
        for (std::size_t j = 0; j < s.w; ++j) {
          const std::size_t k = (t * s.h + i) * s.w + j;
          const Grid3 home = cell_of(t, i, j);
          const double pt = static_cast<double>(t) * st, pi = static_cast<double>(i) * sh,
                       pj = static_cast<double>(j) * sw;
          double best = std::numeric_limits<double>::infinity();
          std::uint32_t arg = 0;
          for (long da = -1; da <= 1; ++da)
            for (long db = -1; db <= 1; ++db)
              for (long dc = -1; dc <= 1; ++dc) {
                const long a = static_cast<long>(home.t) + da, b = static_cast<long>(home.h) + db,
                           c = static_cast<long>(home.w) + dc;
                if (a < 0 || b < 0 || c < 0 || a >= static_cast<long>(g.t) || b >= static_cast<long>(g.h) ||
                    c >= static_cast<long>(g.w))
                  continue;
                const std::size_t ci = (static_cast<std::size_t>(a) * g.h + static_cast<std::size_t>(b)) * g.w +
                                       static_cast<std::size_t>(c);
                const Center& ctr = centers[ci];
                const double dv = intensity[k] - ctr.v;
                const double ds = (pt - ctr.t) * (pt - ctr.t) + (pi - ctr.i) * (pi - ctr.i) + (pj - ctr.j) * (pj - ctr.j);
                const double d = dv * dv + m2 * ds;
                if (d < best) {
                  best = d;
                  arg = static_cast<std::uint32_t>(ci);
                }
              }
          assign[k] = arg;
        }
    }
    std::vector<Center> sum(K, Center{0, 0, 0, 0});
    std::vector<std::size_t> cnt(K, 0);
    for (std::size_t t = 0; t < s.t; ++t)
      for (std::size_t i = 0; i < s.h; ++i)
        for (std::size_t j = 0; j < s.w; ++j) {
          const std::size_t k = (t * s.h + i) * s.w + j;
          Center& acc = sum[assign[k]];
          acc.v += intensity[k];
          acc.t += static_cast<double>(t) * st;
          acc.i += static_cast<double>(i) * sh;
          acc.j += static_cast<double>(j) * sw;
          ++cnt[assign[k]];
        }
    for (std::size_t c = 0; c < K; ++c) {
      if (cnt[c] == 0) continue;
      const double n = static_cast<double>(cnt[c]);
      centers[c] = {sum[c].v / n, sum[c].t / n, sum[c].i / n, sum[c].j / n};
    }
  }

  // Connectivity cleanup in raster order: fragments below a quarter of the
  // expected unit size join the unit of an already visited neighbour.
  const std::size_t min_size = std::max<std::size_t>(1, N / (4 * K));
  constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> labels(N, kUnset);
  std::vector<std::size_t> component;
  std::uint32_t next = 0;
  auto neighbours = [&](std::size_t k, auto&& fn) {
    const std::size_t j = k % s.w, i = (k / s.w) % s.h, t = k / (s.w * s.h);
    if (t > 0) fn(k - s.h * s.w);
    if (i > 0) fn(k - s.w);
    if (j > 0) fn(k - 1);
    if (j + 1 < s.w) fn(k + 1);
    if (i + 1 < s.h) fn(k + s.w);
    if (t + 1 < s.t) fn(k + s.h * s.w);
  };
  for (std::size_t start = 0; start < N; ++start) {
    if (labels[start] != kUnset) continue;
    std::uint32_t adjacent = kUnset;
    neighbours(start, [&](std::size_t n) {
      if (adjacent == kUnset && labels[n] != kUnset) adjacent = labels[n];
    });
    component.assign(1, start);
    labels[start] = next;
    for (std::size_t head = 0; head < component.size(); ++head) {
      neighbours(component[head], [&](std::size_t n) {
        if (labels[n] == kUnset && assign[n] == assign[start]) {
          labels[n] = next;
          component.push_back(n);
        }
      });
    }
    if (component.size() < min_size && adjacent != kUnset) {
      for (std::size_t k : component) labels[k] = adjacent;
    } else {
      ++next;
    }
  }
  return partition_from_labels(s, std::move(labels));
}

UnitPartition partition(const VideoTensor& x, const UnitSpec& spec) {
  if (spec.kind == UnitKind::patch) return partition_patches(x.frame_shape(), spec.size);
  return partition_supervoxels(x, spec.size);
}

std::string to_string(Operation op) { return op == Operation::insertion ? "insertion" : "deletion"; }
std::string to_string(Order order) { return order == Order::morf ? "morf" : "lerf"; }

PerturbationSchedule::PerturbationSchedule(Operation op, Order order, Shape3 shape,
                                           std::vector<std::size_t> unit_order,
                                           std::vector<std::vector<std::size_t>> steps)
    : op_(op), order_(order), shape_(shape), unit_order_(std::move(unit_order)), steps_(std::move(steps)) {}

Volume PerturbationSchedule::mask(std::size_t l) const {
  if (l > steps_.size()) throw ParameterError("schedule step out of range");
  const double start = op_ == Operation::insertion ? 0.0 : 1.0;
  Volume h(shape_, start);
  for (std::size_t s = 0; s < l; ++s)
    for (std::size_t k : steps_[s]) h[k] = 1.0 - start;
  return h;
}

Volume PerturbationSchedule::increment(std::size_t l) const {
  Volume h(shape_, 0.0);
  for (std::size_t k : step_voxels(l)) h[k] = 1.0;
  return h;
}

std::vector<double> unit_means(const Volume& map, const UnitPartition& part) {
  if (!(map.shape() == part.shape)) throw ContractError("unit_means: map and partition shapes differ");
  std::vector<double> means(part.count());
  for (std::size_t u = 0; u < part.count(); ++u) {
    double acc = 0.0;
    for (std::size_t k : part.units[u]) acc += map[k];
    means[u] = acc / static_cast<double>(part.units[u].size());
  }
  return means;
}

PerturbationSchedule build_schedule(const Volume& map, const UnitPartition& part, Operation op, Order order) {
  const auto means = unit_means(map, part);
  auto ranked = descending_order(means);
  if (order == Order::lerf) std::reverse(ranked.begin(), ranked.end());
  std::vector<std::vector<std::size_t>> steps;
  steps.reserve(ranked.size());
  for (std::size_t u : ranked) steps.push_back(part.units[u]);
  return PerturbationSchedule(op, order, part.shape, std::move(ranked), std::move(steps));
}

}  // namespace vattr
