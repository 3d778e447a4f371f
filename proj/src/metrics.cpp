#include "vattr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vattr/error.hpp"
#include "vattr/kernels.hpp"

namespace vattr {

std::string AucConfig::name() const { return to_string(operation) + "+" + to_string(order) + "+" + unit.str(); }

AucResult auc(const VideoTensor& x, const Volume& map, const Scorer& scorer, std::size_t c, const VideoTensor& xbar,
              const AucConfig& cfg) {
  return auc(x, map, scorer, c, xbar, partition(x, cfg.unit), cfg.operation, cfg.order);
}

AucResult auc(const VideoTensor& x, const Volume& map, const Scorer& scorer, std::size_t c, const VideoTensor& xbar,
              const UnitPartition& part, Operation op, Order order) {
  if (!(x.frame_shape() == map.shape())) throw ContractError("auc: map shape does not match the video");
  if (!(xbar.frame_shape() == x.frame_shape()) || xbar.channels() != x.channels()) {
    throw ContractError("auc: reference input shape does not match the video");
  }
  const PerturbationSchedule sched = build_schedule(map, part, op, order);
  const bool insert = op == Operation::insertion;
  const VideoTensor& source = insert ? x : xbar;
  VideoTensor cur = insert ? xbar : x;
  const std::size_t C = x.channels();

  AucResult r;
  r.curve.reserve(sched.length() + 1);
  r.curve.push_back(scorer.probability(cur, c));
  double sum = 0.0;
  for (std::size_t l = 1; l <= sched.length(); ++l) {
    for (std::size_t v : sched.step_voxels(l))
      for (std::size_t ch = 0; ch < C; ++ch) cur[v * C + ch] = source[v * C + ch];
    const double p = scorer.probability(cur, c);
    r.curve.push_back(p);
    sum += p;
  }
  r.auc = sched.length() ? sum / static_cast<double>(sched.length()) : r.curve.front();
  return r;
}

double distance_to_box(double i, double j, const Box& b) {
  const double di = std::max({static_cast<double>(b.i0) - i, 0.0, i - static_cast<double>(b.i1)});
  const double dj = std::max({static_cast<double>(b.j0) - j, 0.0, j - static_cast<double>(b.j1)});
  return std::hypot(di, dj);
}

std::optional<bool> pointing_hit(const Volume& map, const BoxTrack& boxes, double radius) {
  if (boxes.size() != map.frames()) throw ContractError("pointing game: need one box entry per frame");
  if (!(radius >= 0.0)) throw ParameterError("pointing game: radius must be >= 0");
  bool found = false;
  double best = 0.0;
  std::size_t bt = 0, bi = 0, bj = 0;
  for (std::size_t t = 0; t < map.frames(); ++t) {
    if (!boxes[t]) continue;
    for (std::size_t i = 0; i < map.height(); ++i)
      for (std::size_t j = 0; j < map.width(); ++j) {
        const double v = map(t, i, j);
        if (!found || v > best) {
          found = true;
          best = v;
          bt = t, bi = i, bj = j;
        }
      }
  }
  if (!found) return std::nullopt;
  return distance_to_box(static_cast<double>(bi), static_cast<double>(bj), *boxes[bt]) <= radius;
}

PointingResult pointing_game(std::span<const Volume> maps, std::span<const BoxTrack> boxes, double radius) {
  if (maps.size() != boxes.size()) throw ContractError("pointing game: maps and box tracks differ in count");
  PointingResult r;
  for (std::size_t n = 0; n < maps.size(); ++n) {
    const auto hit = pointing_hit(maps[n], boxes[n], radius);
    if (!hit) {
      ++r.skipped;
      continue;
    }
    ++r.evaluated;
    if (*hit) ++r.hits;
  }
  r.hit_ratio = r.evaluated ? static_cast<double>(r.hits) / static_cast<double>(r.evaluated) : 0.0;
  return r;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t s = 0; s < idx.size();) {
    std::size_t e = s + 1;
    while (e < idx.size() && v[idx[e]] == v[idx[s]]) ++e;
    // Positions s..e-1 hold equal values; 1-based ranks s+1..e average to this.
    const double r = static_cast<double>(s + e + 1) / 2.0;
    for (std::size_t k = s; k < e; ++k) ranks[idx[k]] = r;
    s = e;
  }
  return ranks;
}

SpearmanResult spearman_checked(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("spearman: lengths differ");
  if (a.size() < 2) throw ParameterError("spearman: need at least two values");
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  // Both rank vectors have mean (n + 1) / 2.
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    const double da = ra[k] - mean, db = rb[k] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return {0.0, true};
  return {sab / std::sqrt(saa * sbb), false};
}

double spearman(std::span<const double> a, std::span<const double> b) { return spearman_checked(a, b).rho; }

std::string to_string(BetterDirection d) { return d == BetterDirection::higher ? "higher" : "lower"; }

BetterDirection better_direction(Operation op, Order order) {
  // Insertion+MoRF and deletion+LeRF reward a fast rise of the kept evidence.
  const bool higher = (op == Operation::insertion) == (order == Order::morf);
  return higher ? BetterDirection::higher : BetterDirection::lower;
}

EvaluationMatrix::EvaluationMatrix(std::size_t n, std::size_t m, BetterDirection dir)
    : samples(n), methods(m), values(n * m, 0.0), random(n, 0.0), better(dir) {}

void EvaluationMatrix::validate() const {
  if (values.size() != samples * methods || random.size() != samples) {
    throw ContractError("evaluation matrix: dimensions inconsistent");
  }
  for (double v : values)
    if (!std::isfinite(v)) throw ContractError("evaluation matrix: non-finite entry");
  for (double v : random)
    if (!std::isfinite(v)) throw ContractError("evaluation matrix: non-finite random entry");
}

std::vector<double> reliability_weights(const EvaluationMatrix& a) {
  a.validate();
  std::vector<double> w(a.samples, 0.0);
  for (std::size_t p = 0; p < a.samples; ++p) {
    std::size_t better = 0;
    for (std::size_t j = 0; j < a.methods; ++j) {
      const double v = a.at(p, j), r = a.random[p];
      if (a.better == BetterDirection::higher ? v > r : v < r) ++better;
    }
    w[p] = static_cast<double>(better) / static_cast<double>(a.methods);
  }
  return w;
}

ReliabilityReport reliability(const EvaluationMatrix& a) {
  if (a.samples < 2 || a.methods < 2) throw ParameterError("reliability: need at least 2 samples and 2 methods");
  ReliabilityReport rep;
  rep.weights = reliability_weights(a);
  const double sign = a.better == BetterDirection::higher ? 1.0 : -1.0;
  std::vector<std::vector<double>> rows(a.samples);
  for (std::size_t p = 0; p < a.samples; ++p) {
    rows[p].assign(a.row(p).begin(), a.row(p).end());
    for (double& v : rows[p]) v *= sign;
  }
  double num = 0.0, den = 0.0;
  for (std::size_t p = 0; p < a.samples; ++p)
    for (std::size_t q = p + 1; q < a.samples; ++q) {
      const double w = rep.weights[p] * rep.weights[q];
      if (w == 0.0) continue;
      const SpearmanResult s = spearman_checked(rows[p], rows[q]);
      if (s.degenerate) ++rep.degenerate_pairs;
      num += w * s.rho;
      den += w;
    }
  if (den == 0.0) throw UndefinedAlphaError("reliability: alpha is undefined because no sample pair has weight");
  rep.alpha = num / den;
  return rep;
}

VideoTensor keep_top(const VideoTensor& x, const Volume& map, double ratio, const VideoTensor& fill) {
  if (!(x.frame_shape() == map.shape())) throw ContractError("keep_top: map shape does not match the video");
  if (!(fill.frame_shape() == x.frame_shape()) || fill.channels() != x.channels()) {
    throw ContractError("keep_top: fill shape does not match the video");
  }
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ParameterError("keep_top: ratio must lie in [0, 1]");
  const auto order = descending_order(map.values());
  const auto keep = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(map.size()) + 0.5));
  VideoTensor out = fill;
  const std::size_t C = x.channels();
  for (std::size_t k = 0; k < keep; ++k) {
    const std::size_t v = order[k];
    for (std::size_t c = 0; c < C; ++c) out[v * C + c] = x[v * C + c];
  }
  return out;
}

std::vector<KarPoint> kar_harness(std::span<const SynthSample> train, std::span<const SynthSample> test,
                                  std::span<const Volume> train_maps, std::span<const Volume> test_maps,
                                  std::span<const double> ratios, const ToyArch& arch, const ToyTrainConfig& cfg) {
  if (train.empty() || test.empty()) throw ParameterError("kar: empty split");
  if (train_maps.size() != train.size() || test_maps.size() != test.size()) {
    throw ContractError("kar: need one map per sample");
  }
  const VideoTensor fill = dataset_mean(train);
  std::vector<KarPoint> out;
  for (double ratio : ratios) {
    std::vector<VideoTensor> tr(train.size()), te(test.size());
    FirstException error;
#pragma omp parallel for schedule(static)
    for (long n = 0; n < static_cast<long>(train.size()); ++n)
      error.run([&] { tr[n] = keep_top(train[n].video, train_maps[n], ratio, fill); });
#pragma omp parallel for schedule(static)
    for (long n = 0; n < static_cast<long>(test.size()); ++n)
      error.run([&] { te[n] = keep_top(test[n].video, test_maps[n], ratio, fill); });
    error.rethrow();
    std::vector<LabeledVideo> trl, tel;
    for (std::size_t n = 0; n < tr.size(); ++n) trl.push_back({&tr[n], train[n].label});
    for (std::size_t n = 0; n < te.size(); ++n) tel.push_back({&te[n], test[n].label});
    const ToyTrainResult fit = train_toy(trl, arch, cfg);
    out.push_back({ratio, fit.train_accuracy, classification_accuracy(fit.model, tel)});
  }
  return out;
}

}  // namespace vattr
