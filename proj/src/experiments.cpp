#include "vattr/experiments.hpp"

#include <map>
#include <sstream>

#include "vattr/error.hpp"
#include "vattr/io.hpp"

namespace vattr {

OracleTubeScorer oracle_for(const SynthSample& s, double temperature) {
  return OracleTubeScorer(s.video.frame_shape(), s.video.channels(), s.boxes, temperature);
}

Volume compute_map(Method m, const VideoTensor& x, const Scorer& scorer, std::size_t c, const MethodSettings& s,
                   std::size_t sample_index) {
  if (m == Method::step) return run_step(x, scorer, c, s.step).heatmap;
  if (m == Method::random) return attribute_random(x.frame_shape(), derive_seed(s.baseline.seed, sample_index));
  return attribute(m, x, scorer, c, s.baseline);
}

SynthSpec reliability_spec(std::uint64_t seed) {
  SynthSpec spec;
  spec.frames = 8;
  spec.size = 32;
  spec.shape_scale = 8;
  spec.videos_per_class = 16;
  spec.seed = seed;
  return spec;
}

std::vector<AucConfig> morf_metrics() {
  return {{Operation::insertion, Order::morf, {UnitKind::patch, 7}},
          {Operation::deletion, Order::morf, {UnitKind::patch, 7}},
          {Operation::insertion, Order::morf, {UnitKind::supervoxel, 256}},
          {Operation::deletion, Order::morf, {UnitKind::supervoxel, 256}}};
}

std::vector<SuiteMetric> reliability_suite(std::span<const SynthSample> samples, const Scorer& scorer,
                                           std::span<const Method> methods, std::span<const AucConfig> metrics,
                                           const VideoTensor& xbar, const MethodSettings& settings) {
  const std::size_t N = samples.size(), M = methods.size();
  std::vector<SuiteMetric> out;
  for (const auto& cfg : metrics) {
    out.push_back({cfg, EvaluationMatrix(N, M, better_direction(cfg.operation, cfg.order)), {}});
  }
  FirstException error;
#pragma omp parallel for schedule(dynamic)
  for (long nl = 0; nl < static_cast<long>(N); ++nl) error.run([&] {
    const auto n = static_cast<std::size_t>(nl);
    const SynthSample& s = samples[n];
    std::vector<Volume> maps;
    for (Method m : methods) maps.push_back(compute_map(m, s.video, scorer, s.label, settings, n));
    const Volume rnd = compute_map(Method::random, s.video, scorer, s.label, settings, n);
    std::map<std::string, UnitPartition> parts;
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      const AucConfig& cfg = metrics[k];
      auto it = parts.find(cfg.unit.str());
      if (it == parts.end()) it = parts.emplace(cfg.unit.str(), partition(s.video, cfg.unit)).first;
      auto score = [&](const Volume& map) {
        return auc(s.video, map, scorer, s.label, xbar, it->second, cfg.operation, cfg.order).auc;
      };
      for (std::size_t j = 0; j < M; ++j) out[k].matrix.at(n, j) = score(maps[j]);
      out[k].matrix.random[n] = score(rnd);
    }
  });
  error.rethrow();
  for (auto& r : out) r.report = reliability(r.matrix);
  return out;
}

std::string matrix_csv(std::span<const SuiteMetric> results, std::span<const Method> methods) {
  std::ostringstream os;
  os << "sample,method,metric,value\n";
  for (const auto& r : results) {
    const std::string name = r.metric.name();
    for (std::size_t p = 0; p < r.matrix.samples; ++p) {
      for (std::size_t j = 0; j < methods.size(); ++j) {
        os << p << ',' << to_string(methods[j]) << ',' << name << ',' << format_double(r.matrix.at(p, j)) << '\n';
      }
      os << p << ",random," << name << ',' << format_double(r.matrix.random[p]) << '\n';
    }
  }
  return os.str();
}

std::vector<AblationRow> tk_ablation(std::span<const SynthSample> samples, std::span<const std::size_t> depths,
                                     const StepConfig& base) {
  if (samples.empty()) throw ParameterError("ablation: no samples");
  std::vector<AblationRow> rows;
  for (std::size_t tk : depths) {
    StepConfig cfg = base;
    cfg.kernel.t = tk;
    AblationRow row;
    row.kernel_frames = tk;
    for (const auto& s : samples) {
      const OracleTubeScorer oracle = oracle_for(s);
      const Volume truth = oracle.tube_indicator();
      const double v = truth.sum() / static_cast<double>(truth.size());
      const MaskResult r = optimize_mask(s.video, oracle, kOracleClass, v, cfg);
      row.mean_iou += mask_iou(r.mask, truth);
      row.mean_components += static_cast<double>(count_components(r.mask));
      row.mean_phi_ratio += r.phi / oracle.probability(s.video, kOracleClass);
    }
    const double n = static_cast<double>(samples.size());
    row.mean_iou /= n;
    row.mean_components /= n;
    row.mean_phi_ratio /= n;
    rows.push_back(row);
  }
  return rows;
}

std::string ablation_csv(std::span<const AblationRow> rows) {
  std::ostringstream os;
  os << "kernel_frames,mean_iou,mean_components,mean_phi_ratio\n";
  for (const auto& r : rows) {
    os << r.kernel_frames << ',' << format_double(r.mean_iou) << ',' << format_double(r.mean_components) << ','
       << format_double(r.mean_phi_ratio) << '\n';
  }
  return os.str();
}

}  // namespace vattr
