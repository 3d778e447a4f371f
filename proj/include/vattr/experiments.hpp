#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vattr/baselines.hpp"
#include "vattr/metrics.hpp"
#include "vattr/scorer.hpp"
#include "vattr/step.hpp"
#include "vattr/synth.hpp"

namespace vattr {

// Runs shared by the command line and the acceptance checks.

inline constexpr std::size_t kOracleClass = 1;
inline constexpr double kOracleTemperature = 0.25;

// Oracle whose tube is the sample's box track.
OracleTubeScorer oracle_for(const SynthSample& s, double temperature = kOracleTemperature);

struct MethodSettings {
  BaselineConfig baseline;
  StepConfig step;
};

// Attribution map for any method; the random method draws from
// derive_seed(baseline.seed, sample_index).
Volume compute_map(Method m, const VideoTensor& x, const Scorer& scorer, std::size_t c, const MethodSettings& s,
                   std::size_t sample_index = 0);

// Reduced-scale suite used for the reliability measurement.
SynthSpec reliability_spec(std::uint64_t seed);

struct SuiteMetric {
  AucConfig metric;
  EvaluationMatrix matrix;
  ReliabilityReport report;
};

// For every metric, fills an N x M matrix of per-sample AUCs (target class =
// label) plus the random-map AUCs and computes alpha. Maps are computed once
// per (sample, method); partitions once per (sample, unit).
std::vector<SuiteMetric> reliability_suite(std::span<const SynthSample> samples, const Scorer& scorer,
                                           std::span<const Method> methods, std::span<const AucConfig> metrics,
                                           const VideoTensor& xbar, const MethodSettings& settings);

// The four MoRF-based metric variants the reliability check compares.
std::vector<AucConfig> morf_metrics();

std::string matrix_csv(std::span<const SuiteMetric> results, std::span<const Method> methods);

struct AblationRow {
  std::size_t kernel_frames = 0;  // T_K; 0 disables the smoothness term
  double mean_iou = 0.0;
  double mean_components = 0.0;
  double mean_phi_ratio = 0.0;  // Phi(M (x) X) / Phi(X)
};

// Optimizes one mask per sample at its tube ratio on the sample's oracle,
// once per kernel depth.
std::vector<AblationRow> tk_ablation(std::span<const SynthSample> samples, std::span<const std::size_t> depths,
                                     const StepConfig& base);
std::string ablation_csv(std::span<const AblationRow> rows);

}  // namespace vattr
