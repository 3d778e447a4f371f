#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vattr/error.hpp"
#include "vattr/perturbation.hpp"
#include "vattr/scorer.hpp"
#include "vattr/synth.hpp"
#include "vattr/tensor.hpp"
#include "vattr/toy_model.hpp"

namespace vattr {

struct AucConfig {
  Operation operation = Operation::insertion;
  Order order = Order::morf;
  UnitSpec unit{UnitKind::patch, 7};

  std::string name() const;  // e.g. "insertion+morf+patch:7"
};

struct AucResult {
  std::vector<double> curve;  // Phi_c at steps 0..L
  double auc = 0.0;           // mean over steps 1..L
};

// Steps through the schedule, revealing X (insertion) or the reference
// `xbar` (deletion) unit by unit and scoring after every step.
AucResult auc(const VideoTensor& x, const Volume& map, const Scorer& scorer, std::size_t c, const VideoTensor& xbar,
              const AucConfig& cfg);
// Same with a precomputed partition, so one supervoxel run serves every map of a sample.
AucResult auc(const VideoTensor& x, const Volume& map, const Scorer& scorer, std::size_t c, const VideoTensor& xbar,
              const UnitPartition& part, Operation op, Order order);

// Distance from (i, j) to the closed box, 0 inside.
double distance_to_box(double i, double j, const Box& b);

// Hit when the closed disc around the map's argmax (over frames that have a
// box) meets that frame's box. nullopt when no frame is annotated.
std::optional<bool> pointing_hit(const Volume& map, const BoxTrack& boxes, double radius = 7.0);

struct PointingResult {
  double hit_ratio = 0.0;  // hits / evaluated
  std::size_t hits = 0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // videos without annotated frames
};

PointingResult pointing_game(std::span<const Volume> maps, std::span<const BoxTrack> boxes, double radius = 7.0);

// 1-based ranks, ties share their mean rank.
std::vector<double> average_ranks(std::span<const double> v);

struct SpearmanResult {
  double rho = 0.0;
  bool degenerate = false;  // a rank vector had zero variance; rho is set to 0
};

SpearmanResult spearman_checked(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);

enum class BetterDirection { higher, lower };

std::string to_string(BetterDirection d);
BetterDirection better_direction(Operation op, Order order);

// N samples x M methods, row-major, plus one random-map score per sample.
struct EvaluationMatrix {
  std::size_t samples = 0;
  std::size_t methods = 0;
  std::vector<double> values;
  std::vector<double> random;
  BetterDirection better = BetterDirection::higher;

  EvaluationMatrix() = default;
  EvaluationMatrix(std::size_t n, std::size_t m, BetterDirection dir);

  double& at(std::size_t p, std::size_t j) { return values[p * methods + j]; }
  double at(std::size_t p, std::size_t j) const { return values[p * methods + j]; }
  std::span<const double> row(std::size_t p) const { return std::span<const double>(values).subspan(p * methods, methods); }
  void validate() const;
};

class UndefinedAlphaError : public Error {
 public:
  using Error::Error;
};

struct ReliabilityReport {
  double alpha = 0.0;
  std::vector<double> weights;     // w_p
  std::size_t degenerate_pairs = 0;  // pairs whose Spearman had zero rank variance
};

// w_p: fraction of methods strictly better than random on sample p.
std::vector<double> reliability_weights(const EvaluationMatrix& a);
ReliabilityReport reliability(const EvaluationMatrix& a);

// Keeps the `ratio` most attributed pixels of x (all channels) and sets the
// rest to `fill`. Ties are broken by pixel index.
VideoTensor keep_top(const VideoTensor& x, const Volume& map, double ratio, const VideoTensor& fill);

struct KarPoint {
  double ratio = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

// For every ratio: perturb both splits with keep_top (fill = training-set
// mean), retrain a fresh toy scorer, report test accuracy.
std::vector<KarPoint> kar_harness(std::span<const SynthSample> train, std::span<const SynthSample> test,
                                  std::span<const Volume> train_maps, std::span<const Volume> test_maps,
                                  std::span<const double> ratios, const ToyArch& arch, const ToyTrainConfig& cfg);

}  // namespace vattr
