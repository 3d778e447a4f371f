#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vattr/scorer.hpp"
#include "vattr/tensor.hpp"

namespace vattr {

// How the smoothness template is rescaled after convolution.
//   full_convolution: beta = THW / ((T+T_K-1)(H+H_K-1)(W+W_K-1))
//   strided_output:   beta = THW / (element count of the strided output)
// beta * v is capped at 1 in both cases.
enum class SmoothBeta { full_convolution, strided_output };

struct StepConfig {
  std::vector<double> areas{0.05, 0.10, 0.15, 0.20};
  // Both template losses enter the objective divided by their element count.
  double lambda1 = 10.0;
  double lambda2_final = 1.0;
  double lambda2_warmup_fraction = 0.3;
  std::size_t iterations = 400;
  double lr = 0.02;
  double momentum = 0.9;
  // A zero temporal size switches the smoothness term off.
  Shape3 kernel{8, 11, 11};
  Stride3 kernel_stride{1, 11, 11};
  std::size_t kernel_padding = 0;
  SmoothBeta beta_rule = SmoothBeta::full_convolution;
  std::size_t seed_scale = 7;
  double upsample_sigma = 3.5;
  double blur_sigma = 10.0;
  std::optional<double> phi0;   // absolute output floor; unset uses phi0_fraction * Phi(X)
  double phi0_fraction = 0.9;
  double heatmap_sigma = 10.0;
  // Starting seed for optimize_mask; unset starts at 0.5 everywhere.
  std::optional<Volume> initial_seed;

  bool smoothness_enabled() const { return kernel.t > 0 && kernel.h > 0 && kernel.w > 0; }
  // Throws ParameterError on out-of-range values.
  void validate() const;
};

// Normalized binary ellipsoid: cells with
//   sum over axes of (2 x / (K - 1) - 1)^2 <= 1,
// where size-1 axes contribute 0; weights divided by their count.
Kernel3D ellipsoid_kernel(std::size_t tk, std::size_t hk, std::size_t wk);

// Number of ones in the area template for n elements: round-half-up of v * n.
std::size_t template_ones(std::size_t n, double v);

// ||vecsort(m) - r_v||^2. When `grad` is given it receives dL/dm; elements
// tied in value share the mean template value of their rank block, so tied
// inputs get identical gradients.
double loss_area(const Volume& m, double v, Volume* grad = nullptr);

double smooth_beta(Shape3 mask, Shape3 kernel, Stride3 stride, std::size_t padding, SmoothBeta rule);

// L_S^{beta v}(conv3d(m, k)). `grad` receives dL/dm.
double loss_smooth(const Volume& m, double v, const Kernel3D& k, Stride3 stride, std::size_t padding,
                   SmoothBeta rule, Volume* grad = nullptr);

Shape3 seed_shape_for(Shape3 video, std::size_t scale);
Volume upsample_seed(const Volume& seed, Shape3 video, const StepConfig& cfg);

struct ObjectiveTerms {
  double area = 0.0;
  double smooth = 0.0;
  double phi = 0.0;
  double value = 0.0;  // lambda1 * area + lambda2 * smooth - phi
};

// Evaluates the combined objective at a seed mask. `seed_grad`, when given,
// receives the gradient with respect to the seed.
ObjectiveTerms step_objective(const VideoTensor& x, const VideoTensor& baseline, const Scorer& scorer,
                              std::size_t c, double v, const Volume& seed, double lambda1, double lambda2,
                              const StepConfig& cfg, Volume* seed_grad = nullptr);

struct MaskResult {
  Volume mask;
  Volume seed;
  double phi = 0.0;  // Phi_c(mask (x) X)
  std::vector<ObjectiveTerms> trace;
};

MaskResult optimize_mask(const VideoTensor& x, const Scorer& scorer, std::size_t c, double v, const StepConfig& cfg);

struct ExtremalChoice {
  std::size_t index = 0;
  double area = 0.0;
  bool floor_met = false;
};

// Smallest area whose output reaches phi0; the largest one with
// floor_met = false if none does. `areas` must be ascending.
ExtremalChoice select_extremal(std::span<const double> areas, std::span<const double> phis, double phi0);

// Optimizes areas in ascending order and stops at the first that meets the floor.
ExtremalChoice extremal_search(const VideoTensor& x, const Scorer& scorer, std::size_t c, const StepConfig& cfg);

// Sum, per-frame Gaussian blur (skipped when sigma == 0), global min-max.
Volume aggregate_heatmap(std::span<const Volume> masks, double sigma);

struct StepResult {
  std::vector<double> areas;
  std::vector<Volume> masks;
  std::vector<double> phis;
  std::vector<std::vector<ObjectiveTerms>> traces;
  double phi_input = 0.0;
  double phi0 = 0.0;
  ExtremalChoice extremal;
  Volume heatmap;
};

StepResult run_step(const VideoTensor& x, const Scorer& scorer, std::size_t c, const StepConfig& cfg);

// Number of 6-connected components of {m >= threshold}.
std::size_t count_components(const Volume& m, double threshold = 0.5);

// Intersection over union of {a >= threshold} and {b >= threshold}.
double mask_iou(const Volume& a, const Volume& b, double threshold = 0.5);

}  // namespace vattr
