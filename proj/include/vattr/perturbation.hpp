#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vattr/tensor.hpp"

namespace vattr {

enum class BaselineMode { blur, dataset_mean, black };

struct PerturbConfig {
  double blur_sigma = 10.0;
  BaselineMode baseline_mode = BaselineMode::blur;
};

// Reference input that a zero mask value reveals. dataset_mean needs `mean`.
VideoTensor make_baseline(const VideoTensor& x, const PerturbConfig& cfg, const VideoTensor* mean = nullptr);

// M (x) X = M * X + (1 - M) * baseline, the mask broadcast over channels.
VideoTensor perturb_with(const VideoTensor& x, const Volume& m, const VideoTensor& baseline);
VideoTensor perturb(const VideoTensor& x, const Volume& m, const PerturbConfig& cfg,
                    const VideoTensor* mean = nullptr);

// Gradient of a scalar f(M (x) X) with respect to M given df/d(M (x) X):
// sum over channels of (x - baseline) * grad.
Volume perturb_mask_gradient(const VideoTensor& x, const VideoTensor& baseline, const VideoTensor& grad);

enum class UnitKind { patch, supervoxel };

struct UnitSpec {
  UnitKind kind = UnitKind::patch;
  std::size_t size = 7;  // patch side (px) or supervoxel target count

  // "patch:7" or "supervoxel:256".
  static UnitSpec parse(std::string_view text);
  std::string str() const;
  friend bool operator==(const UnitSpec&, const UnitSpec&) = default;
};

// Disjoint cover of all T*H*W voxel indices.
struct UnitPartition {
  Shape3 shape;
  std::vector<std::uint32_t> labels;           // unit of every voxel
  std::vector<std::vector<std::size_t>> units;  // voxels of every unit, ascending

  std::size_t count() const { return units.size(); }
};

// Per-frame square tiles; tiles on the bottom/right edges are smaller.
UnitPartition partition_patches(Shape3 shape, std::size_t size);

struct SupervoxelOptions {
  double compactness = 0.5;
  std::size_t iterations = 10;
};

// SLIC-style k-means over (intensity, t/T, i/H, j/W) seeded on a regular grid,
// followed by a 6-connectivity cleanup that folds small fragments into a
// neighbouring unit.
UnitPartition partition_supervoxels(const VideoTensor& x, std::size_t target, const SupervoxelOptions& opt = {});

UnitPartition partition(const VideoTensor& x, const UnitSpec& spec);

// Builds a partition from an arbitrary label volume (labels must be dense 0..n-1).
UnitPartition partition_from_labels(Shape3 shape, std::vector<std::uint32_t> labels);

enum class Operation { insertion, deletion };
enum class Order { morf, lerf };

std::string to_string(Operation op);
std::string to_string(Order order);

// Units in perturbation order and the incremental masks H^(l) they induce.
// H^(0) is all zeros for insertion and all ones for deletion; step l flips
// the voxels of steps[l-1]. Masks are materialized on request only.
class PerturbationSchedule {
 public:
  PerturbationSchedule(Operation op, Order order, Shape3 shape, std::vector<std::size_t> unit_order,
                       std::vector<std::vector<std::size_t>> steps);

  Operation operation() const { return op_; }
  Order order() const { return order_; }
  const Shape3& shape() const { return shape_; }
  // L, the number of perturbation steps.
  std::size_t length() const { return steps_.size(); }
  const std::vector<std::size_t>& unit_order() const { return unit_order_; }
  // Voxels switched at step l (1-based, l in [1, L]).
  const std::vector<std::size_t>& step_voxels(std::size_t l) const { return steps_.at(l - 1); }

  Volume mask(std::size_t l) const;            // H^(l)
  Volume increment(std::size_t l) const;       // h^(l), indicator of step l

 private:
  Operation op_;
  Order order_;
  Shape3 shape_;
  std::vector<std::size_t> unit_order_;
  std::vector<std::vector<std::size_t>> steps_;
};

// Mean attribution of every unit.
std::vector<double> unit_means(const Volume& map, const UnitPartition& part);

// Units ranked by mean attribution. MoRF is descending with ties by unit
// index; LeRF is the exact reverse of MoRF.
PerturbationSchedule build_schedule(const Volume& map, const UnitPartition& part, Operation op, Order order);

}  // namespace vattr
