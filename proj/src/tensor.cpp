#include "vattr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vattr/error.hpp"

namespace vattr {

Volume::Volume(Shape3 shape, double fill) : shape_(shape), data_(shape.count(), fill) {}

Volume::Volume(Shape3 shape, std::vector<double> values) : shape_(shape), data_(std::move(values)) {
  if (data_.size() != shape_.count()) {
    throw ContractError("Volume: " + std::to_string(data_.size()) + " values for shape of " +
                        std::to_string(shape_.count()));
  }
}

double Volume::min() const { return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end()); }
double Volume::max() const { return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end()); }
double Volume::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

Kernel3D::Kernel3D(Volume weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ParameterError("Kernel3D: empty kernel");
  for (double w : weights_.values()) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("Kernel3D: weights must be finite and >= 0");
  }
}

VideoTensor::VideoTensor(Shape3 frames, std::size_t channels, double fill)
    : shape_(frames), channels_(channels), data_(frames.count() * channels, fill) {
  if (channels != 1 && channels != 3) throw ContractError("VideoTensor: channels must be 1 or 3");
  if (frames.t == 0 || frames.h == 0 || frames.w == 0) throw ContractError("VideoTensor: empty dimension");
}

VideoTensor::VideoTensor(Shape3 frames, std::size_t channels, std::vector<double> values)
    : shape_(frames), channels_(channels), data_(std::move(values)) {
  if (channels != 1 && channels != 3) throw ContractError("VideoTensor: channels must be 1 or 3");
  if (frames.t == 0 || frames.h == 0 || frames.w == 0) throw ContractError("VideoTensor: empty dimension");
  if (data_.size() != frames.count() * channels) throw ContractError("VideoTensor: value count mismatch");
}

double VideoTensor::min() const { return *std::min_element(data_.begin(), data_.end()); }
double VideoTensor::max() const { return *std::max_element(data_.begin(), data_.end()); }

bool VideoTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Volume minmax_normalize(const Volume& v) {
  Volume out(v.shape(), 0.0);
  if (v.empty()) return out;
  const double lo = v.min();
  const double hi = v.max();
  if (!(hi > lo)) return out;
  const double range = hi - lo;
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = (v[k] - lo) / range;
  return out;
}

void clamp_inplace(Volume& v, double lo, double hi) {
  for (double& x : v.values()) x = std::clamp(x, lo, hi);
}

}  // namespace vattr
