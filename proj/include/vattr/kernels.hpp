#pragma once

// Numeric kernels shared by every module. The functions in namespace vattr
// are OpenMP-parallel; namespace vattr::serial holds plain single-threaded
// reference versions that the tests and benchmarks compare against.

#include <cstddef>
#include <span>
#include <vector>

#include "vattr/tensor.hpp"

namespace vattr {

Volume hadamard(const Volume& a, const Volume& b);
VideoTensor hadamard(const VideoTensor& a, const VideoTensor& b);

// Index into [0, n) under whole-sample mirror padding (d c b | a b c d | c b a).
std::size_t reflect_index(long i, std::size_t n);

// Normalized 1D Gaussian taps, half-width ceil(2 * sigma).
std::vector<double> gaussian_taps(double sigma);

// Per-frame, per-channel separable Gaussian blur with mirrored borders.
VideoTensor gaussian_blur2d(const VideoTensor& x, double sigma);
Volume gaussian_blur2d(const Volume& x, double sigma);

Shape3 conv3d_output_shape(Shape3 input, Shape3 kernel, Stride3 stride, std::size_t padding);

// Strided 3D cross-correlation over the zero-padded input, valid region only.
Volume conv3d(const Volume& m, const Kernel3D& k, Stride3 stride, std::size_t padding);

// Adjoint of conv3d with respect to its input: maps an output-shaped gradient
// back to an input-shaped one.
Volume conv3d_adjoint(const Volume& grad_out, const Kernel3D& k, Shape3 input_shape, Stride3 stride,
                      std::size_t padding);

// Row-normalized Gaussian interpolation weights mapping `in` seed cells to
// `out` pixels; seed cell a sits at pixel a * factor + (factor - 1) / 2.
// Row-major out x in.
std::vector<double> upsample_weights(std::size_t out, std::size_t in, std::size_t factor, double sigma);

// Gaussian transposed-convolution upsampling of every frame, renormalized by
// the per-pixel weight sum so outputs are convex combinations of the seed.
// out_h / out_w crop the result (0 keeps the full factor * size).
Volume upsample_smooth(const Volume& seed, std::size_t factor, double sigma, std::size_t out_h = 0,
                       std::size_t out_w = 0);
inline Volume upsample_smooth(const Volume& seed, std::size_t factor) {
  return upsample_smooth(seed, factor, static_cast<double>(factor));
}

// Adjoint of upsample_smooth with respect to the seed.
Volume upsample_smooth_adjoint(const Volume& grad_out, Shape3 seed_shape, std::size_t factor, double sigma);

// Indices of `values` ordered by value descending; equal values keep index order.
std::vector<std::size_t> descending_order(std::span<const double> values);

// All elements flattened and sorted descending (stable).
std::vector<double> vecsort(const Volume& m);

namespace serial {

VideoTensor gaussian_blur2d(const VideoTensor& x, double sigma);
Volume conv3d(const Volume& m, const Kernel3D& k, Stride3 stride, std::size_t padding);
Volume conv3d_adjoint(const Volume& grad_out, const Kernel3D& k, Shape3 input_shape, Stride3 stride,
                      std::size_t padding);
Volume upsample_smooth(const Volume& seed, std::size_t factor, double sigma, std::size_t out_h = 0,
                       std::size_t out_w = 0);

}  // namespace serial

}  // namespace vattr
