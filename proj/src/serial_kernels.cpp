// Single-threaded reference kernels. Written as direct loops over the
// defining formulas so they stay independent of the parallel versions.

#include <algorithm>
#include <cmath>
#include <limits>

#include "vattr/error.hpp"
#include "vattr/kernels.hpp"

namespace vattr::serial {

VideoTensor gaussian_blur2d(const VideoTensor& x, double sigma) {
  const auto taps = gaussian_taps(sigma);
  const long r = static_cast<long>(taps.size() / 2);
  VideoTensor out(x.frame_shape(), x.channels());
  for (std::size_t t = 0; t < x.frames(); ++t)
    for (std::size_t c = 0; c < x.channels(); ++c)
      for (std::size_t i = 0; i < x.height(); ++i)
        for (std::size_t j = 0; j < x.width(); ++j) {
          double acc = 0.0;
          for (long a = -r; a <= r; ++a)
            for (long b = -r; b <= r; ++b) {
              const std::size_t ii = reflect_index(static_cast<long>(i) + a, x.height());
              const std::size_t jj = reflect_index(static_cast<long>(j) + b, x.width());
              acc += taps[a + r] * taps[b + r] * x(t, ii, jj, c);
            }
          out(t, i, j, c) = acc;
        }
  return out;
}

Volume conv3d(const Volume& m, const Kernel3D& k, Stride3 stride, std::size_t padding) {
  const Shape3 os = conv3d_output_shape(m.shape(), k.shape(), stride, padding);
  const Shape3 ks = k.shape();
  const long pad = static_cast<long>(padding);
  Volume out(os);
  for (std::size_t ot = 0; ot < os.t; ++ot)
    for (std::size_t oi = 0; oi < os.h; ++oi)
      for (std::size_t oj = 0; oj < os.w; ++oj) {
        double acc = 0.0;
        for (std::size_t a = 0; a < ks.t; ++a)
          for (std::size_t b = 0; b < ks.h; ++b)
            for (std::size_t c = 0; c < ks.w; ++c) {
              const long t = static_cast<long>(ot * stride.t + a) - pad;
              const long i = static_cast<long>(oi * stride.h + b) - pad;
              const long j = static_cast<long>(oj * stride.w + c) - pad;
              if (t < 0 || i < 0 || j < 0 || t >= static_cast<long>(m.frames()) ||
                  i >= static_cast<long>(m.height()) || j >= static_cast<long>(m.width()))
                continue;
              acc += k.weights()(a, b, c) * m(t, i, j);
            }
        out(ot, oi, oj) = acc;
      }
  return out;
}

Volume conv3d_adjoint(const Volume& grad_out, const Kernel3D& k, Shape3 input_shape, Stride3 stride,
                      std::size_t padding) {
  const Shape3 os = conv3d_output_shape(input_shape, k.shape(), stride, padding);
  if (!(grad_out.shape() == os)) throw ContractError("conv3d_adjoint: gradient shape mismatch");
  const Shape3 ks = k.shape();
  const long pad = static_cast<long>(padding);
  Volume grad_in(input_shape, 0.0);
  for (std::size_t ot = 0; ot < os.t; ++ot)
    for (std::size_t oi = 0; oi < os.h; ++oi)
      for (std::size_t oj = 0; oj < os.w; ++oj)
        for (std::size_t a = 0; a < ks.t; ++a)
          for (std::size_t b = 0; b < ks.h; ++b)
            for (std::size_t c = 0; c < ks.w; ++c) {
              const long t = static_cast<long>(ot * stride.t + a) - pad;
              const long i = static_cast<long>(oi * stride.h + b) - pad;
              const long j = static_cast<long>(oj * stride.w + c) - pad;
              if (t < 0 || i < 0 || j < 0 || t >= static_cast<long>(input_shape.t) ||
                  i >= static_cast<long>(input_shape.h) || j >= static_cast<long>(input_shape.w))
                continue;
              grad_in(t, i, j) += k.weights()(a, b, c) * grad_out(ot, oi, oj);
            }
  return grad_in;
}

Volume upsample_smooth(const Volume& seed, std::size_t factor, double sigma, std::size_t out_h,
                       std::size_t out_w) {
  if (factor < 1) throw ParameterError("upsample_smooth: factor must be >= 1");
  if (!(sigma > 0.0)) throw ParameterError("upsample_smooth: sigma must be > 0");
  const std::size_t H = out_h ? out_h : seed.height() * factor;
  const std::size_t W = out_w ? out_w : seed.width() * factor;
  const double offset = (static_cast<double>(factor) - 1.0) / 2.0;
  Volume out({seed.frames(), H, W});
  for (std::size_t t = 0; t < seed.frames(); ++t)
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = 0; j < W; ++j) {
        // Full 2D weights, shifted by the smallest squared distance per axis.
        double dmin_i = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < seed.height(); ++a) {
          const double di = static_cast<double>(i) - (static_cast<double>(a * factor) + offset);
          dmin_i = std::min(dmin_i, di * di);
        }
        double dmin_j = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < seed.width(); ++b) {
          const double dj = static_cast<double>(j) - (static_cast<double>(b * factor) + offset);
          dmin_j = std::min(dmin_j, dj * dj);
        }
        double num = 0.0, den = 0.0;
        for (std::size_t a = 0; a < seed.height(); ++a)
          for (std::size_t b = 0; b < seed.width(); ++b) {
            const double di = static_cast<double>(i) - (static_cast<double>(a * factor) + offset);
            const double dj = static_cast<double>(j) - (static_cast<double>(b * factor) + offset);
            const double g = std::exp(-((di * di + dj * dj) - (dmin_i + dmin_j)) / (2.0 * sigma * sigma));
            num += g * seed(t, a, b);
            den += g;
          }
        out(t, i, j) = num / den;
      }
  return out;
}

}  // namespace vattr::serial
