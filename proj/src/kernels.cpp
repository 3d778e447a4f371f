#include "vattr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vattr/error.hpp"

namespace vattr {

namespace {

struct Tap {
  std::size_t dt, di, dj;
  double w;
};

std::vector<Tap> nonzero_taps(const Kernel3D& k) {
  std::vector<Tap> taps;
  const Volume& w = k.weights();
  for (std::size_t a = 0; a < w.frames(); ++a)
    for (std::size_t b = 0; b < w.height(); ++b)
      for (std::size_t c = 0; c < w.width(); ++c)
        if (w(a, b, c) != 0.0) taps.push_back({a, b, c, w(a, b, c)});
  return taps;
}

// Horizontal then vertical pass over one (strided) plane.
void blur_plane(const double* src, double* dst, std::size_t h, std::size_t w, std::size_t stride,
                const std::vector<double>& taps, std::vector<double>& tmp) {
  const long r = static_cast<long>(taps.size() / 2);
  tmp.assign(h * w, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      double acc = 0.0;
      for (long k = -r; k <= r; ++k) {
        acc += taps[k + r] * src[(i * w + reflect_index(static_cast<long>(j) + k, w)) * stride];
      }
      tmp[i * w + j] = acc;
    }
  }
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      double acc = 0.0;
      for (long k = -r; k <= r; ++k) {
        acc += taps[k + r] * tmp[reflect_index(static_cast<long>(i) + k, h) * w + j];
      }
      dst[(i * w + j) * stride] = acc;
    }
  }
}

}  // namespace

Volume hadamard(const Volume& a, const Volume& b) {
  if (!(a.shape() == b.shape())) throw ContractError("hadamard: shape mismatch");
  Volume out(a.shape());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
  return out;
}

VideoTensor hadamard(const VideoTensor& a, const VideoTensor& b) {
  if (!(a.frame_shape() == b.frame_shape()) || a.channels() != b.channels()) {
    throw ContractError("hadamard: shape mismatch");
  }
  VideoTensor out(a.frame_shape(), a.channels());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
  return out;
}

std::size_t reflect_index(long i, std::size_t n) {
  if (n == 1) return 0;
  const long period = 2 * (static_cast<long>(n) - 1);
  long m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<long>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

std::vector<double> gaussian_taps(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("gaussian sigma must be > 0");
  const long r = static_cast<long>(std::ceil(2.0 * sigma));
  std::vector<double> taps(2 * r + 1);
  for (long k = -r; k <= r; ++k) taps[k + r] = std::exp(-0.5 * (k * k) / (sigma * sigma));
  const double z = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (double& t : taps) t /= z;
  return taps;
}

VideoTensor gaussian_blur2d(const VideoTensor& x, double sigma) {
  const auto taps = gaussian_taps(sigma);
  VideoTensor out(x.frame_shape(), x.channels());
  const std::size_t h = x.height(), w = x.width(), ch = x.channels();
  const long planes = static_cast<long>(x.frames() * ch);
#pragma omp parallel
  {
    std::vector<double> tmp;
#pragma omp for schedule(static)
    for (long p = 0; p < planes; ++p) {
      const std::size_t t = static_cast<std::size_t>(p) / ch;
      const std::size_t c = static_cast<std::size_t>(p) % ch;
      const double* src = x.values().data() + t * h * w * ch + c;
      double* dst = out.values().data() + t * h * w * ch + c;
      blur_plane(src, dst, h, w, ch, taps, tmp);
    }
  }
  return out;
}

Volume gaussian_blur2d(const Volume& x, double sigma) {
  const auto taps = gaussian_taps(sigma);
  Volume out(x.shape());
  const std::size_t h = x.height(), w = x.width();
  const long frames = static_cast<long>(x.frames());
#pragma omp parallel
  {
    std::vector<double> tmp;
#pragma omp for schedule(static)
    for (long t = 0; t < frames; ++t) {
      blur_plane(x.frame(t).data(), out.frame(t).data(), h, w, 1, taps, tmp);
    }
  }
  return out;
}

Shape3 conv3d_output_shape(Shape3 input, Shape3 kernel, Stride3 stride, std::size_t padding) {
  if (stride.t == 0 || stride.h == 0 || stride.w == 0) throw ParameterError("conv3d: stride must be >= 1");
  auto axis = [&](std::size_t dim, std::size_t k, std::size_t s, const char* name) {
    if (dim + 2 * padding < k) {
      throw ParameterError(std::string("conv3d: kernel larger than padded input along ") + name);
    }
    return (dim + 2 * padding - k) / s + 1;
  };
  return {axis(input.t, kernel.t, stride.t, "T"), axis(input.h, kernel.h, stride.h, "H"),
          axis(input.w, kernel.w, stride.w, "W")};
}

Volume conv3d(const Volume& m, const Kernel3D& k, Stride3 stride, std::size_t padding) {
  const Shape3 os = conv3d_output_shape(m.shape(), k.shape(), stride, padding);
  const auto taps = nonzero_taps(k);
  const long pad = static_cast<long>(padding);
  const long T = static_cast<long>(m.frames()), H = static_cast<long>(m.height()),
             W = static_cast<long>(m.width());
  Volume out(os);
#pragma omp parallel for schedule(static)
  for (long ot = 0; ot < static_cast<long>(os.t); ++ot) {
    for (std::size_t oi = 0; oi < os.h; ++oi) {
      for (std::size_t oj = 0; oj < os.w; ++oj) {
        const long t0 = ot * static_cast<long>(stride.t) - pad;
        const long i0 = static_cast<long>(oi * stride.h) - pad;
        const long j0 = static_cast<long>(oj * stride.w) - pad;
        double acc = 0.0;
        for (const Tap& tp : taps) {
          const long t = t0 + static_cast<long>(tp.dt), i = i0 + static_cast<long>(tp.di),
                     j = j0 + static_cast<long>(tp.dj);
          if (t < 0 || t >= T || i < 0 || i >= H || j < 0 || j >= W) continue;
          acc += tp.w * m(t, i, j);
        }
        out(ot, oi, oj) = acc;
      }
    }
  }
  return out;
}

Volume conv3d_adjoint(const Volume& grad_out, const Kernel3D& k, Shape3 input_shape, Stride3 stride,
                      std::size_t padding) {
  const Shape3 os = conv3d_output_shape(input_shape, k.shape(), stride, padding);
  if (!(grad_out.shape() == os)) throw ContractError("conv3d_adjoint: gradient shape mismatch");
  const auto taps = nonzero_taps(k);
  const long pad = static_cast<long>(padding);
  const long H = static_cast<long>(input_shape.h), W = static_cast<long>(input_shape.w);
  Volume grad_in(input_shape, 0.0);
  // Each thread owns whole input frames, so the scatter below is race-free.
#pragma omp parallel for schedule(static)
  for (long t = 0; t < static_cast<long>(input_shape.t); ++t) {
    for (const Tap& tp : taps) {
      const long num = t + pad - static_cast<long>(tp.dt);
      if (num < 0 || num % static_cast<long>(stride.t) != 0) continue;
      const long ot = num / static_cast<long>(stride.t);
      if (ot >= static_cast<long>(os.t)) continue;
      for (std::size_t oi = 0; oi < os.h; ++oi) {
        const long i = static_cast<long>(oi * stride.h) - pad + static_cast<long>(tp.di);
        if (i < 0 || i >= H) continue;
        for (std::size_t oj = 0; oj < os.w; ++oj) {
          const long j = static_cast<long>(oj * stride.w) - pad + static_cast<long>(tp.dj);
          if (j < 0 || j >= W) continue;
          grad_in(t, i, j) += tp.w * grad_out(ot, oi, oj);
        }
      }
    }
  }
  return grad_in;
}

std::vector<double> upsample_weights(std::size_t out, std::size_t in, std::size_t factor, double sigma) {
  if (factor < 1) throw ParameterError("upsample: factor must be >= 1");
  if (!(sigma > 0.0)) throw ParameterError("upsample: sigma must be > 0");
  std::vector<double> w(out * in);
  const double offset = (static_cast<double>(factor) - 1.0) / 2.0;
  for (std::size_t i = 0; i < out; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < in; ++a) {
      const double d = static_cast<double>(i) - (static_cast<double>(a * factor) + offset);
      dmin = std::min(dmin, d * d);
    }
    double z = 0.0;
    for (std::size_t a = 0; a < in; ++a) {
      const double d = static_cast<double>(i) - (static_cast<double>(a * factor) + offset);
      // Shifting by the nearest distance keeps at least one weight at 1.
      const double v = std::exp(-(d * d - dmin) / (2.0 * sigma * sigma));
      w[i * in + a] = v;
      z += v;
    }
    for (std::size_t a = 0; a < in; ++a) w[i * in + a] /= z;
  }
  return w;
}

Volume upsample_smooth(const Volume& seed, std::size_t factor, double sigma, std::size_t out_h,
                       std::size_t out_w) {
  if (factor < 1) throw ParameterError("upsample_smooth: factor must be >= 1");
  const std::size_t hs = seed.height(), ws = seed.width();
  const std::size_t H = out_h ? out_h : hs * factor;
  const std::size_t W = out_w ? out_w : ws * factor;
  if (H > hs * factor || W > ws * factor) throw ParameterError("upsample_smooth: crop exceeds upsampled size");
  const auto wy = upsample_weights(H, hs, factor, sigma);
  const auto wx = upsample_weights(W, ws, factor, sigma);
  Volume out({seed.frames(), H, W});
#pragma omp parallel
  {
    std::vector<double> tmp(hs * W);
#pragma omp for schedule(static)
    for (long t = 0; t < static_cast<long>(seed.frames()); ++t) {
      for (std::size_t a = 0; a < hs; ++a)
        for (std::size_t j = 0; j < W; ++j) {
          double acc = 0.0;
          for (std::size_t b = 0; b < ws; ++b) acc += seed(t, a, b) * wx[j * ws + b];
          tmp[a * W + j] = acc;
        }
      for (std::size_t i = 0; i < H; ++i)
        for (std::size_t j = 0; j < W; ++j) {
          double acc = 0.0;
          for (std::size_t a = 0; a < hs; ++a) acc += wy[i * hs + a] * tmp[a * W + j];
          out(t, i, j) = acc;
        }
    }
  }
  return out;
}

Volume upsample_smooth_adjoint(const Volume& grad_out, Shape3 seed_shape, std::size_t factor, double sigma) {
  if (grad_out.frames() != seed_shape.t) throw ContractError("upsample_smooth_adjoint: frame count mismatch");
  const std::size_t hs = seed_shape.h, ws = seed_shape.w;
  const std::size_t H = grad_out.height(), W = grad_out.width();
  const auto wy = upsample_weights(H, hs, factor, sigma);
  const auto wx = upsample_weights(W, ws, factor, sigma);
  Volume grad_seed(seed_shape, 0.0);
#pragma omp parallel
  {
    std::vector<double> tmp(hs * W);
#pragma omp for schedule(static)
    for (long t = 0; t < static_cast<long>(seed_shape.t); ++t) {
      std::fill(tmp.begin(), tmp.end(), 0.0);
      for (std::size_t i = 0; i < H; ++i)
        for (std::size_t a = 0; a < hs; ++a) {
          const double wa = wy[i * hs + a];
          for (std::size_t j = 0; j < W; ++j) tmp[a * W + j] += wa * grad_out(t, i, j);
        }
      for (std::size_t a = 0; a < hs; ++a)
        for (std::size_t b = 0; b < ws; ++b) {
          double acc = 0.0;
          for (std::size_t j = 0; j < W; ++j) acc += tmp[a * W + j] * wx[j * ws + b];
          grad_seed(t, a, b) = acc;
        }
    }
  }
  return grad_seed;
}

std::vector<std::size_t> descending_order(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return idx;
}

std::vector<double> vecsort(const Volume& m) {
  std::vector<double> out(m.values().begin(), m.values().end());
  std::stable_sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace vattr
