#include "csf/frames.hpp"

#include <cmath>

namespace csf {

Image<double> bilateral_filter(const Image<double>& depth, double sigma_s,
                               double sigma_r, int radius) {
  Image<double> out(depth.width, depth.height, 0.0);
  const double inv2ss = 1.0 / (2.0 * sigma_s * sigma_s);
  const double inv2sr = 1.0 / (2.0 * sigma_r * sigma_r);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const double center = depth.at(x, y);
      if (!(center > 0.0)) continue;
      double wsum = 0.0, vsum = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const int qx = x + dx, qy = y + dy;
          if (!depth.in_bounds(qx, qy)) continue;
          const double q = depth.at(qx, qy);
          if (!(q > 0.0)) continue;
          const double dd = q - center;
          const double w = std::exp(-(dx * dx + dy * dy) * inv2ss) *
                           std::exp(-dd * dd * inv2sr);
          wsum += w;
          vsum += w * q;
        }
      }
      out.at(x, y) = vsum / wsum;
    }
  }
  return out;
}

Image<double> downsample_depth(const Image<double>& depth, double sigma_r) {
  static const double kTap[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  Image<double> out(depth.width / 2, depth.height / 2, 0.0);
  const double reject = 3.0 * sigma_r;

  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const int cx = 2 * x, cy = 2 * y;
      const double center = depth.at(cx, cy);
      if (!(center > 0.0)) continue;
      double wsum = 0.0, vsum = 0.0;
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          const int qx = cx + dx, qy = cy + dy;
          if (!depth.in_bounds(qx, qy)) continue;
          const double q = depth.at(qx, qy);
          if (!(q > 0.0) || std::fabs(q - center) > reject) continue;
          const double w = kTap[dx + 2] * kTap[dy + 2];
          wsum += w;
          vsum += w * q;
        }
      }
      out.at(x, y) = vsum / wsum;
    }
  }
  return out;
}

std::vector<Image<double>> build_depth_pyramid(const Image<double>& depth,
                                               int levels, double sigma_r) {
  std::vector<Image<double>> pyr;
  pyr.reserve(levels);
  pyr.push_back(depth);
  for (int l = 1; l < levels; ++l) pyr.push_back(downsample_depth(pyr.back(), sigma_r));
  return pyr;
}

Image<Complex> complex_depth(const Image<double>& depth) {
  Image<Complex> out(depth.width, depth.height, Complex(0.0));
  for (size_t i = 0; i < depth.data.size(); ++i) out.data[i] = Complex(depth.data[i]);
  return out;
}

Image<Complex> perturb_depth(const Image<double>& depth, int x, int y,
                             const StepSize& step, double delta_edge) {
  if (!depth.in_bounds(x, y))
    throw std::invalid_argument("perturb_depth: pixel out of bounds");
  const double center = depth.at(x, y);
  if (!(center > 0.0))
    throw std::invalid_argument("perturb_depth: pixel has no depth");
  const int nx[4] = {x - 1, x + 1, x, x};
  const int ny[4] = {y, y, y - 1, y + 1};
  for (int i = 0; i < 4; ++i) {
    if (!depth.in_bounds(nx[i], ny[i])) continue;
    const double d = depth.at(nx[i], ny[i]);
    if (!(d > 0.0) || std::fabs(d - center) > delta_edge)
      throw std::invalid_argument(
          "perturb_depth: pixel sits on a depth discontinuity");
  }
  Image<Complex> out = complex_depth(depth);
  out.at(x, y).im = step.h;
  return out;
}

}  // namespace csf
