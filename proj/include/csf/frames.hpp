#pragma once

// Depth-frame preprocessing: pinhole camera model, bilateral denoising,
// vertex/normal measurement, seeded per-pixel depth perturbation, and the
// depth-aware coarse-to-fine pyramid.

#include <stdexcept>
#include <vector>

#include "csf/csfd.hpp"
#include "csf/image.hpp"

namespace csf {

struct Intrinsics {
  double fx = 525.0;
  double fy = 525.0;
  double cx = 319.5;
  double cy = 239.5;
  int width = 640;
  int height = 480;
  double depth_scale = 5000.0;  // integer units per meter on disk

  // Pyramid level l: image dimensions and focal/center all halve per level.
  Intrinsics at_level(int l) const {
    Intrinsics k = *this;
    const double s = static_cast<double>(1 << l);
    k.fx /= s;
    k.fy /= s;
    k.cx /= s;
    k.cy /= s;
    k.width = width >> l;
    k.height = height >> l;
    return k;
  }
};

template <typename S>
Vec3<S> backproject(const Intrinsics& k, const S& x, const S& y, const S& depth) {
  return {depth * (x - S(k.cx)) / S(k.fx), depth * (y - S(k.cy)) / S(k.fy), depth};
}

// Perspective projection to pixel coordinates; caller checks z > 0 first.
template <typename S>
Vec2<S> project(const Intrinsics& k, const Vec3<S>& p) {
  return {S(k.fx) * p.x() / p.z() + S(k.cx), S(k.fy) * p.y() / p.z() + S(k.cy)};
}

template <typename S>
bool depth_valid(const S& d) {
  return real_part(d) > 0.0;
}

// Bilateral filter: 7x7 window, spatial sigma in pixels, range sigma in
// meters. Invalid neighbours are skipped; invalid centers stay invalid.
Image<double> bilateral_filter(const Image<double>& depth, double sigma_s = 4.5,
                               double sigma_r = 0.03, int radius = 3);

// Depth-aware 2x downsampling (one level), binomial 5-tap weights, dropping
// neighbours more than 3*sigma_r from the center depth.
Image<double> downsample_depth(const Image<double>& depth, double sigma_r = 0.03);

std::vector<Image<double>> build_depth_pyramid(const Image<double>& depth,
                                               int levels = 3,
                                               double sigma_r = 0.03);

template <typename S>
struct SurfaceMaps {
  Image<Vec3<S>> vertices;
  Image<Vec3<S>> normals;
};

template <typename S>
bool vertex_valid(const Vec3<S>& v) {
  return real_part(v.z()) > 0.0;
}

template <typename S>
bool normal_valid(const Vec3<S>& n) {
  return real_part(n.dot(n)) > 0.5;
}

// Back-projected vertices and right/down-difference cross-product normals.
// Normals are oriented toward the camera (n . v <= 0) so they agree with
// the sign convention of distance-field gradients.
template <typename S>
SurfaceMaps<S> measure_surface(const Image<S>& depth, const Intrinsics& k) {
  SurfaceMaps<S> maps;
  maps.vertices = Image<Vec3<S>>(depth.width, depth.height, Vec3<S>::Zero());
  maps.normals = Image<Vec3<S>>(depth.width, depth.height, Vec3<S>::Zero());

  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const S& d = depth.at(x, y);
      if (depth_valid(d))
        maps.vertices.at(x, y) = backproject(k, S(double(x)), S(double(y)), d);
    }
  }
  for (int y = 0; y + 1 < depth.height; ++y) {
    for (int x = 0; x + 1 < depth.width; ++x) {
      const Vec3<S>& v = maps.vertices.at(x, y);
      const Vec3<S>& vx = maps.vertices.at(x + 1, y);
      const Vec3<S>& vy = maps.vertices.at(x, y + 1);
      if (!vertex_valid(v) || !vertex_valid(vx) || !vertex_valid(vy)) continue;
      Vec3<S> n = (vx - v).cross(vy - v);
      const S len2 = n.dot(n);
      if (!(real_part(len2) > 0.0)) continue;
      n = n / sqrt(len2);
      if (real_part(n.dot(v)) > 0.0) n = -n;
      maps.normals.at(x, y) = n;
    }
  }
  return maps;
}

// Depth image with a zeroed derivative channel, ready for lifted evaluation.
Image<Complex> complex_depth(const Image<double>& depth);

// Lift one pixel's depth into a complex seed. Perturbing across a depth
// discontinuity (or next to missing data) has no meaningful derivative, so
// those cases are rejected.
Image<Complex> perturb_depth(const Image<double>& depth, int x, int y,
                             const StepSize& step, double delta_edge = 0.1);

// Bilinear depth interpolation at a continuous pixel position. All four
// corners must be valid and in bounds, otherwise returns 0 (invalid).
template <typename S>
S bilinear_depth(const Image<S>& depth, const S& x, const S& y) {
  const int x0 = ifloor(x);
  const int y0 = ifloor(y);
  if (x0 < 0 || y0 < 0 || x0 + 1 >= depth.width || y0 + 1 >= depth.height)
    return S(0.0);
  const S& d00 = depth.at(x0, y0);
  const S& d10 = depth.at(x0 + 1, y0);
  const S& d01 = depth.at(x0, y0 + 1);
  const S& d11 = depth.at(x0 + 1, y0 + 1);
  if (!depth_valid(d00) || !depth_valid(d10) || !depth_valid(d01) ||
      !depth_valid(d11))
    return S(0.0);
  const S fx = x - S(double(x0));
  const S fy = y - S(double(y0));
  const S top = d00 + fx * (d10 - d00);
  const S bot = d01 + fx * (d11 - d01);
  return top + fy * (bot - top);
}

}  // namespace csf
