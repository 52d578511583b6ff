#include "csf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace csf {

namespace {

double sphere_sdf(const SdfSphere& s, const Vec3d& p) {
  return (p - s.center).norm() - s.radius;
}

double box_sdf(const SdfBox& b, const Vec3d& p) {
  const Vec3d q = (p - b.center).cwiseAbs() - b.half_extents;
  const Vec3d outside = q.cwiseMax(0.0);
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside.norm() + inside;
}

double plane_sdf(const SdfPlane& pl, const Vec3d& p) {
  return pl.normal.dot(p) - pl.offset;
}

}  // namespace

double Scene::signed_distance(const Vec3d& p) const {
  double d = std::numeric_limits<double>::max();
  for (const auto& s : spheres) d = std::min(d, sphere_sdf(s, p));
  for (const auto& b : boxes) d = std::min(d, box_sdf(b, p));
  for (const auto& pl : planes) d = std::min(d, plane_sdf(pl, p));
  return d;
}

Vec3d Scene::normal(const Vec3d& p, double eps) const {
  Vec3d n;
  for (int i = 0; i < 3; ++i) {
    Vec3d lo = p, hi = p;
    lo[i] -= eps;
    hi[i] += eps;
    n[i] = signed_distance(hi) - signed_distance(lo);
  }
  return n.normalized();
}

Scene default_scene() {
  Scene scene;
  scene.planes.push_back({Vec3d::UnitZ(), 0.0});
  scene.spheres.push_back({Vec3d(0.0, 0.0, 0.6), 0.5});
  scene.boxes.push_back({Vec3d(0.75, 0.45, 0.25), Vec3d(0.25, 0.2, 0.25)});
  return scene;
}

Image<double> render_depth(const Scene& scene, const Pose& camera_to_world,
                           const Intrinsics& k, double far, double hit_eps) {
  Image<double> depth(k.width, k.height, 0.0);
  const Vec3d origin = camera_to_world.translation;

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      Vec3d dir_cam((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      const double zfac = 1.0 / dir_cam.norm();
      dir_cam *= zfac;  // unit ray; camera z-depth = distance * zfac
      const Vec3d dir = camera_to_world.rotation * dir_cam;

      double s = 0.0;
      for (int it = 0; it < 512 && s < far; ++it) {
        const double phi = scene.signed_distance(origin + s * dir);
        if (phi < hit_eps) {
          // March stops short along grazing rays; Newton steps along the ray
          // (slope = dir . grad) pull the hit onto the surface.
          for (int r = 0; r < 3; ++r) {
            const Vec3d p = origin + s * dir;
            const double res = scene.signed_distance(p);
            const double slope = dir.dot(scene.normal(p));
            s -= res / std::min(slope, -0.05);
          }
          depth.at(x, y) = s * zfac;
          break;
        }
        s += phi;
      }
    }
  }
  return depth;
}

Pose orbit_pose(const Vec3d& target, double radius, double height, double angle) {
  const Vec3d eye = target + Vec3d(radius * std::cos(angle),
                                   radius * std::sin(angle), height);
  const Vec3d zc = (target - eye).normalized();
  Vec3d xc = zc.cross(Vec3d::UnitZ());
  xc.normalize();
  const Vec3d yc = zc.cross(xc);
  Pose pose;
  pose.rotation.col(0) = xc;
  pose.rotation.col(1) = yc;
  pose.rotation.col(2) = zc;
  pose.translation = eye;
  return pose;
}

std::vector<Pose> orbit_trajectory(const Vec3d& target, double radius,
                                   double height, int frames, double arc) {
  std::vector<Pose> out;
  out.reserve(frames);
  for (int i = 0; i < frames; ++i)
    out.push_back(orbit_pose(target, radius, height, arc * i / frames));
  return out;
}

double GaussianSource::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on two uniforms built from the top 53 bits of the generator.
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  double u1;
  do {
    u1 = static_cast<double>(state_() >> 11) * kScale;
  } while (u1 <= 0.0);
  const double u2 = static_cast<double>(state_() >> 11) * kScale;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

Image<double> add_depth_noise(const Image<double>& depth, double sigma,
                              uint64_t seed) {
  GaussianSource gauss(seed);
  Image<double> out = depth;
  for (auto& d : out.data) {
    if (!(d > 0.0)) continue;
    const double noisy = d + sigma * gauss.next();
    d = noisy > 0.0 ? noisy : 0.0;
  }
  return out;
}

Image<double> quantize_depth(const Image<double>& depth, double scale) {
  Image<double> out = depth;
  for (auto& d : out.data) {
    if (!(d > 0.0)) {
      d = 0.0;
      continue;
    }
    const double q = std::round(d * scale);
    d = (q >= 1.0 && q <= 65535.0) ? q / scale : 0.0;
  }
  return out;
}

}  // namespace csf
