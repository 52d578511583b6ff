#pragma once

// Truncated signed-distance volume: projective measurement, weighted
// running-average fusion, trilinear sampling, raycast surface prediction,
// and checkpointing. The stored field keeps a first-order channel per voxel
// so derivatives seeded upstream (pose or depth) survive fusion.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "csf/csfd.hpp"
#include "csf/frames.hpp"
#include "csf/image.hpp"
#include "csf/se3.hpp"

namespace csf {

struct VolumeParams {
  Eigen::Vector3i dims = Eigen::Vector3i(128, 128, 128);
  double voxel_size = 0.02;
  Vec3d origin = Vec3d::Zero();   // world position of node (0,0,0)
  double mu = 0.1;                // truncation band, meters
  double weight_cap = 128.0;

  static VolumeParams cube(int n, double voxel, const Vec3d& origin_) {
    VolumeParams p;
    p.dims = Eigen::Vector3i(n, n, n);
    p.voxel_size = voxel;
    p.origin = origin_;
    p.mu = 5.0 * voxel;
    return p;
  }
};

class TsdfVolume {
 public:
  explicit TsdfVolume(const VolumeParams& params)
      : params_(params),
        tsdf_(static_cast<size_t>(params.dims.x()) * params.dims.y() *
                  params.dims.z(),
              Complex(1.0)),
        weight_(tsdf_.size(), 0.0) {}

  const VolumeParams& params() const { return params_; }
  size_t voxel_count() const { return tsdf_.size(); }

  size_t index(int i, int j, int k) const {
    return (static_cast<size_t>(k) * params_.dims.y() + j) * params_.dims.x() +
           i;
  }
  bool in_grid(int i, int j, int k) const {
    return i >= 0 && i < params_.dims.x() && j >= 0 && j < params_.dims.y() &&
           k >= 0 && k < params_.dims.z();
  }

  // Node-centered lattice: voxel (i,j,k) sits at origin + voxel_size*(i,j,k).
  Vec3d voxel_position(int i, int j, int k) const {
    return params_.origin + params_.voxel_size * Vec3d(i, j, k);
  }

  Complex& tsdf_at(size_t idx) { return tsdf_[idx]; }
  const Complex& tsdf_at(size_t idx) const { return tsdf_[idx]; }
  double& weight_at(size_t idx) { return weight_[idx]; }
  double weight_at(size_t idx) const { return weight_[idx]; }

  std::vector<Complex>& tsdf() { return tsdf_; }
  const std::vector<Complex>& tsdf() const { return tsdf_; }
  std::vector<double>& weight() { return weight_; }
  const std::vector<double>& weight() const { return weight_; }

 private:
  VolumeParams params_;
  std::vector<Complex> tsdf_;
  std::vector<double> weight_;
};

// Depth spread across one bilinear footprint beyond which the four samples
// straddle a silhouette edge. Interpolating there would blend foreground
// and background into a fictitious depth, planting free-space votes just
// inside solid surfaces, so such footprints yield no measurement at all
// (the same limit the per-pixel depth seeding refuses to differentiate
// across).
inline constexpr double kDepthEdgeLimit = 0.1;

// The projective truncated measurement of one world point against one depth
// frame. Returns nothing when the point projects outside the image, lacks a
// depth sample, spans a depth discontinuity, or lies more than mu behind
// the measured surface.
//
//   eta = L(pi(K T^-1 p)) - |t - p| / |K^-1 (x, y, 1)|
//   Psi = clamp(eta / mu, -1, 1)          (eta >= -mu)
//
// S carries pose-seeded channels; the depth image carries its own.
template <typename S>
std::optional<S> measured_tsdf(const Image<Complex>& depth,
                               const PoseT<S>& world_to_camera,
                               const Intrinsics& k, double mu,
                               const Vec3<S>& p_world,
                               const Vec3<S>& camera_center) {
  const Vec3<S> pc = world_to_camera * p_world;
  if (!(real_part(pc.z()) > 0.0)) return std::nullopt;

  const Vec2<S> px = project(k, pc);
  const S lx = px.x(), ly = px.y();

  // Bilinear depth sample; measurement channels lifted into S.
  const int x0 = ifloor(lx), y0 = ifloor(ly);
  if (x0 < 0 || y0 < 0 || x0 + 1 >= depth.width || y0 + 1 >= depth.height)
    return std::nullopt;
  const Complex& d00 = depth.at(x0, y0);
  const Complex& d10 = depth.at(x0 + 1, y0);
  const Complex& d01 = depth.at(x0, y0 + 1);
  const Complex& d11 = depth.at(x0 + 1, y0 + 1);
  if (!depth_valid(d00) || !depth_valid(d10) || !depth_valid(d01) ||
      !depth_valid(d11))
    return std::nullopt;

  const double near = std::min(std::min(d00.re, d10.re), std::min(d01.re, d11.re));
  const double far = std::max(std::max(d00.re, d10.re), std::max(d01.re, d11.re));
  if (far - near > kDepthEdgeLimit) return std::nullopt;
  const S fx = lx - S(double(x0));
  const S fy = ly - S(double(y0));
  const S top = lift_measurement<S>(d00) +
                fx * (lift_measurement<S>(d10) - lift_measurement<S>(d00));
  const S bot = lift_measurement<S>(d01) +
                fx * (lift_measurement<S>(d11) - lift_measurement<S>(d01));
  const S sampled = top + fy * (bot - top);

  // Scale the euclidean camera-to-point distance into a depth along the ray.
  const Vec3<S> ray((lx - S(k.cx)) / S(k.fx), (ly - S(k.cy)) / S(k.fy), S(1.0));
  const S lambda = sqrt(ray.dot(ray));
  const Vec3<S> diff = camera_center - p_world;
  const S eta = sampled - sqrt(diff.dot(diff)) / lambda;

  if (real_part(eta) < -mu) return std::nullopt;
  return clamp(eta / S(mu), -1.0, 1.0);
}

// Fuse one frame into the volume: running average with unit sample weight,
// capped total weight. camera_to_world may carry seeded channels.
void surface_update(TsdfVolume& volume, const Image<Complex>& depth,
                    const PoseT<Complex>& camera_to_world, const Intrinsics& k);

// Trilinear field sample; valid only when every corner voxel was observed.
template <typename S>
std::optional<S> sample_tsdf(const TsdfVolume& vol, const Vec3<S>& p_world) {
  const VolumeParams& vp = vol.params();
  const S gx = (p_world.x() - S(vp.origin.x())) / S(vp.voxel_size);
  const S gy = (p_world.y() - S(vp.origin.y())) / S(vp.voxel_size);
  const S gz = (p_world.z() - S(vp.origin.z())) / S(vp.voxel_size);
  const int i0 = ifloor(gx), j0 = ifloor(gy), k0 = ifloor(gz);
  if (i0 < 0 || j0 < 0 || k0 < 0 || i0 + 1 >= vp.dims.x() ||
      j0 + 1 >= vp.dims.y() || k0 + 1 >= vp.dims.z())
    return std::nullopt;

  const S fx = gx - S(double(i0));
  const S fy = gy - S(double(j0));
  const S fz = gz - S(double(k0));

  S accum = S(0.0);
  for (int dk = 0; dk < 2; ++dk) {
    for (int dj = 0; dj < 2; ++dj) {
      for (int di = 0; di < 2; ++di) {
        const size_t idx = vol.index(i0 + di, j0 + dj, k0 + dk);
        if (!(vol.weight_at(idx) > 0.0)) return std::nullopt;
        const S wx = di ? fx : S(1.0) - fx;
        const S wy = dj ? fy : S(1.0) - fy;
        const S wz = dk ? fz : S(1.0) - fz;
        accum += wx * wy * wz * lift_measurement<S>(vol.tsdf_at(idx));
      }
    }
  }
  return accum;
}

// Field gradient by central differences of trilinear samples, one voxel
// apart per axis.
template <typename S>
std::optional<Vec3<S>> sample_gradient(const TsdfVolume& vol,
                                       const Vec3<S>& p_world) {
  const double h = vol.params().voxel_size;
  Vec3<S> g;
  for (int axis = 0; axis < 3; ++axis) {
    Vec3<S> lo = p_world, hi = p_world;
    lo[axis] -= S(h);
    hi[axis] += S(h);
    const auto flo = sample_tsdf(vol, lo);
    const auto fhi = sample_tsdf(vol, hi);
    if (!flo || !fhi) return std::nullopt;
    g[axis] = (*fhi - *flo) / S(2.0 * h);
  }
  return g;
}

struct RaycastConfig {
  double near_clip = 0.0;
  double far_clip = 10.0;
  // Step as a fraction of the truncation band; half keeps crossings inside
  // one band.
  double step_fraction = 0.5;
};

// Predicted surface seen from a camera pose: world-frame vertices where the
// field crosses positive-to-negative along each pixel ray, with normalized
// field gradients as normals.
template <typename S>
SurfaceMaps<S> raycast(const TsdfVolume& vol, const PoseT<S>& camera_to_world,
                       const Intrinsics& k, const RaycastConfig& cfg = {}) {
  SurfaceMaps<S> maps;
  maps.vertices = Image<Vec3<S>>(k.width, k.height, Vec3<S>::Zero());
  maps.normals = Image<Vec3<S>>(k.width, k.height, Vec3<S>::Zero());

  const VolumeParams& vp = vol.params();
  const double step = cfg.step_fraction * vp.mu;
  // Sampling region: every trilinear corner must exist.
  const Vec3d box_lo = vp.origin;
  const Vec3d box_hi =
      vp.origin + vp.voxel_size * (vp.dims.cast<double>() - Vec3d::Ones());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      Vec3<S> dir_cam(S((x - k.cx) / k.fx), S((y - k.cy) / k.fy), S(1.0));
      const S ray_norm = sqrt(dir_cam.dot(dir_cam));
      const Vec3<S> dir = camera_to_world.rotation * (dir_cam / ray_norm);
      const Vec3<S>& o = camera_to_world.translation;

      // Clip the march to the volume with real-part slab tests.
      double t0 = cfg.near_clip, t1 = cfg.far_clip;
      bool hit_box = true;
      for (int axis = 0; axis < 3; ++axis) {
        const double od = real_part(o[axis]);
        const double dd = real_part(dir[axis]);
        if (std::fabs(dd) < 1e-12) {
          if (od < box_lo[axis] || od > box_hi[axis]) hit_box = false;
          continue;
        }
        double ta = (box_lo[axis] - od) / dd;
        double tb = (box_hi[axis] - od) / dd;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
      }
      if (!hit_box || t0 >= t1) continue;

      bool have_prev = false;
      double alpha_prev = 0.0;
      S f_prev = S(0.0);
      for (double alpha = t0; alpha <= t1; alpha += step) {
        const Vec3<S> p = o + S(alpha) * dir;
        const auto f = sample_tsdf(vol, p);
        if (!f) {
          have_prev = false;
          continue;
        }
        if (have_prev && real_part(f_prev) > 0.0 && real_part(*f) < 0.0) {
          // Linear zero crossing between the two samples.
          const S span = S(alpha - alpha_prev);
          const S alpha_star =
              S(alpha_prev) - span * f_prev / (*f - f_prev);
          const Vec3<S> v = o + alpha_star * dir;
          const auto grad = sample_gradient(vol, v);
          if (grad) {
            const S len2 = grad->dot(*grad);
            if (real_part(len2) > 0.0) {
              maps.vertices.at(x, y) = v;
              maps.normals.at(x, y) = *grad / sqrt(len2);
            }
          }
          break;
        }
        have_prev = true;
        alpha_prev = alpha;
        f_prev = *f;
      }
    }
  }
  return maps;
}

// Checkpoint: text header, then little-endian f32 planes (field, weight and,
// when flagged, the derivative channel).
void save_volume(const std::string& path, const TsdfVolume& vol);
TsdfVolume load_volume(const std::string& path);

}  // namespace csf
