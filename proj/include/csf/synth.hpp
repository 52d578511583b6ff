#pragma once

// Synthetic test scenes: analytic signed-distance primitives rendered to
// depth maps by sphere tracing, orbit trajectories, and deterministic
// sensor-noise simulation.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "csf/frames.hpp"
#include "csf/se3.hpp"

namespace csf {

struct SdfSphere {
  Vec3d center = Vec3d::Zero();
  double radius = 0.5;
};

struct SdfBox {
  Vec3d center = Vec3d::Zero();
  Vec3d half_extents = Vec3d::Constant(0.25);
};

// Half-space n . p <= offset is solid; n must be unit length.
struct SdfPlane {
  Vec3d normal = Vec3d::UnitZ();
  double offset = 0.0;
};

struct Scene {
  std::vector<SdfSphere> spheres;
  std::vector<SdfBox> boxes;
  std::vector<SdfPlane> planes;

  double signed_distance(const Vec3d& p) const;

  // Central-difference surface normal of the union SDF.
  Vec3d normal(const Vec3d& p, double eps = 1e-5) const;
};

// A compact asymmetric scene (floor, sphere, box) that constrains all six
// degrees of freedom when tracked against.
Scene default_scene();

// Depth map of the scene from a camera-to-world pose. Rays march the SDF
// until |phi| < hit_eps or the ray exceeds far (pixel stays invalid).
Image<double> render_depth(const Scene& scene, const Pose& camera_to_world,
                           const Intrinsics& k, double far = 20.0,
                           double hit_eps = 1e-6);

// Camera on a circle of given radius/height about `target`, optical axis on
// the target. `angle` is the position on the circle, world z is up.
Pose orbit_pose(const Vec3d& target, double radius, double height, double angle);

std::vector<Pose> orbit_trajectory(const Vec3d& target, double radius,
                                   double height, int frames,
                                   double arc = 2.0 * M_PI);

// Platform-pinned Gaussian source: Box-Muller over mt19937_64 draws, so a
// seed fully determines the stream everywhere.
class GaussianSource {
 public:
  explicit GaussianSource(uint64_t seed) : state_(seed) {}
  double next();

 private:
  std::mt19937_64 state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Additive depth noise on valid pixels; results clamped to stay valid.
Image<double> add_depth_noise(const Image<double>& depth, double sigma,
                              uint64_t seed);

// Simulate 16-bit integer storage: round to 1/scale steps, saturate at the
// 16-bit ceiling, drop negatives.
Image<double> quantize_depth(const Image<double>& depth, double scale = 5000.0);

}  // namespace csf
