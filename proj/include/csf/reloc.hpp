#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "csf/descent.hpp"
#include "csf/diff.hpp"
#include "csf/icp.hpp"
#include "csf/tsdf.hpp"

namespace csf {

// Fuse the given (depth, camera-to-world) frames into a fresh volume used as
// the relocalization reference model. Throws std::invalid_argument when no
// frames are supplied.
TsdfVolume build_reference(
    const std::vector<std::pair<Image<double>, Pose>>& frames,
    const Intrinsics& k, const VolumeParams& params);

// Indices of the `count` poses whose camera centers lie nearest the initial
// estimate, nearest first (ties by index). Fewer poses than `count` returns
// them all.
std::vector<std::size_t> select_reference_frames(
    const std::vector<Pose>& poses, const Pose& initial, int count = 10);

// One relocalization instance: the reference model flattened to its observed
// voxels, plus the query frame. The discrepancy objective compares the
// reference field against a projective measurement of the query depth at
// each observed voxel, so evaluating a pose never materializes a second
// volume.
struct RelocProblem {
  std::vector<Vec3d> voxel_centers;     // world centers, observed voxels only
  std::vector<double> reference_values; // field value at those voxels
  Image<Complex> query_depth;
  Intrinsics intrinsics;
  double mu = 0.1;

  // Throws std::invalid_argument if the reference has no observed voxels.
  RelocProblem(const TsdfVolume& reference, const Image<double>& query,
               const Intrinsics& k);
};

// Sum of squared field differences over the mutually observed voxels: the
// reference-observed voxels where the query measurement also lands. Voxels
// the query cannot see contribute nothing. Throws std::runtime_error when
// not a single voxel overlaps (the pose looks entirely away).
template <typename S>
S reloc_energy(const RelocProblem& problem, const PoseT<S>& query_pose) {
  const PoseT<S> world_to_camera = query_pose.inverse();
  const Vec3<S> camera_center = query_pose.translation;
  std::vector<S> terms(problem.voxel_centers.size(), S(0.0));
  long overlap = 0;
#pragma omp parallel for schedule(static) reduction(+ : overlap)
  for (std::ptrdiff_t i = 0;
       i < static_cast<std::ptrdiff_t>(problem.voxel_centers.size()); ++i) {
    const Vec3<S> p(problem.voxel_centers[i].cast<S>());
    const std::optional<S> measured =
        measured_tsdf(problem.query_depth, world_to_camera,
                      problem.intrinsics, problem.mu, p, camera_center);
    if (!measured) continue;
    const S diff = *measured - S(problem.reference_values[i]);
    terms[i] = diff * diff;
    ++overlap;
  }
  if (overlap == 0)
    throw std::runtime_error("relocalization energy: no overlapping voxels");
  return pairwise_sum(terms);
}

double reloc_loss(const RelocProblem& problem, const Pose& pose);

// Derivatives of the objective in the twist applied on top of `pose`,
// evaluated at zero: six single-channel passes for the gradient,
// twenty-one dual-channel passes for the symmetric Hessian.
Vec6d reloc_gradient(const RelocProblem& problem, const Pose& pose,
                     const StepSize& step = {});
Mat6d reloc_hessian(const RelocProblem& problem, const Pose& pose,
                    const StepSize& step = {});

enum class RelocMethod {
  kGradientDescent,
  kNewton,  // steepest descent far from the basin, Newton direction inside
};

struct RelocConfig {
  // The Newton direction engages once the loss drops below
  // switch_relative * (loss at the initial pose); a non-negative
  // switch_absolute overrides that with a fixed threshold.
  double switch_relative = 0.5;
  double switch_absolute = -1.0;
  int max_iterations = 50;
  double step_tolerance = 1e-6;
  LineSearchConfig line_search;
  StepSize step;
};

struct RelocResult {
  Pose pose;
  int iterations = 0;
  bool converged = false;
  double final_loss = 0.0;
  RelocMethod method = RelocMethod::kNewton;
};

// Iteratively refine the query pose against the reference model. Both
// methods use the same backtracking line search; while the loss stays above
// the switch threshold the Newton method takes bit-identical steepest-
// descent steps, then changes to the Newton direction (falling back to
// steepest descent whenever the Hessian is not usefully positive). The
// optional trace logs the raw objective per iteration, like frame tracking.
RelocResult relocalize(const RelocProblem& problem, const Pose& initial,
                       RelocMethod method, const RelocConfig& config = {},
                       TrackTrace* trace = nullptr);

// World-frame point cloud of a depth image, one point per valid pixel at
// the given stride.
std::vector<Vec3d> depth_cloud(const Image<double>& depth,
                               const Intrinsics& k,
                               const Pose& camera_to_world, int stride = 1);

struct NnError {
  double mean = 0.0;    // mean nearest-neighbor distance, meters
  bool outlier = false; // true when the mean exceeds 0.1 m
};

// Mean nearest-neighbor distance from the transformed query cloud to the
// reference cloud (brute force). Throws std::invalid_argument on an empty
// cloud.
NnError eval_nn_error(const Pose& transform, const std::vector<Vec3d>& query,
                      const std::vector<Vec3d>& reference);

}  // namespace csf
