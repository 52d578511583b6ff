#pragma once

// Depth-to-model camera tracking against the fused distance field.
// Each iteration projectively associates the measured surface with the
// raycast model prediction, freezes that correspondence set, and takes one
// descent step on the point-to-plane alignment energy. The energy is
// differentiated by complex-step seeding of the pose increment, so the
// same code path yields values, gradients, and Hessians; a classic
// small-angle linearization is kept alongside as the reference solver.

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "csf/csfd.hpp"
#include "csf/descent.hpp"
#include "csf/diff.hpp"
#include "csf/frames.hpp"
#include "csf/se3.hpp"
#include "csf/tsdf.hpp"

namespace csf {

// One fixed association: a measured camera-frame vertex paired with the
// model surface point and unit normal (world frame) it projects onto.
struct Correspondence {
  Vec3d vertex;
  Vec3d model_vertex;
  Vec3d model_normal;
};

enum class IcpSolver {
  kLinearized,         // small-angle normal equations, no derivative channels
  kNewton,             // damped Newton on the step-derivative gradient/Hessian
  kGradientDescent,    // steepest descent with backtracking line search
  kConjugateGradient,  // Polak-Ribiere with periodic restarts
};

struct IcpConfig {
  IcpSolver solver = IcpSolver::kNewton;
  double d_max = 0.1;           // association gate: vertex distance [m]
  double theta_max_deg = 30.0;  // association gate: normal angle [deg]
  int levels = 3;
  // Per-level schedules, indexed in processing order (coarsest first).
  std::array<int, 3> level_iterations = {10, 5, 4};
  std::array<int, 3> level_pixel_stride = {1, 1, 2};
  double step_tolerance = 1e-6;  // |increment| below which a level stops
  double levenberg_lambda0 = 1e-6;
  int ncg_restart = 6;
  LineSearchConfig line_search;
  StepSize step;
};

// Projects every stride-th measured pixel (camera frame, at the current
// pose estimate) into the camera that produced the model prediction and
// pairs it with the surface stored at the landing pixel, subject to the
// distance and normal-angle gates.
std::vector<Correspondence> associate(const SurfaceMaps<double>& measured,
                                      const SurfaceMaps<double>& predicted,
                                      const Pose& camera_to_world,
                                      const Pose& predicted_camera_to_world,
                                      const Intrinsics& k,
                                      const IcpConfig& cfg,
                                      int pixel_stride = 1);

// Point-to-plane energy of the left-multiplied increment xi about `base`,
// over a frozen correspondence set. Terms are materialized and reduced
// pairwise in index order, so the value is independent of thread count.
template <typename S>
S icp_energy(const std::vector<Correspondence>& corrs, const Vec6<S>& xi,
             const Pose& base) {
  const PoseT<S> pose = exp_map(xi) * pose_cast<S>(base);
  std::vector<S> terms(corrs.size(), S(0.0));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(corrs.size());
       ++i) {
    const Correspondence& c = corrs[i];
    const Vec3<S> moved = pose * Vec3<S>(c.vertex.cast<S>());
    const Vec3<S> offset = moved - Vec3<S>(c.model_vertex.cast<S>());
    const S r = offset.dot(Vec3<S>(c.model_normal.cast<S>()));
    terms[i] = r * r;
  }
  return pairwise_sum(terms);
}

double icp_loss(const std::vector<Correspondence>& corrs, const Pose& base);
Vec6d icp_gradient(const std::vector<Correspondence>& corrs, const Pose& base,
                   const StepSize& step = {});
Mat6d icp_hessian(const std::vector<Correspondence>& corrs, const Pose& base,
                  const StepSize& step = {});

// One solve of the small-angle normal equations J^T J d = -J^T r with
// J = [n^T, (p x n)^T] per term: exact gradient, linearized curvature.
// Returns a zero increment when the system is degenerate.
Vec6d linearized_step(const std::vector<Correspondence>& corrs,
                      const Pose& base);

// One optimizer iteration as logged: mean per-correspondence loss after the
// step (comparable across pyramid levels, whose correspondence counts
// differ), gradient norm at the linearization point, and pose errors against
// ground truth (nan when none was given).
struct TraceRow {
  int iteration = 0;
  double loss = 0.0;
  double gradient_norm = 0.0;
  double translation_error = 0.0;
  double rotation_error = 0.0;  // degrees
};

struct TrackTrace {
  std::optional<Pose> ground_truth;
  std::vector<TraceRow> rows;
};

void write_trace_csv(const std::filesystem::path& path,
                     const TrackTrace& trace);

struct TrackResult {
  Pose pose;                 // refined camera-to-world
  int iterations = 0;        // total across levels
  bool converged = false;    // step tolerance reached at the finest level
  double final_loss = 0.0;   // mean per-correspondence loss after the last step
  int correspondences = 0;   // size of the last association
};

// Coarse-to-fine refinement of a camera pose against the volume: per level
// the model surface is raycast once at the entry estimate, then each
// iteration re-associates and takes one step with the configured solver.
TrackResult track_frame(const TsdfVolume& volume, const Image<double>& depth,
                        const Pose& init_camera_to_world, const Intrinsics& k,
                        const IcpConfig& cfg = {},
                        TrackTrace* trace = nullptr);

}  // namespace csf
