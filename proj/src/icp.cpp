#include "csf/icp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace csf {

namespace {

// Gauss-Newton pieces of the point-to-plane energy at xi = 0:
// A = sum J^T J and b = sum J^T r with J = [n^T, (p x n)^T]. The exact
// gradient of the energy is 2 b.
void normal_equations(const std::vector<Correspondence>& corrs,
                      const Pose& base, Mat6d& a, Vec6d& b) {
  a.setZero();
  b.setZero();
  for (const Correspondence& c : corrs) {
    const Vec3d p = base * c.vertex;
    const double r = (p - c.model_vertex).dot(c.model_normal);
    Vec6d j;
    j.head<3>() = c.model_normal;
    j.tail<3>() = p.cross(c.model_normal);
    a += j * j.transpose();
    b += j * r;
  }
}

struct StepOutcome {
  Vec6d delta = Vec6d::Zero();
  double loss_after = 0.0;
  Vec6d gradient = Vec6d::Zero();
};

StepOutcome linearized_outcome(const std::vector<Correspondence>& corrs,
                               const Pose& base) {
  StepOutcome s;
  Mat6d a;
  Vec6d b;
  normal_equations(corrs, base, a, b);
  s.gradient = 2.0 * b;
  const Vec6d delta = Eigen::LDLT<Mat6d>(a).solve(-b);
  if (delta.allFinite()) s.delta = delta;
  s.loss_after = icp_energy(corrs, s.delta, base);
  return s;
}

StepOutcome newton_outcome(const std::vector<Correspondence>& corrs,
                           const Pose& base, double& lambda,
                           const IcpConfig& cfg) {
  StepOutcome s;
  const double loss0 = icp_loss(corrs, base);
  s.gradient = icp_gradient(corrs, base, cfg.step);
  const Mat6d hess = icp_hessian(corrs, base, cfg.step);
  s.loss_after = loss0;
  s.delta = levenberg_newton_step(
      s.gradient, hess, loss0,
      [&](const Vec6d& d) { return icp_energy(corrs, d, base); }, lambda,
      cfg.line_search, &s.loss_after);
  return s;
}

StepOutcome first_order_outcome(const std::vector<Correspondence>& corrs,
                                const Pose& base, GradientStepper& stepper,
                                const IcpConfig& cfg) {
  StepOutcome s;
  const double loss0 = icp_loss(corrs, base);
  s.gradient = icp_gradient(corrs, base, cfg.step);
  s.loss_after = loss0;
  const Vec6d direction = stepper.propose(s.gradient);
  const double slope = s.gradient.dot(direction);
  if (slope < 0.0) {
    const LineSearchResult r = backtracking_search(
        [&](double alpha) {
          return icp_energy(corrs, Vec6d(alpha * direction), base);
        },
        loss0, slope, cfg.line_search);
    if (r.ok) {
      s.delta = r.alpha * direction;
      s.loss_after = r.loss;
    }
  }
  return s;
}

}  // namespace

std::vector<Correspondence> associate(const SurfaceMaps<double>& measured,
                                      const SurfaceMaps<double>& predicted,
                                      const Pose& camera_to_world,
                                      const Pose& predicted_camera_to_world,
                                      const Intrinsics& k,
                                      const IcpConfig& cfg, int pixel_stride) {
  std::vector<Correspondence> corrs;
  const Pose world_to_predicted = predicted_camera_to_world.inverse();
  const double cos_max = std::cos(cfg.theta_max_deg * M_PI / 180.0);
  const int stride = std::max(1, pixel_stride);
  for (int y = 0; y < measured.vertices.height; y += stride) {
    for (int x = 0; x < measured.vertices.width; x += stride) {
      const Vec3d& vertex = measured.vertices.at(x, y);
      const Vec3d& normal = measured.normals.at(x, y);
      if (!vertex_valid(vertex) || !normal_valid(normal)) continue;

      const Vec3d world = camera_to_world * vertex;
      const Vec3d in_predicted = world_to_predicted * world;
      if (in_predicted.z() <= 0.0) continue;
      const Vec2d uv = project(k, in_predicted);
      const int u = static_cast<int>(std::lround(uv.x()));
      const int v = static_cast<int>(std::lround(uv.y()));
      if (!predicted.vertices.in_bounds(u, v)) continue;

      // The prediction is world-frame, so pixel validity lives in its
      // normal (unit when set, zero when the cast missed).
      const Vec3d& model_normal = predicted.normals.at(u, v);
      if (!normal_valid(model_normal)) continue;
      const Vec3d& model_vertex = predicted.vertices.at(u, v);

      if ((world - model_vertex).norm() > cfg.d_max) continue;
      const Vec3d world_normal = camera_to_world.rotation * normal;
      if (world_normal.dot(model_normal) < cos_max) continue;
      corrs.push_back({vertex, model_vertex, model_normal});
    }
  }
  return corrs;
}

double icp_loss(const std::vector<Correspondence>& corrs, const Pose& base) {
  return icp_energy(corrs, Vec6d(Vec6d::Zero()), base);
}

Vec6d icp_gradient(const std::vector<Correspondence>& corrs, const Pose& base,
                   const StepSize& step) {
  return csfd_gradient(
      [&](const auto& xi) { return icp_energy(corrs, xi, base); },
      Vec6d::Zero(), step);
}

Mat6d icp_hessian(const std::vector<Correspondence>& corrs, const Pose& base,
                  const StepSize& step) {
  return csfd_hessian(
      [&](const auto& xi) { return icp_energy(corrs, xi, base); },
      Vec6d::Zero(), step);
}

Vec6d linearized_step(const std::vector<Correspondence>& corrs,
                      const Pose& base) {
  Mat6d a;
  Vec6d b;
  normal_equations(corrs, base, a, b);
  const Vec6d delta = Eigen::LDLT<Mat6d>(a).solve(-b);
  return delta.allFinite() ? delta : Vec6d(Vec6d::Zero());
}

void write_trace_csv(const std::filesystem::path& path,
                     const TrackTrace& trace) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "iteration,loss,gradient norm,translation error,rotation error\n";
  out.precision(17);
  for (const TraceRow& r : trace.rows) {
    out << r.iteration << ',' << r.loss << ',' << r.gradient_norm << ','
        << r.translation_error << ',' << r.rotation_error << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

TrackResult track_frame(const TsdfVolume& volume, const Image<double>& depth,
                        const Pose& init_camera_to_world, const Intrinsics& k,
                        const IcpConfig& cfg, TrackTrace* trace) {
  TrackResult out;
  out.pose = init_camera_to_world;
  const int levels = std::clamp(cfg.levels, 1, 3);
  const std::vector<Image<double>> pyramid =
      build_depth_pyramid(bilateral_filter(depth), levels);

  Pose pose = init_camera_to_world;
  double lambda = cfg.levenberg_lambda0;
  GradientStepper stepper(cfg.solver == IcpSolver::kConjugateGradient
                              ? GradientStepper::Kind::kConjugateGradient
                              : GradientStepper::Kind::kGradientDescent,
                          cfg.ncg_restart);
  int iteration = 0;
  for (int li = 0; li < levels; ++li) {
    const int level = levels - 1 - li;
    const Intrinsics kl = k.at_level(level);
    const SurfaceMaps<double> measured = measure_surface(pyramid[level], kl);
    // One model prediction per level, cast at the estimate entering it;
    // iterations only re-associate against these fixed maps.
    const Pose prediction_pose = pose;
    const SurfaceMaps<double> predicted = raycast(volume, prediction_pose, kl);
    stepper.reset();
    for (int it = 0; it < cfg.level_iterations[li]; ++it) {
      const std::vector<Correspondence> corrs =
          associate(measured, predicted, pose, prediction_pose, kl, cfg,
                    cfg.level_pixel_stride[li]);
      out.correspondences = static_cast<int>(corrs.size());
      if (corrs.size() < 12) break;

      StepOutcome s;
      switch (cfg.solver) {
        case IcpSolver::kLinearized:
          s = linearized_outcome(corrs, pose);
          break;
        case IcpSolver::kNewton:
          s = newton_outcome(corrs, pose, lambda, cfg);
          break;
        default:
          s = first_order_outcome(corrs, pose, stepper, cfg);
          break;
      }
      pose = apply_increment(s.delta, pose);
      ++iteration;
      const double mean_loss = s.loss_after / static_cast<double>(corrs.size());
      out.final_loss = mean_loss;

      if (trace) {
        TraceRow row;
        row.iteration = iteration;
        row.loss = mean_loss;
        row.gradient_norm = s.gradient.norm();
        row.translation_error = std::nan("");
        row.rotation_error = std::nan("");
        if (trace->ground_truth) {
          const Pose& gt = *trace->ground_truth;
          row.translation_error = (pose.translation - gt.translation).norm();
          const Pose relative{gt.rotation.transpose() * pose.rotation,
                              Vec3d::Zero()};
          row.rotation_error = log_angle(relative) * 180.0 / M_PI;
        }
        trace->rows.push_back(row);
      }

      if (s.delta.norm() < cfg.step_tolerance) {
        if (level == 0) out.converged = true;
        break;
      }
    }
  }
  out.pose = pose;
  out.iterations = iteration;
  return out;
}

}  // namespace csf
