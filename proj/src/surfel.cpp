#include "csf/surfel.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <tuple>

namespace csf {

namespace {

struct CellEntry {
  std::uint32_t cell;
  double depth;
  int index;
};

// Supersample cell of a continuous pixel coordinate: pixel ix covers
// [ix - 0.5, ix + 0.5), so its 4x4 block covers cells [4 ix, 4 ix + 4).
int supersample_cell(double pixel) {
  return static_cast<int>(std::floor((pixel + 0.5) * 4.0));
}

}  // namespace

IndexMap render_index_map(const SurfelMap& map, const Pose& camera_to_world,
                          const Intrinsics& k) {
  IndexMap out;
  out.width = 4 * k.width;
  out.height = 4 * k.height;

  const Pose world_to_camera = camera_to_world.inverse();
  std::vector<CellEntry> hits;
  hits.reserve(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const Vec3d p = world_to_camera * real_part(map.surfels[i].position);
    if (!(p.z() > 0.0)) continue;
    const Vec2<double> px = project(k, p);
    const int cx = supersample_cell(px.x());
    const int cy = supersample_cell(px.y());
    if (cx < 0 || cy < 0 || cx >= out.width || cy >= out.height) continue;
    const std::uint32_t cell =
        static_cast<std::uint32_t>(cy) * static_cast<std::uint32_t>(out.width) +
        static_cast<std::uint32_t>(cx);
    hits.push_back({cell, p.z(), static_cast<int>(i)});
  }
  std::sort(hits.begin(), hits.end(), [](const CellEntry& a, const CellEntry& b) {
    return std::tie(a.cell, a.depth, a.index) <
           std::tie(b.cell, b.depth, b.index);
  });

  const std::size_t cells =
      static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height);
  out.offsets.assign(cells + 1, 0);
  for (const CellEntry& e : hits) ++out.offsets[e.cell + 1];
  for (std::size_t c = 0; c < cells; ++c) out.offsets[c + 1] += out.offsets[c];
  out.entries.resize(hits.size());
  for (std::size_t j = 0; j < hits.size(); ++j) out.entries[j] = hits[j].index;
  return out;
}

std::vector<AssociationWeight> associate_one_to_many(
    int x, int y, const SurfaceMaps<Complex>& frame, const IndexMap& index_map,
    const SurfelMap& map, const PoseT<Complex>& camera_to_world,
    const AssociationThresholds& thresholds) {
  std::vector<AssociationWeight> out;
  const Vec3<Complex>& vertex = frame.vertices.at(x, y);
  const Vec3<Complex>& normal = frame.normals.at(x, y);
  if (!vertex_valid(vertex) || !normal_valid(normal)) return out;

  const Vec3<Complex> vertex_world = camera_to_world * vertex;
  const Vec3<Complex> normal_world = camera_to_world.rotation * normal;
  const Vec3d vertex_world_re = real_part(vertex_world);
  const Vec3d normal_world_re = real_part(normal_world);

  const Vec3d vertex_re = real_part(vertex);
  const double ray_depth = vertex_re.norm();
  const Vec3d ray_dir = vertex_re / ray_depth;
  const Pose world_to_camera = real_pose(camera_to_world).inverse();
  const double cos_gate =
      std::cos(thresholds.normal_deg * M_PI / 180.0);
  const Complex kernel_scale(-1.0 / (2.0 * thresholds.sigma * thresholds.sigma));

  assert(4 * x + 3 < index_map.width && 4 * y + 3 < index_map.height);
  for (int cy = 4 * y; cy < 4 * y + 4; ++cy) {
    for (int cx = 4 * x; cx < 4 * x + 4; ++cx) {
      for (const int i : index_map.at(cx, cy)) {
        const Surfel& s = map.surfels[i];
        const Vec3d s_pos = real_part(s.position);

        const Vec3d s_cam = world_to_camera * s_pos;
        if (std::abs(s_cam.dot(ray_dir) - ray_depth) > thresholds.depth)
          continue;
        if (real_part(s.normal).dot(normal_world_re) < cos_gate) continue;
        if ((s_pos - vertex_world_re).norm() > thresholds.distance) continue;

        const Vec3<Complex> offset = s.position - vertex_world;
        const Complex w = exp(offset.dot(offset) * kernel_scale);
        out.push_back({i, w});
      }
    }
  }
  return out;
}

double sample_confidence(const Intrinsics& k, int x, int y) {
  const double dx = static_cast<double>(x) - k.cx;
  const double dy = static_cast<double>(y) - k.cy;
  const double half_diagonal =
      0.5 * std::sqrt(static_cast<double>(k.width) * k.width +
                      static_cast<double>(k.height) * k.height);
  const double gamma =
      std::clamp(std::sqrt(dx * dx + dy * dy) / half_diagonal, 0.0, 1.0);
  return std::exp(-gamma * gamma / 0.72);
}

SurfelUpdateStats update_surfels(SurfelMap& map, const Image<Complex>& depth,
                                 const PoseT<Complex>& camera_to_world,
                                 const Intrinsics& k, int frame_index,
                                 const SurfelFusionConfig& config) {
  const SurfaceMaps<Complex> frame = measure_surface(depth, k);
  const IndexMap index_map =
      render_index_map(map, real_pose(camera_to_world), k);

  std::vector<std::vector<AssociationWeight>> assoc(
      static_cast<std::size_t>(k.width) * static_cast<std::size_t>(k.height));
#pragma omp parallel for schedule(static)
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      auto& slot = assoc[static_cast<std::size_t>(y) * k.width + x];
      slot = associate_one_to_many(x, y, frame, index_map, map,
                                   camera_to_world, config.thresholds);
      if (!config.one_to_many && slot.size() > 1) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < slot.size(); ++j) {
          if (slot[j].weight.re > slot[best].weight.re) best = j;
        }
        slot = {slot[best]};
      }
    }
  }

  // Accumulate every pixel's contribution in scan order, then commit each
  // surfel once: equivalent to the per-pixel running average (the recurrence
  // telescopes) and deterministic regardless of association parallelism.
  struct Accumulator {
    Vec3<Complex> position_sum = Vec3<Complex>::Zero();
    Vec3<Complex> normal_sum = Vec3<Complex>::Zero();
    Complex weight_sum{0.0};
    double weight_re_sum = 0.0;
    double radius_sum = 0.0;
  };
  std::vector<Accumulator> acc(map.size());
  std::vector<int> touched;
  SurfelUpdateStats stats;
  const double radius_scale = std::sqrt(2.0) / k.fx;

  struct Creation {
    Vec3<Complex> position;
    Vec3<Complex> normal;
    double radius;
    double confidence;
  };
  std::vector<Creation> creations;

  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Vec3<Complex>& vertex = frame.vertices.at(x, y);
      const Vec3<Complex>& normal = frame.normals.at(x, y);
      if (!vertex_valid(vertex) || !normal_valid(normal)) continue;

      const Vec3<Complex> vertex_world = camera_to_world * vertex;
      const Vec3<Complex> normal_world = camera_to_world.rotation * normal;
      const double confidence = sample_confidence(k, x, y);
      const double radius = radius_scale * real_part(vertex.z());

      const auto& pairs = assoc[static_cast<std::size_t>(y) * k.width + x];
      if (pairs.empty()) {
        creations.push_back({vertex_world, normal_world, radius, confidence});
        continue;
      }
      ++stats.merged_pixels;
      for (const AssociationWeight& p : pairs) {
        Accumulator& a = acc[p.index];
        if (a.weight_re_sum == 0.0 && a.weight_sum.re == 0.0 &&
            a.weight_sum.im == 0.0)
          touched.push_back(p.index);
        const Complex m = p.weight * Complex(confidence);
        a.position_sum += vertex_world * m;
        a.normal_sum += normal_world * m;
        a.weight_sum += m;
        a.weight_re_sum += m.re;
        a.radius_sum += m.re * radius;
      }
    }
  }

  std::sort(touched.begin(), touched.end());
  for (const int i : touched) {
    Surfel& s = map.surfels[i];
    const Accumulator& a = acc[i];
    const Complex c_old = s.confidence;
    const Complex denom = c_old + a.weight_sum;
    s.position = (s.position * c_old + a.position_sum) / denom;

    const Vec3<Complex> blended = (s.normal * c_old + a.normal_sum) / denom;
    const Complex len2 = blended.dot(blended);
    if (real_part(len2) > 0.0) s.normal = blended / sqrt(len2);

    s.confidence = denom;
    s.timestamp = frame_index;

    // Radius only tightens: take the confidence-weighted average against the
    // new measurements, but never let a coarse far-range footprint grow a
    // surfel that was already seen close up.
    const double averaged = (c_old.re * s.radius + a.radius_sum) /
                            (c_old.re + a.weight_re_sum);
    s.radius = std::min(s.radius, averaged);
  }

  for (const Creation& c : creations) {
    Surfel s;
    s.position = c.position;
    s.normal = c.normal;
    s.radius = c.radius;
    s.confidence = Complex(c.confidence);
    s.timestamp = frame_index;
    map.surfels.push_back(s);
  }
  stats.created = static_cast<int>(creations.size());
  return stats;
}

SurfaceMaps<double> predict_maps(const SurfelMap& map,
                                 const Pose& camera_to_world,
                                 const Intrinsics& k) {
  SurfaceMaps<double> out;
  out.vertices = Image<Vec3d>(k.width, k.height, Vec3d::Zero());
  out.normals = Image<Vec3d>(k.width, k.height, Vec3d::Zero());
  Image<double> nearest(k.width, k.height, 0.0);

  const Pose world_to_camera = camera_to_world.inverse();
  for (std::size_t i = 0; i < map.size(); ++i) {
    const Vec3d position = real_part(map.surfels[i].position);
    const Vec3d cam = world_to_camera * position;
    if (!(cam.z() > 0.0)) continue;
    const Vec2<double> px = project(k, cam);
    const int x = static_cast<int>(std::lround(px.x()));
    const int y = static_cast<int>(std::lround(px.y()));
    if (x < 0 || y < 0 || x >= k.width || y >= k.height) continue;
    double& best = nearest.at(x, y);
    if (best > 0.0 && cam.z() >= best) continue;
    best = cam.z();
    out.vertices.at(x, y) = position;
    out.normals.at(x, y) = real_part(map.surfels[i].normal);
  }
  return out;
}

void write_surfel_ply(const std::filesystem::path& path, const SurfelMap& map) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "ply\n"
      << "format ascii 1.0\n"
      << "element vertex " << map.size() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "property float nx\n"
      << "property float ny\n"
      << "property float nz\n"
      << "property float radius\n"
      << "property float confidence\n"
      << "property int timestamp\n"
      << "end_header\n";
  out << std::setprecision(9);
  for (const Surfel& s : map.surfels) {
    const Vec3d v = real_part(s.position);
    const Vec3d n = real_part(s.normal);
    out << v.x() << ' ' << v.y() << ' ' << v.z() << ' ' << n.x() << ' '
        << n.y() << ' ' << n.z() << ' ' << s.radius << ' ' << s.confidence.re
        << ' ' << s.timestamp << '\n';
  }
  if (!out) {
    throw std::runtime_error("failed while writing " + path.string());
  }
}

}  // namespace csf
