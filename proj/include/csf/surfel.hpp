#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "csf/csfd.hpp"
#include "csf/frames.hpp"
#include "csf/se3.hpp"

namespace csf {

// One oriented disk of the point-based map. Position, normal, and the
// confidence counter carry a derivative channel so a seeded camera pose or
// depth map flows through fusion into the stored model.
struct Surfel {
  Vec3<Complex> position = Vec3<Complex>::Zero();  // world frame, meters
  Vec3<Complex> normal = Vec3<Complex>::Zero();    // world frame, unit length
  double radius = 0.0;                             // meters
  Complex confidence{0.0};                         // accumulated weight, >= 0
  int timestamp = 0;                               // last-update frame index
};

// Unstructured growable set of surfels. Indices are stable: surfels are only
// appended, never removed or reordered.
struct SurfelMap {
  std::vector<Surfel> surfels;

  std::size_t size() const { return surfels.size(); }
  bool empty() const { return surfels.empty(); }
};

// Projection grid at 4x4 the image resolution: each cell lists the surfels
// whose centers project into it, nearest camera depth first. A pixel's
// association candidates are the 16 cells of its 4x4 block.
struct IndexMap {
  int width = 0;   // 4 * image width
  int height = 0;  // 4 * image height
  std::vector<std::uint32_t> offsets;  // size width*height + 1
  std::vector<int> entries;            // surfel indices, nearest-first

  std::span<const int> at(int x, int y) const {
    const std::size_t cell =
        static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + x;
    return {entries.data() + offsets[cell],
            entries.data() + offsets[cell + 1]};
  }
};

IndexMap render_index_map(const SurfelMap& map, const Pose& camera_to_world,
                          const Intrinsics& k);

// Gates and kernel bandwidth for pixel-to-surfel association. A candidate
// surfel survives when its depth along the pixel's viewing ray is within
// +/- depth of the measurement, its normal deviates by at most normal_deg,
// and its center lies within distance of the measured vertex.
struct AssociationThresholds {
  double depth = 0.05;      // meters along the viewing ray
  double normal_deg = 30.0; // degrees
  double distance = 0.05;   // meters, Euclidean
  double sigma = 0.025;     // Gaussian kernel bandwidth (distance / 2)
};

// One accepted pixel-to-surfel pair. The weight exp(-d^2 / (2 sigma^2))
// is evaluated on the derivative-carrying distance, so it transports pose
// and depth sensitivity into the update.
struct AssociationWeight {
  int index = 0;
  Complex weight{0.0};
};

// All surfels of the pixel's 4x4 candidate block that pass the three gates,
// in nearest-first candidate order. Empty result: the pixel measures an
// unmapped patch of surface and should create a new surfel.
std::vector<AssociationWeight> associate_one_to_many(
    int x, int y, const SurfaceMaps<Complex>& frame, const IndexMap& index_map,
    const SurfelMap& map, const PoseT<Complex>& camera_to_world,
    const AssociationThresholds& thresholds = {});

// Sample confidence of a pixel: exp(-gamma^2 / 0.72) where gamma is the
// pixel's radial distance from the principal point over the image
// half-diagonal, clamped to [0, 1]. Center pixels are trusted most.
double sample_confidence(const Intrinsics& k, int x, int y);

struct SurfelFusionConfig {
  AssociationThresholds thresholds;
  // When false, each pixel updates only its highest-weight candidate (the
  // classic one-to-one association); derivative coverage of the map drops
  // accordingly. Kept for comparison.
  bool one_to_many = true;
};

struct SurfelUpdateStats {
  int merged_pixels = 0;   // pixels that updated at least one surfel
  int created = 0;         // surfels appended this frame
};

// Fuse one depth frame into the map: measure vertices and normals, associate
// every valid pixel against the rendered index map, then apply confidence-
// weighted running averages to associated surfels and append new surfels at
// unmatched pixels. Contributions accumulate in pixel scan order and commit
// once per surfel, so the result is deterministic and independent of any
// association-stage parallelism.
SurfelUpdateStats update_surfels(SurfelMap& map, const Image<Complex>& depth,
                                 const PoseT<Complex>& camera_to_world,
                                 const Intrinsics& k, int frame_index,
                                 const SurfelFusionConfig& config = {});

// Point-splat model prediction for tracking: project every surfel into the
// camera, keep the nearest per pixel, and output world-frame vertex and
// normal maps shaped like the raycast prediction.
SurfaceMaps<double> predict_maps(const SurfelMap& map,
                                 const Pose& camera_to_world,
                                 const Intrinsics& k);

// ASCII PLY export with per-vertex position, normal, radius, confidence,
// and last-update timestamp.
void write_surfel_ply(const std::filesystem::path& path, const SurfelMap& map);

}  // namespace csf
