#pragma once

// On-disk formats: 16-bit depth PNGs, plain-text intrinsics, timestamped
// trajectories, and sequence directories (depth/ + associations.txt +
// groundtruth.txt + intrinsics.txt).

#include <string>
#include <utility>
#include <vector>

#include "csf/frames.hpp"
#include "csf/se3.hpp"

namespace csf {

// Depth in meters <-> 16-bit grayscale PNG at `scale` units per meter.
// Zero pixels mean "no measurement" in both directions.
void write_depth_png16(const std::string& path, const Image<double>& depth,
                       double scale);
Image<double> read_depth_png16(const std::string& path, double scale);

// Text file with seven whitespace-separated numbers:
//   fx fy cx cy width height depth_scale
// '#' starts a comment.
Intrinsics read_intrinsics(const std::string& path);
void write_intrinsics(const std::string& path, const Intrinsics& k);

struct TrajectoryEntry {
  double timestamp = 0.0;
  Pose pose;
};

// Timestamped poses, one per line: t tx ty tz qx qy qz qw.
std::vector<TrajectoryEntry> read_trajectory(const std::string& path);
void write_trajectory(const std::string& path,
                      const std::vector<TrajectoryEntry>& traj);

struct SequenceFrame {
  double timestamp = 0.0;
  std::string depth_path;  // absolute or relative to the sequence directory
};

struct Sequence {
  std::string directory;
  Intrinsics intrinsics;
  std::vector<SequenceFrame> frames;
  std::vector<TrajectoryEntry> groundtruth;  // may be empty

  // Depth image of frame i, resolved against `directory`.
  Image<double> load_depth(size_t i) const;
};

// Reads associations.txt (timestamp depth-path [...]), intrinsics.txt and,
// if present, groundtruth.txt.
Sequence open_sequence(const std::string& directory);

// Renders nothing itself; writes the given frames/poses as a sequence
// directory in the layout open_sequence understands.
void write_sequence(const std::string& directory, const Intrinsics& k,
                    const std::vector<Image<double>>& depths,
                    const std::vector<TrajectoryEntry>& groundtruth);

}  // namespace csf
