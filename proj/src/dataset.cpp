#include "csf/dataset.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace csf {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& what, const std::string& path) {
  throw std::runtime_error(what + ": " + path);
}

}  // namespace

void write_depth_png16(const std::string& path, const Image<double>& depth,
                       double scale) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail("cannot open for writing", path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail("libpng init failed", path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail("libpng write failed", path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, depth.width, depth.height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<uint8_t> row(static_cast<size_t>(depth.width) * 2);
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const double d = depth.at(x, y);
      uint16_t v = 0;
      if (d > 0.0) {
        const double q = std::round(d * scale);
        if (q >= 1.0 && q <= 65535.0) v = static_cast<uint16_t>(q);
      }
      row[2 * x] = static_cast<uint8_t>(v >> 8);  // PNG is big-endian
      row[2 * x + 1] = static_cast<uint8_t>(v & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image<double> read_depth_png16(const std::string& path, double scale) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail("cannot open for reading", path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("libpng init failed", path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("libpng read failed", path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);
  const int width = png_get_image_width(png, info);
  const int height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("expected 16-bit grayscale PNG", path);
  }

  Image<double> depth(width, height, 0.0);
  std::vector<uint8_t> row(static_cast<size_t>(width) * 2);
  for (int y = 0; y < height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < width; ++x) {
      const uint16_t v =
          static_cast<uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
      if (v > 0) depth.at(x, y) = static_cast<double>(v) / scale;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return depth;
}

Intrinsics read_intrinsics(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open intrinsics", path);
  std::vector<double> nums;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double v;
    while (ls >> v) nums.push_back(v);
  }
  if (nums.size() != 7) fail("intrinsics file must contain exactly 7 numbers", path);
  Intrinsics k;
  k.fx = nums[0];
  k.fy = nums[1];
  k.cx = nums[2];
  k.cy = nums[3];
  k.width = static_cast<int>(nums[4]);
  k.height = static_cast<int>(nums[5]);
  k.depth_scale = nums[6];
  if (k.fx <= 0 || k.fy <= 0 || k.width <= 0 || k.height <= 0 || k.depth_scale <= 0)
    fail("intrinsics values out of range", path);
  return k;
}

void write_intrinsics(const std::string& path, const Intrinsics& k) {
  std::ofstream out(path);
  if (!out) fail("cannot write intrinsics", path);
  out << "# fx fy cx cy width height depth_scale\n";
  out.precision(17);
  out << k.fx << " " << k.fy << " " << k.cx << " " << k.cy << " " << k.width
      << " " << k.height << " " << k.depth_scale << "\n";
}

std::vector<TrajectoryEntry> read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open trajectory", path);
  std::vector<TrajectoryEntry> traj;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double t, tx, ty, tz, qx, qy, qz, qw;
    if (!(ls >> t >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) continue;
    TrajectoryEntry e;
    e.timestamp = t;
    e.pose.translation = Vec3d(tx, ty, tz);
    e.pose.rotation =
        Eigen::Quaterniond(qw, qx, qy, qz).normalized().toRotationMatrix();
    traj.push_back(e);
  }
  return traj;
}

void write_trajectory(const std::string& path,
                      const std::vector<TrajectoryEntry>& traj) {
  std::ofstream out(path);
  if (!out) fail("cannot write trajectory", path);
  out << "# timestamp tx ty tz qx qy qz qw\n";
  out.precision(17);
  for (const auto& e : traj) {
    const Eigen::Quaterniond q(e.pose.rotation);
    out << e.timestamp << " " << e.pose.translation.x() << " "
        << e.pose.translation.y() << " " << e.pose.translation.z() << " "
        << q.x() << " " << q.y() << " " << q.z() << " " << q.w() << "\n";
  }
}

Image<double> Sequence::load_depth(size_t i) const {
  const std::filesystem::path p(frames.at(i).depth_path);
  const std::filesystem::path full =
      p.is_absolute() ? p : std::filesystem::path(directory) / p;
  return read_depth_png16(full.string(), intrinsics.depth_scale);
}

Sequence open_sequence(const std::string& directory) {
  namespace fs = std::filesystem;
  Sequence seq;
  seq.directory = directory;
  seq.intrinsics = read_intrinsics((fs::path(directory) / "intrinsics.txt").string());

  const fs::path assoc = fs::path(directory) / "associations.txt";
  std::ifstream in(assoc);
  if (!in) fail("cannot open associations", assoc.string());
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    SequenceFrame f;
    if (!(ls >> f.timestamp >> f.depth_path)) continue;
    seq.frames.push_back(std::move(f));
  }
  if (seq.frames.empty()) fail("sequence has no frames", directory);

  const fs::path gt = fs::path(directory) / "groundtruth.txt";
  if (fs::exists(gt)) seq.groundtruth = read_trajectory(gt.string());
  return seq;
}

void write_sequence(const std::string& directory, const Intrinsics& k,
                    const std::vector<Image<double>>& depths,
                    const std::vector<TrajectoryEntry>& groundtruth) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(directory) / "depth");
  write_intrinsics((fs::path(directory) / "intrinsics.txt").string(), k);

  std::ofstream assoc(fs::path(directory) / "associations.txt");
  if (!assoc) fail("cannot write associations", directory);
  assoc << "# timestamp depth_file\n";
  assoc.precision(17);
  for (size_t i = 0; i < depths.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "depth/%06zu.png", i);
    write_depth_png16((fs::path(directory) / name).string(), depths[i],
                      k.depth_scale);
    const double t =
        i < groundtruth.size() ? groundtruth[i].timestamp : static_cast<double>(i);
    assoc << t << " " << name << "\n";
  }
  if (!groundtruth.empty())
    write_trajectory((fs::path(directory) / "groundtruth.txt").string(),
                     groundtruth);
}

}  // namespace csf
