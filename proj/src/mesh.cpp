#include "csf/mesh.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>

#include "csf/mc_tables.hpp"

namespace csf {

namespace {

// Cube corner layout relative to the cell's base voxel: corners 0..3 ring the
// bottom face counter-clockwise, 4..7 the top face.
constexpr int kShift[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
};

// Endpoints of the 12 cube edges as corner ids.
constexpr int kEdgeToVert[12][2] = {
    {0, 1}, {1, 2}, {3, 2}, {0, 3}, {4, 5}, {5, 6},
    {7, 6}, {4, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
};

// Base corner of each edge plus (fourth entry) the axis the edge runs along.
constexpr int kEdgeShift[12][4] = {
    {0, 0, 0, 0}, {1, 0, 0, 1}, {0, 1, 0, 0}, {0, 0, 0, 1},
    {0, 0, 1, 0}, {1, 0, 1, 1}, {0, 1, 1, 0}, {0, 0, 1, 1},
    {0, 0, 0, 2}, {1, 0, 0, 2}, {1, 1, 0, 2}, {0, 1, 0, 2},
};

}  // namespace

Mesh extract_mesh(const TsdfVolume& volume) {
  const VolumeParams& p = volume.params();
  const double vs = p.voxel_size;
  Mesh mesh;
  std::array<double, 8> f{};
  std::array<Vec3d, 12> edge_point{};
  for (int x = 0; x + 1 < p.dims.x(); ++x) {
    for (int y = 0; y + 1 < p.dims.y(); ++y) {
      for (int z = 0; z + 1 < p.dims.z(); ++z) {
        int cube_index = 0;
        bool observed = true;
        for (int corner = 0; corner < 8; ++corner) {
          const size_t idx = volume.index(x + kShift[corner][0],
                                          y + kShift[corner][1],
                                          z + kShift[corner][2]);
          if (volume.weight_at(idx) <= 0.0) {
            observed = false;
            break;
          }
          f[corner] = volume.tsdf_at(idx).re;
          if (f[corner] < 0.0) cube_index |= 1 << corner;
        }
        if (!observed) continue;
        const int edges = mc::kEdgeTable[cube_index];
        if (edges == 0) continue;

        for (int edge = 0; edge < 12; ++edge) {
          if ((edges & (1 << edge)) == 0) continue;
          // Linear zero crossing between the edge's endpoint samples.
          const double f0 = std::abs(f[kEdgeToVert[edge][0]]);
          const double f1 = std::abs(f[kEdgeToVert[edge][1]]);
          Vec3d pt = p.origin + vs * Vec3d(x + kEdgeShift[edge][0],
                                           y + kEdgeShift[edge][1],
                                           z + kEdgeShift[edge][2]);
          pt(kEdgeShift[edge][3]) += f0 * vs / (f0 + f1);
          edge_point[edge] = pt;
        }

        const int* tri = mc::kTriTable[cube_index];
        for (int i = 0; tri[i] != -1; i += 3) {
          // The listed order winds towards the negative (solid) side; swap
          // the trailing pair so normals point into free space instead.
          mesh.vertices.push_back(edge_point[tri[i]]);
          mesh.vertices.push_back(edge_point[tri[i + 2]]);
          mesh.vertices.push_back(edge_point[tri[i + 1]]);
        }
      }
    }
  }
  return mesh;
}

void write_stl_binary(const std::filesystem::path& path, const Mesh& mesh) {
  static_assert(std::endian::native == std::endian::little,
                "facet records are written as raw little-endian floats");
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  std::array<char, 80> header{};
  const std::string tag = "csfusion surface export";
  std::memcpy(header.data(), tag.data(), tag.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  const auto count = static_cast<std::uint32_t>(mesh.triangle_count());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));

  const auto put = [&out](const Eigen::Vector3f& v) {
    out.write(reinterpret_cast<const char*>(v.data()), 3 * sizeof(float));
  };
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3d& a = mesh.vertices[3 * t];
    const Vec3d& b = mesh.vertices[3 * t + 1];
    const Vec3d& c = mesh.vertices[3 * t + 2];
    Vec3d n = (b - a).cross(c - a);
    const double len = n.norm();
    if (len > 0.0) n /= len;
    put(n.cast<float>());
    put(a.cast<float>());
    put(b.cast<float>());
    put(c.cast<float>());
    const std::uint16_t attribute = 0;
    out.write(reinterpret_cast<const char*>(&attribute), sizeof(attribute));
  }
  if (!out) {
    throw std::runtime_error("failed while writing " + path.string());
  }
}

void write_ply_ascii(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "ply\n"
      << "format ascii 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "element face " << mesh.triangle_count() << "\n"
      << "property list uchar int vertex_indices\n"
      << "end_header\n";
  out << std::setprecision(9);
  for (const Vec3d& v : mesh.vertices) {
    out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    out << "3 " << 3 * t << ' ' << 3 * t + 1 << ' ' << 3 * t + 2 << '\n';
  }
  if (!out) {
    throw std::runtime_error("failed while writing " + path.string());
  }
}

}  // namespace csf
