#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "csf/csfd.hpp"
#include "csf/tsdf.hpp"

namespace csf {

// Triangle soup produced by surface extraction: every three consecutive
// vertices form one face, with no index sharing between faces.
struct Mesh {
  std::vector<Vec3d> vertices;

  std::size_t triangle_count() const { return vertices.size() / 3; }
};

// Polygonize the zero level set of the fused field with marching cubes.
// Cells touching an unobserved voxel (zero weight) are skipped, so the result
// covers only the observed part of the surface. Faces are wound so their
// normals point into free space (towards increasing field values).
Mesh extract_mesh(const TsdfVolume& volume);

// Binary STL: 80-byte header, triangle count, then 50-byte facet records.
void write_stl_binary(const std::filesystem::path& path, const Mesh& mesh);

// ASCII PLY with one vertex element per soup entry and consecutive-index
// faces.
void write_ply_ascii(const std::filesystem::path& path, const Mesh& mesh);

}  // namespace csf
