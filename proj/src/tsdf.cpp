#include "csf/tsdf.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace csf {

void surface_update(TsdfVolume& volume, const Image<Complex>& depth,
                    const PoseT<Complex>& camera_to_world, const Intrinsics& k) {
  const PoseT<Complex> world_to_camera = camera_to_world.inverse();
  const Vec3<Complex>& center = camera_to_world.translation;
  const VolumeParams& vp = volume.params();
  const double cap = vp.weight_cap;

  const int nx = vp.dims.x(), ny = vp.dims.y(), nz = vp.dims.z();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int kk = 0; kk < nz; ++kk) {
    for (int jj = 0; jj < ny; ++jj) {
      for (int ii = 0; ii < nx; ++ii) {
        const Vec3d p = volume.voxel_position(ii, jj, kk);
        Vec3<Complex> pw;
        pw << Complex(p.x()), Complex(p.y()), Complex(p.z());
        const auto sample =
            measured_tsdf<Complex>(depth, world_to_camera, k, vp.mu, pw, center);
        if (!sample) continue;

        const size_t idx = volume.index(ii, jj, kk);
        const double w = volume.weight_at(idx);
        Complex& f = volume.tsdf_at(idx);
        f = (Complex(w) * f + *sample) / Complex(w + 1.0);
        volume.weight_at(idx) = std::min(w + 1.0, cap);
      }
    }
  }
}

namespace {

void write_f32_plane(std::ofstream& out, const std::vector<float>& plane) {
  out.write(reinterpret_cast<const char*>(plane.data()),
            static_cast<std::streamsize>(plane.size() * sizeof(float)));
}

std::vector<float> read_f32_plane(std::ifstream& in, size_t n,
                                  const std::string& path) {
  std::vector<float> plane(n);
  in.read(reinterpret_cast<char*>(plane.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (static_cast<size_t>(in.gcount()) != n * sizeof(float))
    throw std::runtime_error("volume checkpoint truncated: " + path);
  return plane;
}

}  // namespace

void save_volume(const std::string& path, const TsdfVolume& vol) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint writer assumes a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write volume: " + path);

  const VolumeParams& vp = vol.params();
  bool any_im = false;
  for (const Complex& f : vol.tsdf())
    if (f.im != 0.0) {
      any_im = true;
      break;
    }

  out.precision(17);
  out << "CSFVOL 1\n";
  out << "dims " << vp.dims.x() << " " << vp.dims.y() << " " << vp.dims.z()
      << "\n";
  out << "voxel_size " << vp.voxel_size << "\n";
  out << "origin " << vp.origin.x() << " " << vp.origin.y() << " "
      << vp.origin.z() << "\n";
  out << "mu " << vp.mu << "\n";
  out << "weight_cap " << vp.weight_cap << "\n";
  out << "channels " << (any_im ? "field weight derivative" : "field weight")
      << "\n";
  out << "data\n";

  const size_t n = vol.voxel_count();
  std::vector<float> plane(n);
  for (size_t i = 0; i < n; ++i) plane[i] = static_cast<float>(vol.tsdf()[i].re);
  write_f32_plane(out, plane);
  for (size_t i = 0; i < n; ++i) plane[i] = static_cast<float>(vol.weight()[i]);
  write_f32_plane(out, plane);
  if (any_im) {
    for (size_t i = 0; i < n; ++i)
      plane[i] = static_cast<float>(vol.tsdf()[i].im);
    write_f32_plane(out, plane);
  }
  if (!out) throw std::runtime_error("short write: " + path);
}

TsdfVolume load_volume(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open volume: " + path);

  std::string line;
  if (!std::getline(in, line) || line != "CSFVOL 1")
    throw std::runtime_error("not a volume checkpoint: " + path);

  VolumeParams vp;
  bool has_im = false;
  bool saw_data = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "data") {
      saw_data = true;
      break;
    } else if (key == "dims") {
      ls >> vp.dims.x() >> vp.dims.y() >> vp.dims.z();
    } else if (key == "voxel_size") {
      ls >> vp.voxel_size;
    } else if (key == "origin") {
      ls >> vp.origin.x() >> vp.origin.y() >> vp.origin.z();
    } else if (key == "mu") {
      ls >> vp.mu;
    } else if (key == "weight_cap") {
      ls >> vp.weight_cap;
    } else if (key == "channels") {
      std::string tok;
      while (ls >> tok) has_im = has_im || tok == "derivative";
    } else {
      throw std::runtime_error("unknown checkpoint field '" + key + "': " + path);
    }
  }
  if (!saw_data || vp.dims.minCoeff() <= 0 || vp.voxel_size <= 0.0)
    throw std::runtime_error("malformed volume checkpoint: " + path);

  TsdfVolume vol(vp);
  const size_t n = vol.voxel_count();
  const auto field = read_f32_plane(in, n, path);
  const auto weight = read_f32_plane(in, n, path);
  for (size_t i = 0; i < n; ++i) {
    vol.tsdf()[i] = Complex(static_cast<double>(field[i]));
    vol.weight()[i] = static_cast<double>(weight[i]);
  }
  if (has_im) {
    const auto im = read_f32_plane(in, n, path);
    for (size_t i = 0; i < n; ++i) vol.tsdf()[i].im = static_cast<double>(im[i]);
  }
  return vol;
}

}  // namespace csf
