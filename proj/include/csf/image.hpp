#pragma once

// Dense row-major image container. Depth images use z <= 0 as "invalid";
// vertex maps inherit that through their z component and normal maps use
// the zero vector.

#include <cassert>
#include <vector>

namespace csf {

template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }

  T& at(int x, int y) {
    assert(in_bounds(x, y));
    return data[static_cast<size_t>(y) * width + x];
  }
  const T& at(int x, int y) const {
    assert(in_bounds(x, y));
    return data[static_cast<size_t>(y) * width + x];
  }

  size_t size() const { return data.size(); }
};

}  // namespace csf
