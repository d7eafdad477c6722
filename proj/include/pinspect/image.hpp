#pragma once

#include <cstdint>
#include <vector>

namespace pinspect {

// Dense row-major 2D buffer.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  T& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  const T& at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

  bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
};

using ImageU8 = Image<uint8_t>;
using ImageF = Image<float>;
using ImageI32 = Image<int32_t>;

}  // namespace pinspect
