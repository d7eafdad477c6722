#pragma once

#include <cstdint>
#include <vector>

#include "pinspect/image.hpp"

namespace pinspect {

// Image gradients from the 3x3 Sobel operator, normalized so that magnitude
// approximates the local intensity step height (raw Sobel response / 4).
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<float> gx;         // normalized
  std::vector<float> gy;
  std::vector<float> magnitude;  // sqrt(gx^2 + gy^2)

  bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  size_t idx(int x, int y) const { return static_cast<size_t>(y) * width + x; }
};

GradientField sobel(const ImageU8& img);

// 2x box downsample (floor(w/2) x floor(h/2)), value = rounded mean of 2x2 block.
ImageU8 downsample2(const ImageU8& img);

// Nearest downsample for label-like buffers (takes the top-left sample).
ImageI32 downsample2_nearest(const ImageI32& img);
ImageF downsample2_min(const ImageF& img);

// Gradient-magnitude edge detector with non-maximum suppression and
// hysteresis. Thresholds are in intensity-step units (same scale as
// GradientField::magnitude). Returns a binary edge map (255 = edge).
ImageU8 canny_edges(const ImageU8& img, double low, double high);

// Exact Euclidean distance transform: per-pixel distance to the nearest
// nonzero pixel of mask. Pixels of the mask get 0. Empty mask -> +inf.
ImageF distance_transform(const ImageU8& mask);

// Otsu's threshold on an 8-bit image histogram.
uint8_t otsu_threshold(const ImageU8& img);

// Additive Gaussian noise with clamping to [0, 255]; deterministic per seed.
void add_gaussian_noise(ImageU8& img, double sigma, uint64_t seed);

// Minimal drawing helpers for overlays (RGB interleaved).
struct ImageRGB {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // r,g,b per pixel

  ImageRGB() = default;
  ImageRGB(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0) {}
  static ImageRGB from_gray(const ImageU8& g);
  void set(int x, int y, uint8_t r, uint8_t g, uint8_t b);
};

void draw_circle(ImageRGB& img, double cx, double cy, double radius,
                 uint8_t r, uint8_t g, uint8_t b, int thickness = 1);
void draw_disc(ImageRGB& img, double cx, double cy, double radius,
               uint8_t r, uint8_t g, uint8_t b);
void draw_line(ImageRGB& img, double x0, double y0, double x1, double y1,
               uint8_t r, uint8_t g, uint8_t b);

}  // namespace pinspect
