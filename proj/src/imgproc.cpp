#include "pinspect/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pinspect/parallel.hpp"

namespace pinspect {

GradientField sobel(const ImageU8& img) {
  GradientField g;
  g.width = img.width;
  g.height = img.height;
  g.gx.assign(img.size(), 0.f);
  g.gy.assign(img.size(), 0.f);
  g.magnitude.assign(img.size(), 0.f);
  if (img.width < 3 || img.height < 3) return g;

  parallel_for(1, static_cast<size_t>(img.height) - 1, [&](size_t y0, size_t y1) {
    for (size_t y = y0; y < y1; ++y) {
      const uint8_t* rm = &img.data[(y - 1) * img.width];
      const uint8_t* r0 = &img.data[y * img.width];
      const uint8_t* rp = &img.data[(y + 1) * img.width];
      float* gx = &g.gx[y * img.width];
      float* gy = &g.gy[y * img.width];
      float* mg = &g.magnitude[y * img.width];
      for (int x = 1; x < img.width - 1; ++x) {
        const int sx = (rm[x + 1] + 2 * r0[x + 1] + rp[x + 1]) -
                       (rm[x - 1] + 2 * r0[x - 1] + rp[x - 1]);
        const int sy = (rp[x - 1] + 2 * rp[x] + rp[x + 1]) -
                       (rm[x - 1] + 2 * rm[x] + rm[x + 1]);
        const float fx = sx * 0.25f;
        const float fy = sy * 0.25f;
        gx[x] = fx;
        gy[x] = fy;
        mg[x] = std::sqrt(fx * fx + fy * fy);
      }
    }
  }, 64);
  return g;
}

ImageU8 downsample2(const ImageU8& img) {
  ImageU8 out(img.width / 2, img.height / 2);
  for (int y = 0; y < out.height; ++y) {
    const uint8_t* r0 = &img.data[static_cast<size_t>(2 * y) * img.width];
    const uint8_t* r1 = &img.data[static_cast<size_t>(2 * y + 1) * img.width];
    uint8_t* o = &out.data[static_cast<size_t>(y) * out.width];
    for (int x = 0; x < out.width; ++x) {
      const int s = r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1];
      o[x] = static_cast<uint8_t>((s + 2) / 4);
    }
  }
  return out;
}

ImageI32 downsample2_nearest(const ImageI32& img) {
  ImageI32 out(img.width / 2, img.height / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(x, y) = img.at(2 * x, 2 * y);
  return out;
}

ImageF downsample2_min(const ImageF& img) {
  ImageF out(img.width / 2, img.height / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      out.at(x, y) = std::min(std::min(img.at(2 * x, 2 * y), img.at(2 * x + 1, 2 * y)),
                              std::min(img.at(2 * x, 2 * y + 1), img.at(2 * x + 1, 2 * y + 1)));
  return out;
}

ImageU8 canny_edges(const ImageU8& img, double low, double high) {
  const GradientField g = sobel(img);
  const int w = img.width, h = img.height;
  ImageU8 cls(w, h, 0);  // 0 none, 1 weak, 2 strong

  // Non-maximum suppression along the quantized gradient direction.
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const float m = g.magnitude[g.idx(x, y)];
      if (m < low) continue;
      const float gx = g.gx[g.idx(x, y)];
      const float gy = g.gy[g.idx(x, y)];
      int dx = 1, dy = 0;
      const float ax = std::abs(gx), ay = std::abs(gy);
      if (ay > 2.414f * ax) {
        dx = 0; dy = 1;
      } else if (ay > 0.414f * ax) {
        dy = (gx > 0) == (gy > 0) ? 1 : -1;
        dx = 1;
      }
      const float m1 = g.magnitude[g.idx(x + dx, y + dy)];
      const float m2 = g.magnitude[g.idx(x - dx, y - dy)];
      if (m >= m1 && m >= m2) cls.at(x, y) = m >= high ? 2 : 1;
    }
  }

  // Hysteresis: keep weak edges connected to strong ones.
  ImageU8 out(w, h, 0);
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (cls.at(x, y) == 2 && out.at(x, y) == 0) {
        stack.emplace_back(x, y);
        out.at(x, y) = 255;
        while (!stack.empty()) {
          auto [cx, cy] = stack.back();
          stack.pop_back();
          for (int ny = cy - 1; ny <= cy + 1; ++ny)
            for (int nx = cx - 1; nx <= cx + 1; ++nx) {
              if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
              if (cls.at(nx, ny) != 0 && out.at(nx, ny) == 0) {
                out.at(nx, ny) = 255;
                stack.emplace_back(nx, ny);
              }
            }
        }
      }
  return out;
}

// Felzenszwalb & Huttenlocher 1D squared distance transform.
static void edt_1d(const std::vector<float>& f, std::vector<float>& d, int n,
                   std::vector<int>& v, std::vector<float>& z) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<float>::infinity();
  z[1] = std::numeric_limits<float>::infinity();
  for (int q = 1; q < n; ++q) {
    float s;
    for (;;) {
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.f * (q - v[k]));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<float>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const float dx = static_cast<float>(q - v[k]);
    d[q] = dx * dx + f[v[k]];
  }
}

ImageF distance_transform(const ImageU8& mask) {
  const int w = mask.width, h = mask.height;
  const float inf = std::numeric_limits<float>::infinity();
  ImageF sq(w, h, inf);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask.at(x, y)) sq.at(x, y) = 0.f;

  std::vector<float> f(std::max(w, h)), d(std::max(w, h)), z(std::max(w, h) + 1);
  std::vector<int> v(std::max(w, h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = sq.at(x, y);
    edt_1d(f, d, h, v, z);
    for (int y = 0; y < h; ++y) sq.at(x, y) = d[y];
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = sq.at(x, y);
    edt_1d(f, d, w, v, z);
    for (int x = 0; x < w; ++x) sq.at(x, y) = d[x];
  }
  for (auto& p : sq.data) p = std::isinf(p) ? inf : std::sqrt(p);
  return sq;
}

uint8_t otsu_threshold(const ImageU8& img) {
  size_t hist[256] = {0};
  for (uint8_t p : img.data) ++hist[p];
  const double total = static_cast<double>(img.size());
  double sum = 0;
  for (int i = 0; i < 256; ++i) sum += i * static_cast<double>(hist[i]);
  double sum_b = 0, w_b = 0, best = -1;
  int threshold = 127;
  for (int i = 0; i < 256; ++i) {
    w_b += static_cast<double>(hist[i]);
    if (w_b == 0) continue;
    const double w_f = total - w_b;
    if (w_f == 0) break;
    sum_b += i * static_cast<double>(hist[i]);
    const double m_b = sum_b / w_b;
    const double m_f = (sum - sum_b) / w_f;
    const double between = w_b * w_f * (m_b - m_f) * (m_b - m_f);
    if (between > best) {
      best = between;
      threshold = i;
    }
  }
  return static_cast<uint8_t>(threshold);
}

void add_gaussian_noise(ImageU8& img, double sigma, uint64_t seed) {
  if (sigma <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (auto& p : img.data) {
    const double v = p + n(rng);
    p = static_cast<uint8_t>(std::clamp(v, 0.0, 255.0) + 0.5);
  }
}

ImageRGB ImageRGB::from_gray(const ImageU8& g) {
  ImageRGB out(g.width, g.height);
  for (size_t i = 0; i < g.size(); ++i) {
    out.data[3 * i] = g.data[i];
    out.data[3 * i + 1] = g.data[i];
    out.data[3 * i + 2] = g.data[i];
  }
  return out;
}

void ImageRGB::set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const size_t i = (static_cast<size_t>(y) * width + x) * 3;
  data[i] = r;
  data[i + 1] = g;
  data[i + 2] = b;
}

void draw_circle(ImageRGB& img, double cx, double cy, double radius,
                 uint8_t r, uint8_t g, uint8_t b, int thickness) {
  const int n = std::max(16, static_cast<int>(radius * 8));
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * 3.14159265358979 * i / n;
    for (int t = 0; t < thickness; ++t) {
      const double rr = radius + t;
      img.set(static_cast<int>(cx + rr * std::cos(a)),
              static_cast<int>(cy + rr * std::sin(a)), r, g, b);
    }
  }
}

void draw_disc(ImageRGB& img, double cx, double cy, double radius,
               uint8_t r, uint8_t g, uint8_t b) {
  const int x0 = static_cast<int>(cx - radius), x1 = static_cast<int>(cx + radius) + 1;
  const int y0 = static_cast<int>(cy - radius), y1 = static_cast<int>(cy + radius) + 1;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius) img.set(x, y, r, g, b);
}

void draw_line(ImageRGB& img, double x0, double y0, double x1, double y1,
               uint8_t r, uint8_t g, uint8_t b) {
  const double len = std::hypot(x1 - x0, y1 - y0);
  const int n = std::max(1, static_cast<int>(len));
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    img.set(static_cast<int>(x0 + t * (x1 - x0)), static_cast<int>(y0 + t * (y1 - y0)), r, g, b);
  }
}

}  // namespace pinspect
