#include "tactex/vision/mask_ops.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tactex::vision {
namespace {

void require_nonempty(const Mask& mask, const char* what) {
  if (mask.empty()) throw std::invalid_argument(std::string(what) + ": empty image");
}

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

constexpr double kFar = 1e20;

// 1-D squared distance transform (lower envelope of parabolas).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kFar;
  z[1] = kFar;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    d[q] = (q - v[k]) * double(q - v[k]) + f[v[k]];
  }
}

}  // namespace

Mask canny_edges(const Mask& mask, const CannyParams& params) {
  require_nonempty(mask, "canny");
  const int w = mask.width();
  const int h = mask.height();
  auto px = [&](int x, int y) { return mask.at(clampi(x, 0, w - 1), clampi(y, 0, h - 1)) ? 255.0 : 0.0; };
  GrayImage gx(w, h), gy(w, h), mag(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double sy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      gx.at(x, y) = sx;
      gy.at(x, y) = sy;
      mag.at(x, y) = std::hypot(sx, sy);
    }
  }
  auto m = [&](int x, int y) { return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : mag.at(x, y); };
  // 0: strong, 1: weak, 2: none
  Image<std::uint8_t> cls(w, h, 1, 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double g = mag.at(x, y);
      if (g < params.low) continue;
      // quantise the gradient direction into 4 bins
      const double angle = std::atan2(gy.at(x, y), gx.at(x, y)) * 180.0 / M_PI;
      const double a = angle < 0 ? angle + 180.0 : angle;
      int dx = 1, dy = 0;
      if (a >= 22.5 && a < 67.5) {
        dx = 1;
        dy = 1;
      } else if (a >= 67.5 && a < 112.5) {
        dx = 0;
        dy = 1;
      } else if (a >= 112.5 && a < 157.5) {
        dx = -1;
        dy = 1;
      }
      if (g < m(x + dx, y + dy) || g < m(x - dx, y - dy)) continue;
      cls.at(x, y) = g >= params.high ? 0 : 1;
    }
  }
  Mask edges(w, h, 1, 0);
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (cls.at(x, y) == 0) {
        edges.at(x, y) = 1;
        stack.emplace_back(x, y);
      }
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    for (int oy = -1; oy <= 1; ++oy)
      for (int ox = -1; ox <= 1; ++ox) {
        const int nx = x + ox, ny = y + oy;
        if (!edges.contains(nx, ny) || edges.at(nx, ny) || cls.at(nx, ny) != 1) continue;
        edges.at(nx, ny) = 1;
        stack.emplace_back(nx, ny);
      }
  }
  return edges;
}

Mask dilate3x3(const Mask& mask, int iterations) {
  Mask cur = mask;
  for (int it = 0; it < iterations; ++it) {
    Mask next(cur.width(), cur.height(), 1, 0);
    for (int y = 0; y < cur.height(); ++y)
      for (int x = 0; x < cur.width(); ++x) {
        if (!cur.at(x, y)) continue;
        for (int oy = -1; oy <= 1; ++oy)
          for (int ox = -1; ox <= 1; ++ox)
            if (next.contains(x + ox, y + oy)) next.at(x + ox, y + oy) = 1;
      }
    cur = std::move(next);
  }
  return cur;
}

RefinedMask refine_mask(const Mask& mask, const CannyParams& params) {
  if (mask_area(mask) == 0) throw std::invalid_argument("refine_mask: empty mask");
  const Mask band = dilate3x3(canny_edges(mask, params), 2);
  Mask inner(mask.width(), mask.height(), 1, 0);
  auto in = mask.data();
  auto b = band.data();
  auto out = inner.data();
  std::size_t area = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = (in[i] && !b[i]) ? 1 : 0;
    area += out[i];
  }
  if (area == 0) return {mask, true};
  return {std::move(inner), false};
}

double iou(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("iou: mask sizes differ");
  std::size_t inter = 0, uni = 0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const bool x = da[i] != 0, y = db[i] != 0;
    inter += x && y;
    uni += x || y;
  }
  if (uni == 0) throw std::invalid_argument("iou: both masks are empty");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

GrayImage distance_to_set(const Mask& mask) {
  const int w = mask.width(), h = mask.height();
  GrayImage d2(w, h);
  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < w; ++x) {
    f.resize(h);
    d.resize(h);
    for (int y = 0; y < h; ++y) f[y] = mask.at(x, y) ? 0.0 : kFar;
    edt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) d2.at(x, y) = d[y];
  }
  f.resize(w);
  d.resize(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = d2.at(x, y);
    edt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) d2.at(x, y) = d[x] >= kFar ? std::numeric_limits<double>::infinity() : std::sqrt(d[x]);
  }
  return d2;
}

nlohmann::json mask_to_rle(const Mask& mask) {
  std::vector<std::size_t> counts;
  std::uint8_t current = 0;
  std::size_t run = 0;
  for (auto v : mask.data()) {
    const std::uint8_t b = v ? 1 : 0;
    if (b != current) {
      counts.push_back(run);
      run = 0;
      current = b;
    }
    ++run;
  }
  counts.push_back(run);
  return {{"width", mask.width()}, {"height", mask.height()}, {"counts", counts}};
}

Mask mask_from_rle(const nlohmann::json& j) {
  Mask m(j.at("width").get<int>(), j.at("height").get<int>(), 1, 0);
  auto out = m.data();
  std::size_t pos = 0;
  std::uint8_t value = 0;
  for (const auto& c : j.at("counts")) {
    const auto n = c.get<std::size_t>();
    if (pos + n > out.size()) throw std::invalid_argument("rle: counts exceed image size");
    for (std::size_t i = 0; i < n; ++i) out[pos++] = value;
    value ^= 1;
  }
  if (pos != out.size()) throw std::invalid_argument("rle: counts do not cover the image");
  return m;
}

PixelCentroid mask_centroid(const Mask& mask) {
  double su = 0, sv = 0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) {
        su += x;
        sv += y;
        ++n;
      }
  if (n == 0) throw std::invalid_argument("mask_centroid: empty mask");
  return {su / n, sv / n};
}

}  // namespace tactex::vision
