#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "rcf/channels.hpp"

namespace testutil {

inline rcf::GrayImage random_image(std::mt19937_64& rng, int w, int h, bool integer = true) {
  rcf::GrayImage img(w, h);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  for (double& v : img.pixels()) v = integer ? std::floor(u(rng)) : u(rng);
  return img;
}

// Direct pixel-loop sum of a per-pixel map.
inline double brute_sum(std::span<const double> map, int width, const rcf::Rect& r) {
  double s = 0.0;
  for (int y = r.y; y < r.y + r.h; ++y) {
    for (int x = r.x; x < r.x + r.w; ++x) s += map[static_cast<std::size_t>(y) * width + x];
  }
  return s;
}

}  // namespace testutil
