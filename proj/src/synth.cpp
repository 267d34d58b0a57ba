#include "rcf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "rcf/features.hpp"
#include "rcf/imaging.hpp"

namespace rcf {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

enum TargetParts : unsigned { kBar = 1u, kStem = 2u, kFullT = kBar | kStem };

// Geometry on the 24x24 window, half-open ranges.
constexpr Rect kBarRect{4, 6, 16, 4};
constexpr Rect kStemRect{10, 9, 4, 11};

bool in_rect(double bx, double by, const Rect& r) {
  return bx >= r.x && bx < r.x + r.w && by >= r.y && by < r.y + r.h;
}

// Textured noise: mean level, a few low-frequency gratings, pixel noise and
// random rectangular blobs.
std::vector<double> texture(Rng& rng, int width, int height, double mean, int blobs) {
  std::vector<double> px(static_cast<std::size_t>(width) * height, mean);
  for (int k = 0; k < 3; ++k) {
    const double amp = uniform(rng, 4.0, 12.0);
    const double freq = uniform(rng, 1.0 / 24.0, 1.0 / 6.0);
    const double angle = uniform(rng, 0.0, std::numbers::pi);
    const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double fx = freq * std::cos(angle);
    const double fy = freq * std::sin(angle);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        px[static_cast<std::size_t>(r) * width + c] += amp * std::sin(2.0 * std::numbers::pi * (fx * c + fy * r) + phase);
      }
    }
  }
  std::normal_distribution<double> noise(0.0, uniform(rng, 5.0, 10.0));
  for (double& v : px) v += noise(rng);
  for (int b = 0; b < blobs; ++b) {
    const int w = uniform_int(rng, 2, 10);
    const int h = uniform_int(rng, 2, 10);
    const int x = uniform_int(rng, -w + 1, width - 1);
    const int y = uniform_int(rng, -h + 1, height - 1);
    const double delta = (uniform_int(rng, 0, 1) ? 1.0 : -1.0) * uniform(rng, 30.0, 80.0);
    for (int r = std::max(y, 0); r < std::min(y + h, height); ++r) {
      for (int c = std::max(x, 0); c < std::min(x + w, width); ++c) px[static_cast<std::size_t>(r) * width + c] += delta;
    }
  }
  return px;
}

// Darkens the selected parts of the T placed at (x0, y0) with the given scale.
void draw_target(std::vector<double>& px, int width, int height, double x0, double y0, double scale, double depth,
                 unsigned parts) {
  const int side = static_cast<int>(std::ceil(kWindowSize * scale)) + 1;
  for (int r = std::max(0, static_cast<int>(y0)); r < std::min(height, static_cast<int>(y0) + side); ++r) {
    for (int c = std::max(0, static_cast<int>(x0)); c < std::min(width, static_cast<int>(x0) + side); ++c) {
      const double bx = (c - x0 + 0.5) / scale;
      const double by = (r - y0 + 0.5) / scale;
      const bool hit = ((parts & kBar) && in_rect(bx, by, kBarRect)) || ((parts & kStem) && in_rect(bx, by, kStemRect));
      if (hit) px[static_cast<std::size_t>(r) * width + c] -= depth;
    }
  }
}

void gain_offset(Rng& rng, std::vector<double>& px) {
  const double gain = uniform(rng, 0.8, 1.25);
  const double offset = uniform(rng, -20.0, 20.0);
  for (double& v : px) v = clamp_intensity(gain * v + offset);
}

GrayImage synth_patch(std::uint64_t seed, unsigned parts) {
  Rng rng(seed);
  const double mean = uniform(rng, 110.0, 170.0);
  std::vector<double> px = texture(rng, kWindowSize, kWindowSize, mean, uniform_int(rng, 0, 2));
  if (parts != 0) {
    const int dx = uniform_int(rng, -1, 1);
    const int dy = uniform_int(rng, -1, 1);
    draw_target(px, kWindowSize, kWindowSize, dx, dy, 1.0, uniform(rng, 75.0, 110.0), parts);
  }
  gain_offset(rng, px);
  return GrayImage(kWindowSize, kWindowSize, std::move(px));
}

}  // namespace

GrayImage synth_positive(std::uint64_t seed) { return synth_patch(seed, kFullT); }

GrayImage synth_negative(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x5eed));
  const int mode = uniform_int(rng, 0, 3);
  const unsigned parts = mode == 0 ? kBar : (mode == 1 ? kStem : 0u);
  return synth_patch(seed, parts);
}

TrainingSet synth_corpus(std::uint64_t seed, int n_pos, int n_neg) {
  if (n_pos < 1 || n_neg < 1) throw std::invalid_argument("synth_corpus: counts must be >= 1");
  TrainingSet set;
  set.seed = seed;
  set.positives.reserve(n_pos);
  set.negatives.reserve(n_neg);
  for (int i = 0; i < n_pos; ++i) set.positives.push_back(synth_positive(derive_seed(seed, 2ull * i)));
  for (int i = 0; i < n_neg; ++i) set.negatives.push_back(synth_negative(derive_seed(seed, 2ull * i + 1)));
  return set;
}

GrayImage synth_scene(std::uint64_t seed, int width, int height) {
  if (width < 1 || height < 1) throw std::invalid_argument("synth_scene: bad size");
  Rng rng(seed);
  const double mean = uniform(rng, 110.0, 170.0);
  const double area_units = static_cast<double>(width) * height / (kWindowSize * kWindowSize);
  std::vector<double> px = texture(rng, width, height, mean, static_cast<int>(std::lround(1.5 * area_units)));
  const int partials = static_cast<int>(std::lround(0.5 * area_units));
  for (int p = 0; p < partials; ++p) {
    const double scale = uniform(rng, 1.0, 2.0);
    const int side = round_half_up(kWindowSize * scale);
    const int x = uniform_int(rng, -side / 2, width - side / 2);
    const int y = uniform_int(rng, -side / 2, height - side / 2);
    const double depth = uniform(rng, 75.0, 110.0);
    const int kind = uniform_int(rng, 0, 3);
    if (kind < 2) {
      draw_target(px, width, height, x, y, scale, depth, kind == 0 ? kBar : kStem);
    } else {
      // Decoy: both parts, with the stem displaced sideways or above the bar.
      const double shift = (uniform_int(rng, 0, 1) ? 1.0 : -1.0) * uniform(rng, 4.0, 8.0) * scale;
      const double sx = kind == 2 ? shift : 0.0;
      const double sy = kind == 2 ? 0.0 : -12.0 * scale;
      draw_target(px, width, height, x, y, scale, depth, kBar);
      draw_target(px, width, height, x + sx, y + sy, scale, depth, kStem);
    }
  }
  gain_offset(rng, px);
  return GrayImage(width, height, std::move(px));
}

std::vector<GrayImage> synth_negative_images(std::uint64_t seed, int count, int width, int height) {
  std::vector<GrayImage> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(synth_scene(derive_seed(seed, i), width, height));
  return out;
}

std::vector<GrayImage> synth_bootstrap_images(std::uint64_t seed, int n_patches, int n_scenes, int scene_side) {
  std::vector<GrayImage> out;
  out.reserve(static_cast<std::size_t>(std::max(0, n_patches) + std::max(0, n_scenes)));
  for (int i = 0; i < n_patches; ++i) out.push_back(synth_negative(derive_seed(derive_seed(seed, 1), i)));
  for (int i = 0; i < n_scenes; ++i) out.push_back(synth_scene(derive_seed(derive_seed(seed, 2), i), scene_side, scene_side));
  return out;
}

GroundTruthBox plant_target(GrayImage& img, int x, int y, double scale, std::uint64_t seed) {
  Rng rng(seed);
  const double depth = uniform(rng, 75.0, 110.0);
  std::vector<double> px(img.pixels().begin(), img.pixels().end());
  draw_target(px, img.width(), img.height(), x, y, scale, depth, kFullT);
  for (double& v : px) v = clamp_intensity(v);
  img = GrayImage(img.width(), img.height(), std::move(px));
  const double side = round_half_up(kWindowSize * scale);
  return {static_cast<double>(x), static_cast<double>(y), side, side};
}

}  // namespace rcf
