#include "rcf/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "rcf/imaging.hpp"

namespace rcf {

AugmentFlags parse_augment_flags(const std::string& text) {
  AugmentFlags f;
  for (char c : text) {
    switch (c) {
      case 'R': case 'r': f.rotate = true; break;
      case 'M': case 'm': f.translate = true; break;
      case 'L': case 'l': f.lighting = true; break;
      default: throw std::invalid_argument(std::string("augment flags: unknown flag '") + c + "' (use R, M, L)");
    }
  }
  return f;
}

std::string augment_flags_string(const AugmentFlags& flags) {
  std::string s;
  if (flags.rotate) s += 'R';
  if (flags.translate) s += 'M';
  if (flags.lighting) s += 'L';
  return s;
}

GrayImage augment_patch(const GrayImage& patch, const AugmentFlags& flags, std::uint64_t seed,
                        const AugmentParams& params) {
  std::mt19937_64 rng(seed);
  GrayImage out = patch;
  const int w = patch.width();
  const int h = patch.height();

  if (flags.rotate) {
    const double deg = std::uniform_real_distribution<double>(-params.max_rotation_deg, params.max_rotation_deg)(rng);
    const double rad = deg * std::numbers::pi / 180.0;
    const double cs = std::cos(rad), sn = std::sin(rad);
    const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
    GrayImage rotated(w, h);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        // Inverse mapping: output pixel back into the source.
        const double dx = c - cx, dy = r - cy;
        rotated.at(r, c) = sample_bilinear(out, cy - sn * dx + cs * dy, cx + cs * dx + sn * dy);
      }
    }
    out = std::move(rotated);
  }

  if (flags.translate) {
    std::uniform_int_distribution<int> shift(-params.max_shift, params.max_shift);
    const int sx = shift(rng);
    const int sy = shift(rng);
    GrayImage moved(w, h);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) moved.at(r, c) = out.at(std::clamp(r - sy, 0, h - 1), std::clamp(c - sx, 0, w - 1));
    }
    out = std::move(moved);
  }

  if (flags.lighting) {
    const double a = std::uniform_real_distribution<double>(params.min_gain, params.max_gain)(rng);
    const double b = std::uniform_real_distribution<double>(-params.max_bias, params.max_bias)(rng);
    for (double& v : out.pixels()) v = clamp_intensity(a * v + b);
  }
  return out;
}

std::vector<GrayImage> augment(std::span<const GrayImage> patches, const AugmentFlags& flags, std::uint64_t seed,
                               const AugmentParams& params) {
  std::vector<GrayImage> out;
  out.reserve(patches.size());
  for (std::size_t i = 0; i < patches.size(); ++i) out.push_back(augment_patch(patches[i], flags, derive_seed(seed, i), params));
  return out;
}

}  // namespace rcf
