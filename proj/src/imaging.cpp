#include "rcf/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rcf {

GrayImage crop(const GrayImage& img, const Rect& rect) {
  if (!rect_inside(rect, img.width(), img.height())) throw std::out_of_range("crop: rect outside image");
  GrayImage out(rect.w, rect.h);
  for (int r = 0; r < rect.h; ++r) {
    for (int c = 0; c < rect.w; ++c) out.at(r, c) = img.at(rect.y + r, rect.x + c);
  }
  return out;
}

double sample_bilinear(const GrayImage& img, double row, double col) {
  const double r = std::clamp(row, 0.0, static_cast<double>(img.height() - 1));
  const double c = std::clamp(col, 0.0, static_cast<double>(img.width() - 1));
  const int r0 = static_cast<int>(std::floor(r));
  const int c0 = static_cast<int>(std::floor(c));
  const int r1 = std::min(r0 + 1, img.height() - 1);
  const int c1 = std::min(c0 + 1, img.width() - 1);
  const double fr = r - r0;
  const double fc = c - c0;
  const double top = img.at(r0, c0) * (1.0 - fc) + img.at(r0, c1) * fc;
  const double bottom = img.at(r1, c0) * (1.0 - fc) + img.at(r1, c1) * fc;
  return clamp_intensity(top * (1.0 - fr) + bottom * fr);
}

GrayImage resample_bilinear(const GrayImage& img, int width, int height) {
  GrayImage out(width, height);
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  for (int r = 0; r < height; ++r) {
    const double src_r = (r + 0.5) * sy - 0.5;
    for (int c = 0; c < width; ++c) out.at(r, c) = sample_bilinear(img, src_r, (c + 0.5) * sx - 0.5);
  }
  return out;
}

GrayImage crop_resized(const GrayImage& img, const Rect& rect, int side) {
  GrayImage patch = crop(img, rect);
  if (patch.width() == side && patch.height() == side) return patch;
  return resample_bilinear(patch, side, side);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace rcf
