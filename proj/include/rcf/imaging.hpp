#pragma once

#include <cstdint>

#include "rcf/channels.hpp"

namespace rcf {

/// Copies a sub-rectangle. Throws std::out_of_range if it leaves the image.
GrayImage crop(const GrayImage& img, const Rect& rect);

/// Bilinear resampling at pixel centers with replicated borders.
GrayImage resample_bilinear(const GrayImage& img, int width, int height);

/// Crop followed by resampling to a square of the given side; no resampling
/// when the crop already has that size.
GrayImage crop_resized(const GrayImage& img, const Rect& rect, int side);

/// Bilinear sample at a real-valued (row, col), replicating the border.
double sample_bilinear(const GrayImage& img, double row, double col);

inline double clamp_intensity(double v) { return v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v); }

/// Derives an independent 64-bit seed for item `index` of a stream seeded by
/// `seed` (splitmix64 finalizer over both).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace rcf
