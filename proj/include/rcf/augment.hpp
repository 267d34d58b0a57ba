#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rcf/channels.hpp"

namespace rcf {

struct AugmentFlags {
  bool rotate = false;     // R
  bool translate = false;  // M
  bool lighting = false;   // L

  bool any() const { return rotate || translate || lighting; }
  friend bool operator==(const AugmentFlags&, const AugmentFlags&) = default;
};

/// Parses a subset of "RML" in any order ("" for none). Throws
/// std::invalid_argument for other characters.
AugmentFlags parse_augment_flags(const std::string& text);
std::string augment_flags_string(const AugmentFlags& flags);

struct AugmentParams {
  double max_rotation_deg = 15.0;
  int max_shift = 2;
  double min_gain = 0.6;
  double max_gain = 1.4;
  double max_bias = 25.0;
};

/// One patch with its own seed: rotation (bilinear, replicated border), then
/// integer translation (replicated border), then clamp(a * p + b).
GrayImage augment_patch(const GrayImage& patch, const AugmentFlags& flags, std::uint64_t seed,
                        const AugmentParams& params = {});

/// Patch i is augmented with seed derive(seed, i).
std::vector<GrayImage> augment(std::span<const GrayImage> patches, const AugmentFlags& flags, std::uint64_t seed,
                               const AugmentParams& params = {});

}  // namespace rcf
