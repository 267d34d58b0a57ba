#pragma once

#include <cstdint>
#include <vector>

#include "rcf/channels.hpp"
#include "rcf/detector.hpp"

namespace rcf {

// Deterministic synthetic data: a dark "T" (horizontal bar, rows 6-9; stem,
// columns 10-13 over rows 9-19 of the 24x24 window) on textured noise.

struct TrainingSet {
  std::vector<GrayImage> positives;
  std::vector<GrayImage> negatives;
  std::uint64_t seed = 0;
};

/// nPos target patches and nNeg texture patches, 24x24. Positive i uses
/// sub-seed derive(seed, 2i), negative i derive(seed, 2i + 1). About half of
/// the negatives carry one part of the T (bar or stem) as a hard distractor.
/// Throws std::invalid_argument unless both counts are >= 1.
TrainingSet synth_corpus(std::uint64_t seed, int n_pos, int n_neg);

/// One 24x24 positive / negative patch from its own seed.
GrayImage synth_positive(std::uint64_t seed);
GrayImage synth_negative(std::uint64_t seed);

/// Large texture image, target-free, with distractors at random scales: single
/// bars or stems, and Ts whose stem is displaced sideways or above the bar.
GrayImage synth_scene(std::uint64_t seed, int width, int height);

/// `count` target-free scenes for bootstrapping.
std::vector<GrayImage> synth_negative_images(std::uint64_t seed, int count, int width, int height);

/// Negative source images for cascade bootstrapping: `n_patches` 24x24
/// negative patches followed by `n_scenes` square scenes of side `scene_side`.
std::vector<GrayImage> synth_bootstrap_images(std::uint64_t seed, int n_patches, int n_scenes, int scene_side);

/// Draws the T at (x, y) scaled by `scale` into the image (darkening by a
/// random contrast drawn from `seed`). Returns its square bounding box.
GroundTruthBox plant_target(GrayImage& img, int x, int y, double scale, std::uint64_t seed);

}  // namespace rcf
