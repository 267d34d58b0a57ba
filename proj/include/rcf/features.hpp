#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>
#include <vector>

#include "rcf/channels.hpp"

namespace rcf {

inline constexpr int kWindowSize = 24;
inline constexpr double kNormEpsilon = 1e-6;

/// Round-half-up, used wherever a scale is discretized to pixels.
inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

/// Maps rects defined on the 24x24 training window onto a window placed at
/// (x0, y0) with side length round(24 * scale). Rect boundaries are scaled
/// independently, so adjacent rects keep tiling after scaling.
struct Placement {
  int x0 = 0;
  int y0 = 0;
  double scale = 1.0;

  Rect map(const Rect& r) const {
    if (scale == 1.0) return {x0 + r.x, y0 + r.y, r.w, r.h};
    const int left = round_half_up(r.x * scale);
    const int top = round_half_up(r.y * scale);
    const int right = round_half_up((r.x + r.w) * scale);
    const int bottom = round_half_up((r.y + r.h) * scale);
    return {x0 + left, y0 + top, std::max(right - left, 1), std::max(bottom - top, 1)};
  }
};

/// 8-D descriptor of one rect: an l2-normalized HOG half
/// (sum Gh, sum Gv, sum |Gh|, sum |Gv|) followed by an l2-normalized edge
/// binary pattern half (phi1..phi4 pixel counts).
struct BlockDescriptor {
  std::array<double, 4> hog{};
  std::array<double, 4> ebp{};

  double operator[](int dim) const { return dim < 4 ? hog[dim] : ebp[dim - 4]; }
  std::array<double, 8> flat() const {
    return {hog[0], hog[1], hog[2], hog[3], ebp[0], ebp[1], ebp[2], ebp[3]};
  }
};

/// Unnormalized sums behind a BlockDescriptor.
struct BlockSums {
  std::array<double, 4> hog{};
  std::array<double, 4> ebp{};
};

BlockSums block_sums(const ChannelStack& stack, const Rect& rect);

/// v / (||v||_2 + eps); the zero vector stays zero.
std::array<double, 4> l2_normalize(const std::array<double, 4>& v);

/// Throws std::out_of_range when the rect is not inside the stack.
BlockDescriptor block_descriptor(const ChannelStack& stack, const Rect& rect);

/// Single descriptor component; computes only the half containing `dim`.
/// No bounds checks.
double descriptor_component(const ChannelStack& stack, const Rect& rect, int dim);

// ---------------------------------------------------------------------------
// Haar-like baseline

enum class HaarKind : int {
  kTwoHorizontal = 0,    // left | right, right filled
  kTwoVertical = 1,      // top / bottom, bottom filled
  kThreeHorizontal = 2,  // left | center | right, center filled
  kThreeVertical = 3,    // top / middle / bottom, middle filled
  kFourDiagonal = 4,     // 2x2 quadrants, top-left and bottom-right filled
};

inline constexpr int kHaarKinds = 5;

std::string_view haar_kind_name(HaarKind kind);
/// Throws std::invalid_argument for an unknown name.
HaarKind haar_kind_from_name(std::string_view name);

/// Width and height divisors of a kind's outer rect.
std::array<int, 2> haar_kind_cells(HaarKind kind);

struct HaarFeature {
  HaarKind kind = HaarKind::kTwoHorizontal;
  Rect outer;

  friend bool operator==(const HaarFeature&, const HaarFeature&) = default;
};

struct HaarPart {
  Rect rect;
  double weight = 0.0;
};

struct HaarParts {
  std::array<HaarPart, 4> parts{};
  int count = 0;

  const HaarPart* begin() const { return parts.data(); }
  const HaarPart* end() const { return parts.data() + count; }
};

/// Sub-rects with their signed weights. Filled parts are weighted by the
/// unfilled/filled area ratio so a uniform image evaluates to zero.
/// Throws std::invalid_argument if the outer rect is not divisible by the
/// kind's cell counts.
HaarParts haar_parts(const HaarFeature& feature);

/// Filled minus unfilled intensity sums over a feature inside the raw
/// integral. Throws std::out_of_range when the feature leaves the table.
double haar_value(const IntegralTable& raw, const HaarFeature& feature);

/// Haar value for a feature mapped through a placement. Each part sum is
/// rescaled to its unscaled area, so at scale 1 this equals haar_value.
double haar_value_placed(const IntegralTable& raw, const HaarFeature& feature, const Placement& place);

// ---------------------------------------------------------------------------
// Feature pools

struct RectPoolParams {
  int window_w = kWindowSize;
  int window_h = kWindowSize;
  int min_size = 4;
  int size_step = 4;
  int pos_stride = 2;
};

/// All rects with w, h in {min, min+step, ...} at positions on the stride
/// grid, ordered lexicographically by (w, h, x, y).
std::vector<Rect> enumerate_rect_pool(const RectPoolParams& params = {});

struct HaarPoolParams {
  int window_w = kWindowSize;
  int window_h = kWindowSize;
  int pos_stride = 2;
  /// Cell sizes visited are 1, 1 + cell_step, 1 + 2 * cell_step, ...
  int cell_step = 2;
};

/// All five kinds at every cell size and stride position that fits, ordered by
/// (kind, w, h, x, y).
std::vector<HaarFeature> enumerate_haar_pool(const HaarPoolParams& params = {});

}  // namespace rcf
