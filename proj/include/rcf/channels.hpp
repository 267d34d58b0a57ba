#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace rcf {

/// Axis-aligned rectangle in pixel coordinates, covering [x, x+w) x [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int area() const { return w * h; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Single-channel image with real intensities in [0, 255], stored row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  /// Throws std::invalid_argument if the data size does not match or a value
  /// is outside [0, 255] or non-finite.
  GrayImage(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  double at(int row, int col) const { return data_[static_cast<std::size_t>(row) * width_ + col]; }
  double& at(int row, int col) { return data_[static_cast<std::size_t>(row) * width_ + col]; }

  std::span<const double> pixels() const { return data_; }
  std::span<double> pixels() { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Horizontal and vertical edge responses of an image.
struct GradientPair {
  int width = 0;
  int height = 0;
  std::vector<double> gh;  // I(r, c+1) - I(r, c-1)
  std::vector<double> gv;  // I(r+1, c) - I(r-1, c)
};

/// Summed-area table with a zero top row and left column:
/// value(r, c) = sum of the source over rows [0, r) and columns [0, c).
class IntegralTable {
 public:
  IntegralTable() = default;
  IntegralTable(int width, int height, std::span<const double> source);

  int width() const { return width_; }
  int height() const { return height_; }

  double value(int row, int col) const {
    return table_[static_cast<std::size_t>(row) * (width_ + 1) + col];
  }

  /// Rectangle sum without bounds checks. Caller guarantees the rect is inside.
  double sum(int x, int y, int w, int h) const {
    const std::size_t stride = static_cast<std::size_t>(width_) + 1;
    const double* top = table_.data() + static_cast<std::size_t>(y) * stride;
    const double* bottom = top + static_cast<std::size_t>(h) * stride;
    return bottom[x + w] - bottom[x] - top[x + w] + top[x];
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> table_;
};

/// Channel slots. The first eight feed the block descriptor; kRaw backs the
/// Haar-like baseline.
enum Channel : int {
  kGh = 0,
  kGv = 1,
  kAbsGh = 2,
  kAbsGv = 3,
  kPhi1 = 4,
  kPhi2 = 5,
  kPhi3 = 6,
  kPhi4 = 7,
  kRaw = 8,
};

inline constexpr int kDescriptorChannels = 8;
inline constexpr int kIntegralTables = 9;

/// The eight derived channel maps of an image together with their integral
/// tables and the integral of the raw intensities. Immutable once built.
class ChannelStack {
 public:
  ChannelStack() = default;

  int width() const { return width_; }
  int height() const { return height_; }

  /// Per-pixel map for one of the eight derived channels (not kRaw).
  std::span<const double> channel(Channel c) const { return maps_[c]; }
  const IntegralTable& integral(Channel c) const { return integrals_[c]; }

 private:
  friend ChannelStack build_channels(const GrayImage& img, bool keep_maps);

  int width_ = 0;
  int height_ = 0;
  std::array<std::vector<double>, kDescriptorChannels> maps_;
  std::array<IntegralTable, kIntegralTables> integrals_;
};

GradientPair compute_gradients(const GrayImage& img);

/// Bin index in {1, 2, 3, 4} of the edge binary pattern for a pixel with
/// vertical response gv and horizontal response gh:
///   1: gv >= 0, gh >= 0    2: gv >= 0, gh < 0
///   3: gv <  0, gh >= 0    4: gv <  0, gh < 0
inline int quadrant_code(double gv, double gh) {
  if (gv >= 0.0) return gh >= 0.0 ? 1 : 2;
  return gh >= 0.0 ? 3 : 4;
}

/// Builds all channel maps and the nine integral tables. With keep_maps set to
/// false only the integral tables are retained.
ChannelStack build_channels(const GrayImage& img, bool keep_maps = true);

/// Sum of a table's source over the rect. Throws std::out_of_range when the
/// rect is empty or leaves the table.
double box_sum(const IntegralTable& ii, const Rect& rect);

inline bool rect_inside(const Rect& r, int width, int height) {
  return r.w > 0 && r.h > 0 && r.x >= 0 && r.y >= 0 && r.x + r.w <= width && r.y + r.h <= height;
}

}  // namespace rcf
