#include "rcf/features.hpp"

#include <sstream>
#include <stdexcept>

namespace rcf {

namespace {

double hypot4(const std::array<double, 4>& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
}

std::array<double, 4> half_sums(const ChannelStack& stack, const Rect& r, int first_channel) {
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) {
    out[i] = stack.integral(static_cast<Channel>(first_channel + i)).sum(r.x, r.y, r.w, r.h);
  }
  return out;
}

}  // namespace

std::array<double, 4> l2_normalize(const std::array<double, 4>& v) {
  const double norm = hypot4(v);
  if (norm == 0.0) return {0.0, 0.0, 0.0, 0.0};
  const double inv = 1.0 / (norm + kNormEpsilon);
  return {v[0] * inv, v[1] * inv, v[2] * inv, v[3] * inv};
}

BlockSums block_sums(const ChannelStack& stack, const Rect& rect) {
  if (!rect_inside(rect, stack.width(), stack.height())) {
    throw std::out_of_range("block_sums: rect outside window");
  }
  return {half_sums(stack, rect, kGh), half_sums(stack, rect, kPhi1)};
}

BlockDescriptor block_descriptor(const ChannelStack& stack, const Rect& rect) {
  const BlockSums sums = block_sums(stack, rect);
  return {l2_normalize(sums.hog), l2_normalize(sums.ebp)};
}

double descriptor_component(const ChannelStack& stack, const Rect& rect, int dim) {
  const int first = dim < 4 ? kGh : kPhi1;
  const std::array<double, 4> half = l2_normalize(half_sums(stack, rect, first));
  return half[dim & 3];
}

std::string_view haar_kind_name(HaarKind kind) {
  switch (kind) {
    case HaarKind::kTwoHorizontal: return "two_horizontal";
    case HaarKind::kTwoVertical: return "two_vertical";
    case HaarKind::kThreeHorizontal: return "three_horizontal";
    case HaarKind::kThreeVertical: return "three_vertical";
    case HaarKind::kFourDiagonal: return "four_diagonal";
  }
  throw std::invalid_argument("unknown Haar kind");
}

HaarKind haar_kind_from_name(std::string_view name) {
  for (int k = 0; k < kHaarKinds; ++k) {
    const auto kind = static_cast<HaarKind>(k);
    if (haar_kind_name(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown Haar kind '" + std::string(name) + "'");
}

std::array<int, 2> haar_kind_cells(HaarKind kind) {
  switch (kind) {
    case HaarKind::kTwoHorizontal: return {2, 1};
    case HaarKind::kTwoVertical: return {1, 2};
    case HaarKind::kThreeHorizontal: return {3, 1};
    case HaarKind::kThreeVertical: return {1, 3};
    case HaarKind::kFourDiagonal: return {2, 2};
  }
  throw std::invalid_argument("unknown Haar kind");
}

HaarParts haar_parts(const HaarFeature& f) {
  const auto [cols, rows] = haar_kind_cells(f.kind);
  const Rect& o = f.outer;
  if (o.w <= 0 || o.h <= 0 || o.w % cols != 0 || o.h % rows != 0) {
    std::ostringstream msg;
    msg << "Haar feature " << haar_kind_name(f.kind) << " with outer " << o.w << "x" << o.h
        << " is not divisible into " << cols << "x" << rows << " cells";
    throw std::invalid_argument(msg.str());
  }
  const int cw = o.w / cols;
  const int ch = o.h / rows;
  auto cell = [&](int cx, int cy) { return Rect{o.x + cx * cw, o.y + cy * ch, cw, ch}; };

  switch (f.kind) {
    case HaarKind::kTwoHorizontal:
      return {{{{cell(0, 0), -1.0}, {cell(1, 0), 1.0}}}, 2};
    case HaarKind::kTwoVertical:
      return {{{{cell(0, 0), -1.0}, {cell(0, 1), 1.0}}}, 2};
    case HaarKind::kThreeHorizontal:
      return {{{{cell(0, 0), -1.0}, {cell(1, 0), 2.0}, {cell(2, 0), -1.0}}}, 3};
    case HaarKind::kThreeVertical:
      return {{{{cell(0, 0), -1.0}, {cell(0, 1), 2.0}, {cell(0, 2), -1.0}}}, 3};
    case HaarKind::kFourDiagonal:
      return {{{{cell(0, 0), 1.0}, {cell(1, 0), -1.0}, {cell(0, 1), -1.0}, {cell(1, 1), 1.0}}}, 4};
  }
  throw std::invalid_argument("unknown Haar kind");
}

double haar_value(const IntegralTable& raw, const HaarFeature& feature) {
  if (!rect_inside(feature.outer, raw.width(), raw.height())) {
    throw std::out_of_range("haar_value: feature outside window");
  }
  double v = 0.0;
  for (const HaarPart& p : haar_parts(feature)) {
    v += p.weight * raw.sum(p.rect.x, p.rect.y, p.rect.w, p.rect.h);
  }
  return v;
}

double haar_value_placed(const IntegralTable& raw, const HaarFeature& feature, const Placement& place) {
  double v = 0.0;
  for (const HaarPart& p : haar_parts(feature)) {
    const Rect r = place.map(p.rect);
    const double s = raw.sum(r.x, r.y, r.w, r.h);
    v += p.weight * (r.area() == p.rect.area() ? s : s * p.rect.area() / r.area());
  }
  return v;
}

namespace {

std::vector<int> size_grid(int min_size, int step, int limit) {
  std::vector<int> sizes;
  for (int s = min_size; s <= limit; s += step) sizes.push_back(s);
  if (!sizes.empty() && sizes.back() != limit) sizes.push_back(limit);
  return sizes;
}

}  // namespace

std::vector<Rect> enumerate_rect_pool(const RectPoolParams& p) {
  if (p.min_size < 1 || p.size_step < 1 || p.pos_stride < 1) {
    throw std::invalid_argument("enumerate_rect_pool: sizes and strides must be >= 1");
  }
  std::vector<Rect> pool;
  if (p.window_w < p.min_size || p.window_h < p.min_size) return pool;
  const std::vector<int> widths = size_grid(p.min_size, p.size_step, p.window_w);
  const std::vector<int> heights = size_grid(p.min_size, p.size_step, p.window_h);
  for (int w : widths) {
    for (int h : heights) {
      for (int x = 0; x + w <= p.window_w; x += p.pos_stride) {
        for (int y = 0; y + h <= p.window_h; y += p.pos_stride) pool.push_back({x, y, w, h});
      }
    }
  }
  return pool;
}

std::vector<HaarFeature> enumerate_haar_pool(const HaarPoolParams& p) {
  if (p.pos_stride < 1 || p.cell_step < 1) {
    throw std::invalid_argument("enumerate_haar_pool: strides must be >= 1");
  }
  std::vector<HaarFeature> pool;
  for (int k = 0; k < kHaarKinds; ++k) {
    const auto kind = static_cast<HaarKind>(k);
    const auto [cols, rows] = haar_kind_cells(kind);
    for (int cw = 1; cw * cols <= p.window_w; cw += p.cell_step) {
      for (int ch = 1; ch * rows <= p.window_h; ch += p.cell_step) {
        const int w = cw * cols;
        const int h = ch * rows;
        for (int x = 0; x + w <= p.window_w; x += p.pos_stride) {
          for (int y = 0; y + h <= p.window_h; y += p.pos_stride) pool.push_back({kind, {x, y, w, h}});
        }
      }
    }
  }
  return pool;
}

}  // namespace rcf
