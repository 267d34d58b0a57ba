#include "rcf/channels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rcf {

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) throw std::invalid_argument("GrayImage: dimensions must be >= 1");
  if (!(fill >= 0.0 && fill <= 255.0)) throw std::invalid_argument("GrayImage: fill outside [0, 255]");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) throw std::invalid_argument("GrayImage: dimensions must be >= 1");
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    std::ostringstream msg;
    msg << "GrayImage: expected " << static_cast<std::size_t>(width) * height << " pixels, got "
        << data_.size();
    throw std::invalid_argument(msg.str());
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 255.0)) throw std::invalid_argument("GrayImage: intensity outside [0, 255]");
  }
}

IntegralTable::IntegralTable(int width, int height, std::span<const double> source)
    : width_(width), height_(height) {
  const std::size_t stride = static_cast<std::size_t>(width) + 1;
  table_.assign(stride * (static_cast<std::size_t>(height) + 1), 0.0);
  for (int r = 0; r < height; ++r) {
    double row_sum = 0.0;
    const double* src = source.data() + static_cast<std::size_t>(r) * width;
    const double* above = table_.data() + static_cast<std::size_t>(r) * stride;
    double* out = table_.data() + static_cast<std::size_t>(r + 1) * stride;
    for (int c = 0; c < width; ++c) {
      row_sum += src[c];
      out[c + 1] = above[c + 1] + row_sum;
    }
  }
}

GradientPair compute_gradients(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  GradientPair g;
  g.width = w;
  g.height = h;
  g.gh.resize(static_cast<std::size_t>(w) * h);
  g.gv.resize(static_cast<std::size_t>(w) * h);
  for (int r = 0; r < h; ++r) {
    const int up = std::max(r - 1, 0);
    const int down = std::min(r + 1, h - 1);
    for (int c = 0; c < w; ++c) {
      const int left = std::max(c - 1, 0);
      const int right = std::min(c + 1, w - 1);
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      g.gh[i] = img.at(r, right) - img.at(r, left);
      g.gv[i] = img.at(down, c) - img.at(up, c);
    }
  }
  return g;
}

ChannelStack build_channels(const GrayImage& img, bool keep_maps) {
  const GradientPair g = compute_gradients(img);
  const std::size_t n = g.gh.size();

  ChannelStack stack;
  stack.width_ = img.width();
  stack.height_ = img.height();

  std::array<std::vector<double>, kDescriptorChannels> maps;
  maps[kGh] = g.gh;
  maps[kGv] = g.gv;
  for (int c = kAbsGh; c < kDescriptorChannels; ++c) maps[c].assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    maps[kAbsGh][i] = std::abs(g.gh[i]);
    maps[kAbsGv][i] = std::abs(g.gv[i]);
    maps[kPhi1 + quadrant_code(g.gv[i], g.gh[i]) - 1][i] = 1.0;
  }

  for (int c = 0; c < kDescriptorChannels; ++c) {
    stack.integrals_[c] = IntegralTable(img.width(), img.height(), maps[c]);
  }
  stack.integrals_[kRaw] = IntegralTable(img.width(), img.height(), img.pixels());
  if (keep_maps) stack.maps_ = std::move(maps);
  return stack;
}

double box_sum(const IntegralTable& ii, const Rect& rect) {
  if (!rect_inside(rect, ii.width(), ii.height())) {
    std::ostringstream msg;
    msg << "box_sum: rect (" << rect.x << "," << rect.y << "," << rect.w << "," << rect.h
        << ") outside " << ii.width() << "x" << ii.height() << " table";
    throw std::out_of_range(msg.str());
  }
  return ii.sum(rect.x, rect.y, rect.w, rect.h);
}

}  // namespace rcf
