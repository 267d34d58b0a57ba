#include "rcf/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rcf {

std::vector<ScanLevel> scan_levels(int width, int height, const ScanParams& params) {
  if (!(params.scale_factor > 1.0)) throw std::invalid_argument("scan: scale factor must exceed 1");
  if (!(params.step > 0.0)) throw std::invalid_argument("scan: step must be positive");
  std::vector<ScanLevel> levels;
  const int limit = std::min(width, height);
  for (int j = 0;; ++j) {
    const double f = std::pow(params.scale_factor, j);
    const int side = round_half_up(kWindowSize * f);
    if (side > limit) break;
    levels.push_back({side, std::max(1, round_half_up(params.step * f))});
  }
  return levels;
}

std::size_t scan_window_count(int width, int height, const ScanParams& params) {
  std::size_t total = 0;
  for (const ScanLevel& l : scan_levels(width, height, params)) {
    const std::size_t nx = (width - l.side) / l.stride + 1;
    const std::size_t ny = (height - l.side) / l.stride + 1;
    total += nx * ny;
  }
  return total;
}

std::vector<Detection> scan(const GrayImage& img, const Cascade& cascade, const ScanParams& params) {
  std::vector<Detection> out;
  const std::vector<ScanLevel> levels = scan_levels(img.width(), img.height(), params);
  if (levels.empty()) return out;
  const ChannelStack stack = build_channels(img, false);
  for (const ScanLevel& level : levels) {
    const double scale = static_cast<double>(level.side) / kWindowSize;
    for (int y = 0; y + level.side <= img.height(); y += level.stride) {
      for (int x = 0; x + level.side <= img.width(); x += level.stride) {
        double margin = 0.0;
        if (cascade.accepts(stack, Placement{x, y, scale}, &margin)) {
          out.push_back({static_cast<double>(x), static_cast<double>(y), static_cast<double>(level.side),
                         static_cast<double>(level.side), margin});
        }
      }
    }
  }
  return out;
}

double intersection_over_union(const Detection& a, const Detection& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

struct Group {
  double sx = 0.0, sy = 0.0, sw = 0.0, sh = 0.0;
  double count = 0.0;
  double best = 0.0;
  std::vector<int> members;

  Detection box() const { return {sx / count, sy / count, sw / count, sh / count, best}; }
};

}  // namespace

std::vector<Detection> merge_detections(const std::vector<Detection>& dets, double overlap, std::vector<int>* groups_out) {
  std::vector<Group> groups;
  groups.reserve(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const Detection& d = dets[i];
    groups.push_back({d.x, d.y, d.w, d.h, 1.0, d.score, {static_cast<int>(i)}});
  }

  while (true) {
    const int n = static_cast<int>(groups.size());
    std::vector<Detection> boxes;
    boxes.reserve(n);
    for (const Group& g : groups) boxes.push_back(g.box());
    DisjointSets sets(n);
    bool merged_any = false;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (intersection_over_union(boxes[a], boxes[b]) >= overlap) {
          sets.unite(a, b);
          merged_any = true;
        }
      }
    }
    if (!merged_any) break;

    std::vector<int> slot(n, -1);
    std::vector<Group> next;
    for (int a = 0; a < n; ++a) {
      const int root = sets.find(a);
      if (slot[root] < 0) {
        slot[root] = static_cast<int>(next.size());
        next.push_back({0.0, 0.0, 0.0, 0.0, 0.0, groups[a].best, {}});
      }
      Group& g = next[slot[root]];
      g.sx += groups[a].sx;
      g.sy += groups[a].sy;
      g.sw += groups[a].sw;
      g.sh += groups[a].sh;
      g.count += groups[a].count;
      g.best = std::max(g.best, groups[a].best);
      g.members.insert(g.members.end(), groups[a].members.begin(), groups[a].members.end());
    }
    groups = std::move(next);
  }

  std::vector<Detection> out;
  out.reserve(groups.size());
  if (groups_out) groups_out->assign(dets.size(), -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    out.push_back(groups[g].box());
    if (groups_out) {
      for (int m : groups[g].members) (*groups_out)[m] = static_cast<int>(g);
    }
  }
  return out;
}

bool detection_matches(const Detection& det, const GroundTruthBox& face, const MatchParams& params) {
  const double dx = (det.x + det.w / 2) - (face.x + face.w / 2);
  const double dy = (det.y + det.h / 2) - (face.y + face.h / 2);
  if (std::hypot(dx, dy) > params.center_tolerance * face.w) return false;
  const double ratio = det.w / face.w;
  return ratio <= params.max_size_ratio && ratio >= 1.0 / params.max_size_ratio;
}

MatchReport match_detections(const std::vector<Detection>& merged, const std::vector<GroundTruthBox>& faces,
                             const MatchParams& params) {
  MatchReport report;
  report.per_face_detections.assign(faces.size(), 0);
  std::vector<std::size_t> order(merged.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return merged[a].score > merged[b].score; });

  std::vector<char> claimed(faces.size(), 0);
  for (std::size_t idx : order) {
    const Detection& d = merged[idx];
    int best_free = -1;
    int best_any = -1;
    double free_dist = 0.0, any_dist = 0.0;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!detection_matches(d, faces[f], params)) continue;
      const double dist = std::hypot((d.x + d.w / 2) - (faces[f].x + faces[f].w / 2),
                                     (d.y + d.h / 2) - (faces[f].y + faces[f].h / 2));
      if (best_any < 0 || dist < any_dist) {
        best_any = static_cast<int>(f);
        any_dist = dist;
      }
      if (!claimed[f] && (best_free < 0 || dist < free_dist)) {
        best_free = static_cast<int>(f);
        free_dist = dist;
      }
    }
    if (best_free >= 0) {
      claimed[best_free] = 1;
      ++report.true_positives;
      ++report.per_face_detections[best_free];
    } else {
      ++report.false_positives;
      if (best_any >= 0) ++report.per_face_detections[best_any];
    }
  }
  for (char c : claimed) report.false_negatives += c ? 0 : 1;
  return report;
}

std::map<std::string, std::vector<GroundTruthBox>> parse_ground_truth(std::istream& in) {
  std::map<std::string, std::vector<GroundTruthBox>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string name;
    long long x, y, w, h;
    std::string extra;
    if (!(fields >> name >> x >> y >> w >> h) || (fields >> extra) || w <= 0 || h <= 0) {
      throw std::runtime_error("ground truth line " + std::to_string(line_no) + ": expected 'filename x y w h'");
    }
    out[name].push_back({static_cast<double>(x), static_cast<double>(y), static_cast<double>(w),
                         static_cast<double>(h)});
  }
  return out;
}

}  // namespace rcf
