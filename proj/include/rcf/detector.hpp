#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "rcf/boosting.hpp"
#include "rcf/channels.hpp"

namespace rcf {

/// Square detection box in original-image pixels.
struct Detection {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  double score = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct ScanParams {
  double scale_factor = 1.2;
  double step = 1.0;
};

/// One pyramid level: window side and stride in pixels.
struct ScanLevel {
  int side = 0;
  int stride = 1;
};

/// Levels j = 0, 1, ...: side = round(24 * f^j) while side <= min(W, H),
/// stride = max(1, round(step * f^j)).
std::vector<ScanLevel> scan_levels(int width, int height, const ScanParams& params = {});

/// Number of windows the scan visits.
std::size_t scan_window_count(int width, int height, const ScanParams& params = {});

/// Sliding-window scan over all pyramid levels. Feature rects are scaled to
/// each level; channels are built once. Accepted windows are returned in
/// (level, y, x) order with the sum of stage margins as score.
std::vector<Detection> scan(const GrayImage& img, const Cascade& cascade, const ScanParams& params = {});

double intersection_over_union(const Detection& a, const Detection& b);

inline constexpr double kMergeOverlap = 0.3;

/// Groups detections by the transitive closure of IoU >= overlap; each group
/// becomes one box with averaged corners and the maximum score. Grouping is
/// repeated on the merged boxes until no two outputs overlap, which makes the
/// operation idempotent. `groups`, if given, receives the group index of every
/// input detection.
std::vector<Detection> merge_detections(const std::vector<Detection>& dets, double overlap = kMergeOverlap,
                                        std::vector<int>* groups = nullptr);

struct GroundTruthBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

struct MatchReport {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  std::vector<int> per_face_detections;
};

struct MatchParams {
  double center_tolerance = 0.25;  // fraction of the face width
  double max_size_ratio = 1.5;
};

bool detection_matches(const Detection& det, const GroundTruthBox& face, const MatchParams& params = {});

/// Detections are visited by descending score. Each claims the nearest
/// unclaimed face it matches (TP); matching only claimed faces counts as a
/// repeated detection (FP); matching nothing is an FP. Unclaimed faces are FNs.
MatchReport match_detections(const std::vector<Detection>& merged, const std::vector<GroundTruthBox>& faces,
                             const MatchParams& params = {});

/// Ground truth lines `filename x y w h`; blank lines and '#' comments are
/// skipped. Throws std::runtime_error with the line number on malformed input.
std::map<std::string, std::vector<GroundTruthBox>> parse_ground_truth(std::istream& in);

}  // namespace rcf
