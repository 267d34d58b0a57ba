#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "rcf/boosting.hpp"
#include "rcf/channels.hpp"

namespace rcf {

struct CurvePoint {
  double threshold = 0.0;
  double detection_rate = 0.0;
  int false_positives = 0;
  double false_alarm_rate = 0.0;
};

/// Score of the last stage for windows that pass every earlier stage, -inf
/// for windows rejected before it.
std::vector<double> final_stage_scores(const Cascade& cascade, std::span<const GrayImage> windows);

/// Curve over every distinct finite score in descending order, preceded by a
/// point above the maximum (detection 0, FP 0). A window counts at threshold t
/// when its score is >= t. Throws std::invalid_argument if either set is empty.
std::vector<CurvePoint> curve_from_scores(std::span<const double> positive_scores,
                                          std::span<const double> negative_scores);

struct EvaluationReport {
  std::vector<CurvePoint> curve;
  double test_error = 0.0;        // at the model thresholds
  double detection_rate = 0.0;    // at the model thresholds
  int false_positives = 0;
  double false_alarm_rate = 0.0;
};

/// Labeled test windows (24x24) through the cascade. Throws
/// std::invalid_argument if either set is empty.
EvaluationReport evaluate_curves(const Cascade& cascade, std::span<const GrayImage> positives,
                                 std::span<const GrayImage> negatives);

/// Single strong classifier at its own threshold.
EvaluationReport evaluate_curves(const StrongClassifier& sc, std::span<const GrayImage> positives,
                                 std::span<const GrayImage> negatives);

/// `threshold,detection_rate,false_positives` with 9 significant digits.
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);
/// Parses the format above; false_alarm_rate is left at 0. Throws
/// std::runtime_error on malformed lines.
std::vector<CurvePoint> read_curve_csv(std::istream& in);

}  // namespace rcf
