#include "rcf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rcf {

std::vector<double> final_stage_scores(const Cascade& cascade, std::span<const GrayImage> windows) {
  if (cascade.stages.empty()) throw std::invalid_argument("final_stage_scores: cascade has no stages");
  const std::size_t last = cascade.stages.size() - 1;
  std::vector<double> scores;
  scores.reserve(windows.size());
  for (const GrayImage& w : windows) {
    const ChannelStack stack = build_channels(w, false);
    scores.push_back(cascade.accepts_prefix(stack, last) ? cascade.stages[last].score(stack)
                                                         : -std::numeric_limits<double>::infinity());
  }
  return scores;
}

std::vector<CurvePoint> curve_from_scores(std::span<const double> positive_scores,
                                          std::span<const double> negative_scores) {
  if (positive_scores.empty() || negative_scores.empty()) {
    throw std::invalid_argument("evaluate_curves: empty positive or negative test set");
  }
  std::vector<double> pos(positive_scores.begin(), positive_scores.end());
  std::vector<double> neg(negative_scores.begin(), negative_scores.end());
  std::sort(pos.begin(), pos.end(), std::greater<>());
  std::sort(neg.begin(), neg.end(), std::greater<>());

  std::vector<double> levels;
  for (double s : pos) if (std::isfinite(s)) levels.push_back(s);
  for (double s : neg) if (std::isfinite(s)) levels.push_back(s);
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  std::vector<CurvePoint> curve;
  curve.reserve(levels.size() + 1);
  curve.push_back({levels.empty() ? 1.0 : levels.front() + 1.0, 0.0, 0, 0.0});
  std::size_t ip = 0, in = 0;
  for (double t : levels) {
    while (ip < pos.size() && pos[ip] >= t) ++ip;
    while (in < neg.size() && neg[in] >= t) ++in;
    curve.push_back({t, ip / np, static_cast<int>(in), in / nn});
  }
  return curve;
}

EvaluationReport evaluate_curves(const Cascade& cascade, std::span<const GrayImage> positives,
                                 std::span<const GrayImage> negatives) {
  if (positives.empty() || negatives.empty()) {
    throw std::invalid_argument("evaluate_curves: empty positive or negative test set");
  }
  const std::vector<double> ps = final_stage_scores(cascade, positives);
  const std::vector<double> ns = final_stage_scores(cascade, negatives);
  EvaluationReport report;
  report.curve = curve_from_scores(ps, ns);
  const double theta = cascade.stages.back().threshold;
  const auto hits = [theta](const std::vector<double>& s) {
    return static_cast<int>(std::count_if(s.begin(), s.end(), [theta](double v) { return v >= theta; }));
  };
  const int tp = hits(ps);
  const int fp = hits(ns);
  const double total = static_cast<double>(ps.size() + ns.size());
  report.detection_rate = tp / static_cast<double>(ps.size());
  report.false_positives = fp;
  report.false_alarm_rate = fp / static_cast<double>(ns.size());
  report.test_error = ((static_cast<double>(ps.size()) - tp) + fp) / total;
  return report;
}

EvaluationReport evaluate_curves(const StrongClassifier& sc, std::span<const GrayImage> positives,
                                 std::span<const GrayImage> negatives) {
  Cascade c;
  c.stages.push_back(sc);
  return evaluate_curves(c, positives, negatives);
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "threshold,detection_rate,false_positives\n";
  char buf[96];
  for (const CurvePoint& p : curve) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%d\n", p.threshold, p.detection_rate, p.false_positives);
    out << buf;
  }
}

std::vector<CurvePoint> read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "threshold,detection_rate,false_positives") {
    throw std::runtime_error("curve csv: missing header");
  }
  std::vector<CurvePoint> curve;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    CurvePoint p;
    char c1 = 0, c2 = 0;
    if (!(ss >> p.threshold >> c1 >> p.detection_rate >> c2 >> p.false_positives) || c1 != ',' || c2 != ',') {
      throw std::runtime_error("curve csv: malformed line " + std::to_string(lineno));
    }
    curve.push_back(p);
  }
  return curve;
}

}  // namespace rcf
