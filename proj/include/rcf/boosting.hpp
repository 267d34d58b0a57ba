#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rcf/channels.hpp"
#include "rcf/features.hpp"
#include "rcf/weak_learners.hpp"

namespace rcf {

enum class FeatureKind { kRectSingle, kRectJoint, kHaar };

std::string feature_kind_name(FeatureKind kind);
/// Throws std::invalid_argument for unknown names.
FeatureKind feature_kind_from_name(const std::string& name);

/// How a joint learner turns rects into scalar candidates.
enum class JointMode {
  kPerDimension,  // every descriptor dimension of every rect is one candidate
  kPerRect,       // one candidate per rect: its multidimensional stump response
};

// Weak learners with their feature geometry attached.

struct HaarStump {
  HaarFeature feature;
  Stump1D stump;
};

struct DimStump {
  Rect rect;
  int dim = 0;
  Stump1D stump;
};

using JointTerm = std::variant<DimStump, MultiDimStump>;

struct JointLearner {
  std::vector<JointTerm> terms;
  std::vector<int> support;  // candidate column of each term in the training pool
  std::vector<double> beta;  // one per term, intercept last
  double trained_error = 0.0;
};

using WeakLearner = std::variant<HaarStump, MultiDimStump, JointLearner>;

/// Weak learner response in {-1, +1} for the window described by `place`.
int evaluate_weak(const WeakLearner& learner, const ChannelStack& stack, const Placement& place);

struct BoostRound {
  WeakLearner learner;
  double alpha = 0.0;
};

struct StrongClassifier {
  FeatureKind kind = FeatureKind::kRectSingle;
  int joint_k = 0;
  std::vector<BoostRound> rounds;
  double threshold = 0.0;

  double score(const ChannelStack& stack, const Placement& place = {}) const;
  bool accepts(const ChannelStack& stack, const Placement& place = {}) const {
    return score(stack, place) >= threshold;
  }
};

struct StageLog {
  int layer = 0;
  int negatives_requested = 0;
  int negatives_found = 0;
  std::uint64_t bootstrap_attempts = 0;
  int rounds = 0;
  double threshold = 0.0;
  double validation_detection_rate = 0.0;
  double training_false_positive_rate = 0.0;
  bool starved = false;
  std::string note;
};

struct Cascade {
  std::vector<StrongClassifier> stages;
  int window_w = kWindowSize;
  int window_h = kWindowSize;
  std::vector<StageLog> training_log;

  /// Accepted iff every stage accepts. On acceptance `margin` (if given)
  /// receives the sum of stage margins score - threshold.
  bool accepts(const ChannelStack& stack, const Placement& place = {}, double* margin = nullptr) const;
  /// Accepts by stages [0, count).
  bool accepts_prefix(const ChannelStack& stack, std::size_t count, const Placement& place = {}) const;
};

// ---------------------------------------------------------------------------
// AdaBoost

struct BoostConfig {
  FeatureKind kind = FeatureKind::kRectSingle;
  int rounds = 20;
  int joint_k = 2;
  JointMode joint_mode = JointMode::kPerDimension;
  RectPoolParams rect_pool{};
  HaarPoolParams haar_pool{};
  double ridge = kDefaultRidge;
};

inline constexpr double kErrorClamp = 1e-10;

struct RoundTrace {
  double error = 0.0;           // selected weighted error before clamping
  double alpha = 0.0;
  double training_error = 0.0;  // ensemble error at threshold 0, initial weights
  double error_bound = 0.0;     // prod_t 2 sqrt(eps_t (1 - eps_t)), clamped eps
  double weight_sum = 0.0;      // after renormalization
};

struct BoostResult {
  StrongClassifier classifier;
  std::vector<RoundTrace> trace;
  std::string diagnostic;  // set when boosting stopped early
};

/// Discrete AdaBoost over the configured weak-learner kind. Initial weights
/// default to uniform. Rounds whose best weighted error is >= 0.5 stop
/// training with a diagnostic. Throws std::invalid_argument for a single-class
/// sample, T < 1, or when not even one round could be trained.
BoostResult train_adaboost(std::span<const GrayImage> windows, std::span<const int> labels,
                           const BoostConfig& config, std::span<const double> initial_weights = {});

/// Largest theta such that at least ceil(target * P) of the scores are >= theta,
/// i.e. the ceil(target * P)-th largest score. Throws std::invalid_argument for
/// an empty set or target outside (0, 1].
double threshold_for_detection_rate(std::span<const double> positive_scores, double target);

/// Threshold for a strong classifier from its scores on validation positives.
double adjust_threshold(const StrongClassifier& sc, std::span<const GrayImage> validation_positives,
                        double target);

// ---------------------------------------------------------------------------
// Cascade training

struct BootstrapResult {
  std::vector<GrayImage> windows;
  std::uint64_t attempts = 0;
  bool shortfall = false;
};

inline constexpr std::uint64_t kBootstrapAttemptsPerWindow = 1000;

/// Samples random square windows (pyramid sizes, uniform positions) from the
/// negative images, resampled to 24x24, and keeps those the cascade accepts.
/// Gives up after 1000 * n attempts and flags the shortfall.
BootstrapResult bootstrap_negatives(const Cascade& cascade, std::span<const GrayImage> negative_images, int n,
                                    std::uint64_t seed);

struct CascadeConfig {
  BoostConfig boost{};
  double target_detection = 0.995;
  int negatives_per_layer = 0;  // 0: number of training positives
  int max_layers = 10;
  double validation_fraction = 1.0 / 3.0;
  double starvation_fraction = 0.1;
  std::uint64_t seed = 1;
};

/// Thrown when the first layer cannot bootstrap enough negatives.
class CascadeConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Layer-by-layer training with bootstrapped negatives. Stops at max_layers or
/// when fewer than starvation_fraction * negatives_per_layer negatives can be
/// found; the starved layer is logged but not added.
Cascade train_cascade(std::span<const GrayImage> positives, std::span<const GrayImage> negative_images,
                      const CascadeConfig& config);

}  // namespace rcf
