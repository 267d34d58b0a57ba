#include "rcf/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "rcf/imaging.hpp"

namespace rcf {

std::string feature_kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kRectSingle: return "rect";
    case FeatureKind::kRectJoint: return "rect_joint";
    case FeatureKind::kHaar: return "haar";
  }
  throw std::invalid_argument("unknown feature kind");
}

FeatureKind feature_kind_from_name(const std::string& name) {
  if (name == "rect") return FeatureKind::kRectSingle;
  if (name == "rect_joint") return FeatureKind::kRectJoint;
  if (name == "haar") return FeatureKind::kHaar;
  throw std::invalid_argument("unknown feature kind '" + name + "'");
}

namespace {

Descriptor8 placed_descriptor(const ChannelStack& stack, const Rect& rect, const Placement& place) {
  return block_descriptor(stack, place.map(rect)).flat();
}

int evaluate_term(const JointTerm& term, const ChannelStack& stack, const Placement& place) {
  if (const auto* d = std::get_if<DimStump>(&term)) {
    return d->stump.predict(descriptor_component(stack, place.map(d->rect), d->dim));
  }
  const auto& md = std::get<MultiDimStump>(term);
  return md.predict(placed_descriptor(stack, md.rect, place));
}

}  // namespace

int evaluate_weak(const WeakLearner& learner, const ChannelStack& stack, const Placement& place) {
  if (const auto* h = std::get_if<HaarStump>(&learner)) {
    return h->stump.predict(haar_value_placed(stack.integral(kRaw), h->feature, place));
  }
  if (const auto* md = std::get_if<MultiDimStump>(&learner)) {
    return md->predict(placed_descriptor(stack, md->rect, place));
  }
  const auto& joint = std::get<JointLearner>(learner);
  double f = joint.beta.back();
  for (std::size_t j = 0; j < joint.terms.size(); ++j) f += joint.beta[j] * evaluate_term(joint.terms[j], stack, place);
  return f >= 0.0 ? 1 : -1;
}

double StrongClassifier::score(const ChannelStack& stack, const Placement& place) const {
  double s = 0.0;
  for (const BoostRound& r : rounds) s += r.alpha * evaluate_weak(r.learner, stack, place);
  return s;
}

bool Cascade::accepts(const ChannelStack& stack, const Placement& place, double* margin) const {
  double total = 0.0;
  for (const StrongClassifier& stage : stages) {
    const double s = stage.score(stack, place);
    if (s < stage.threshold) return false;
    total += s - stage.threshold;
  }
  if (margin) *margin = total;
  return true;
}

bool Cascade::accepts_prefix(const ChannelStack& stack, std::size_t count, const Placement& place) const {
  for (std::size_t i = 0; i < std::min(count, stages.size()); ++i) {
    if (!stages[i].accepts(stack, place)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

struct FeatureBank {
  std::vector<Rect> rects;
  std::vector<HaarFeature> haars;
  ColumnMatrix<double> rect_values;  // column r * 8 + d
  ScalarColumns sorted;              // presorted scalar columns (Haar or joint per-dimension)
};

FeatureBank build_bank(std::span<const GrayImage> windows, const BoostConfig& cfg) {
  FeatureBank bank;
  const int n = static_cast<int>(windows.size());
  if (cfg.kind == FeatureKind::kHaar) {
    bank.haars = enumerate_haar_pool(cfg.haar_pool);
    if (bank.haars.empty()) throw std::invalid_argument("train_adaboost: empty Haar pool");
    ColumnMatrix<double> values(n, static_cast<int>(bank.haars.size()));
    for (int i = 0; i < n; ++i) {
      const ChannelStack stack = build_channels(windows[i], false);
      const IntegralTable& raw = stack.integral(kRaw);
      for (std::size_t f = 0; f < bank.haars.size(); ++f) values(i, static_cast<int>(f)) = haar_value(raw, bank.haars[f]);
    }
    bank.sorted = ScalarColumns::build(std::move(values));
    return bank;
  }

  bank.rects = enumerate_rect_pool(cfg.rect_pool);
  if (bank.rects.empty()) throw std::invalid_argument("train_adaboost: empty rect pool");
  ColumnMatrix<double> values(n, static_cast<int>(bank.rects.size()) * 8);
  for (int i = 0; i < n; ++i) {
    const ChannelStack stack = build_channels(windows[i], false);
    for (std::size_t r = 0; r < bank.rects.size(); ++r) {
      const BlockDescriptor d = block_descriptor(stack, bank.rects[r]);
      for (int k = 0; k < 8; ++k) values(i, static_cast<int>(r) * 8 + k) = d[k];
    }
  }
  if (cfg.kind == FeatureKind::kRectJoint && cfg.joint_mode == JointMode::kPerDimension) {
    bank.sorted = ScalarColumns::build(std::move(values));
  } else {
    bank.rect_values = std::move(values);
  }
  return bank;
}

const ColumnMatrix<double>& rect_matrix(const FeatureBank& bank) {
  return bank.rect_values.cols() > 0 ? bank.rect_values : bank.sorted.values;
}

std::array<std::span<const double>, 8> rect_dims(const FeatureBank& bank, int r) {
  const ColumnMatrix<double>& m = rect_matrix(bank);
  std::array<std::span<const double>, 8> dims;
  for (int d = 0; d < 8; ++d) dims[d] = m.column(r * 8 + d);
  return dims;
}

int predict_multidim(const MultiDimStump& st, const std::array<std::span<const double>, 8>& dims, int i) {
  Descriptor8 d;
  for (int k = 0; k < 8; ++k) d[k] = dims[k][i];
  return st.predict(d);
}

struct Selection {
  WeakLearner learner;
  double error = 1.0;
  std::vector<int> responses;
};

Selection select_haar(const FeatureBank& bank, std::span<const int> labels, std::span<const double> w) {
  const ScalarColumns& cols = bank.sorted;
  int best = -1;
  Stump1D best_stump;
  best_stump.trained_error = 2.0;
  for (int c = 0; c < cols.cols(); ++c) {
    const Stump1D s = fit_stump_sorted(cols.values.column(c), cols.order.column(c), labels, w);
    if (s.trained_error < best_stump.trained_error) {
      best_stump = s;
      best = c;
    }
  }
  Selection sel;
  sel.error = best_stump.trained_error;
  sel.learner = HaarStump{bank.haars[best], best_stump};
  const auto values = cols.values.column(best);
  sel.responses.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) sel.responses[i] = best_stump.predict(values[i]);
  return sel;
}

Selection select_rect_single(const FeatureBank& bank, std::span<const int> labels, std::span<const double> w,
                             double ridge) {
  int best = -1;
  MultiDimStump best_stump;
  best_stump.trained_error = 2.0;
  for (int r = 0; r < static_cast<int>(bank.rects.size()); ++r) {
    const MultiDimStump s = train_multidim_stump(rect_dims(bank, r), labels, w, bank.rects[r], ridge);
    if (s.trained_error < best_stump.trained_error) {
      best_stump = s;
      best = r;
    }
  }
  Selection sel;
  sel.error = best_stump.trained_error;
  const auto dims = rect_dims(bank, best);
  sel.responses.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) sel.responses[i] = predict_multidim(best_stump, dims, static_cast<int>(i));
  sel.learner = best_stump;
  return sel;
}

std::vector<int> joint_responses(const JointFit& fit, const ColumnMatrix<std::int8_t>& Z) {
  const int n = Z.rows();
  std::vector<int> out(n);
  std::vector<int> z(fit.support.size());
  for (int i = 0; i < n; ++i) {
    for (std::size_t s = 0; s < fit.support.size(); ++s) z[s] = Z(i, fit.support[s]);
    out[i] = joint_predict(fit.beta, z);
  }
  return out;
}

Selection select_joint(const FeatureBank& bank, std::span<const int> labels, std::span<const double> w,
                       const BoostConfig& cfg) {
  Selection sel;
  JointLearner joint;
  if (cfg.joint_mode == JointMode::kPerDimension) {
    const JointPoolFit pf = train_joint_learner(bank.sorted, labels, w, cfg.joint_k, cfg.ridge);
    ColumnMatrix<std::int8_t> Z(static_cast<int>(labels.size()), bank.sorted.cols());
    for (std::size_t s = 0; s < pf.fit.support.size(); ++s) {
      const int c = pf.fit.support[s];
      joint.terms.push_back(DimStump{bank.rects[c / 8], c % 8, pf.stumps[s]});
      stump_responses(pf.stumps[s], bank.sorted.values.column(c), Z.column(c));
    }
    joint.support = pf.fit.support;
    joint.beta = pf.fit.beta;
    joint.trained_error = pf.fit.trained_error;
    sel.error = pf.fit.degenerate ? std::max(0.5, pf.fit.trained_error) : pf.fit.trained_error;
    sel.responses = joint_responses(pf.fit, Z);
  } else {
    const int n = static_cast<int>(labels.size());
    const int m = static_cast<int>(bank.rects.size());
    std::vector<MultiDimStump> stumps(m);
    ColumnMatrix<std::int8_t> Z(n, m);
    for (int r = 0; r < m; ++r) {
      const auto dims = rect_dims(bank, r);
      stumps[r] = train_multidim_stump(dims, labels, w, bank.rects[r], cfg.ridge);
      auto col = Z.column(r);
      for (int i = 0; i < n; ++i) col[i] = static_cast<std::int8_t>(predict_multidim(stumps[r], dims, i));
    }
    const JointFit fit = fit_joint_responses(Z, labels, w, cfg.joint_k, cfg.ridge);
    for (int r : fit.support) joint.terms.push_back(stumps[r]);
    joint.support = fit.support;
    joint.beta = fit.beta;
    joint.trained_error = fit.trained_error;
    sel.error = fit.degenerate ? std::max(0.5, fit.trained_error) : fit.trained_error;
    sel.responses = joint_responses(fit, Z);
  }
  sel.learner = std::move(joint);
  return sel;
}

}  // namespace

BoostResult train_adaboost(std::span<const GrayImage> windows, std::span<const int> labels,
                           const BoostConfig& config, std::span<const double> initial_weights) {
  const std::size_t n = windows.size();
  if (labels.size() != n) throw std::invalid_argument("train_adaboost: windows and labels differ in length");
  if (config.rounds < 1) throw std::invalid_argument("train_adaboost: need at least one round");
  if (config.kind == FeatureKind::kRectJoint && config.joint_k < 1) {
    throw std::invalid_argument("train_adaboost: joint learners need k >= 1");
  }
  bool has_pos = false, has_neg = false;
  for (int y : labels) {
    if (y == 1) has_pos = true;
    else if (y == -1) has_neg = true;
    else throw std::invalid_argument("train_adaboost: label not in {-1, +1}");
  }
  if (!has_pos || !has_neg) throw std::invalid_argument("train_adaboost: both classes must be present");
  const int pool_w = config.kind == FeatureKind::kHaar ? config.haar_pool.window_w : config.rect_pool.window_w;
  const int pool_h = config.kind == FeatureKind::kHaar ? config.haar_pool.window_h : config.rect_pool.window_h;
  for (const GrayImage& img : windows) {
    if (img.width() != pool_w || img.height() != pool_h) {
      throw std::invalid_argument("train_adaboost: window size does not match the feature pool");
    }
  }

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  if (!initial_weights.empty()) {
    if (initial_weights.size() != n) throw std::invalid_argument("train_adaboost: weights differ in length");
    const double total = std::accumulate(initial_weights.begin(), initial_weights.end(), 0.0);
    if (!(total > 0.0)) throw std::invalid_argument("train_adaboost: weights must have positive mass");
    for (std::size_t i = 0; i < n; ++i) w[i] = initial_weights[i] / total;
  }
  const std::vector<double> w0 = w;

  const FeatureBank bank = build_bank(windows, config);

  BoostResult result;
  result.classifier.kind = config.kind;
  result.classifier.joint_k = config.kind == FeatureKind::kRectJoint ? config.joint_k : 0;
  std::vector<double> ensemble(n, 0.0);
  double bound = 1.0;

  for (int t = 0; t < config.rounds; ++t) {
    Selection sel;
    switch (config.kind) {
      case FeatureKind::kHaar: sel = select_haar(bank, labels, w); break;
      case FeatureKind::kRectSingle: sel = select_rect_single(bank, labels, w, config.ridge); break;
      case FeatureKind::kRectJoint: sel = select_joint(bank, labels, w, config); break;
    }
    if (sel.error >= 0.5) {
      std::ostringstream msg;
      msg << "round " << t << ": best weighted error " << sel.error << " >= 0.5, boosting stopped";
      result.diagnostic = msg.str();
      break;
    }

    const double eps = std::clamp(sel.error, kErrorClamp, 1.0 - kErrorClamp);
    const double alpha = 0.5 * std::log((1.0 - eps) / eps);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::exp(-alpha * labels[i] * sel.responses[i]);
      total += w[i];
    }
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] /= total;
      weight_sum += w[i];
    }

    double train_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ensemble[i] += alpha * sel.responses[i];
      const int pred = ensemble[i] >= 0.0 ? 1 : -1;
      if (pred != labels[i]) train_err += w0[i];
    }
    bound *= 2.0 * std::sqrt(eps * (1.0 - eps));

    result.trace.push_back({sel.error, alpha, train_err, bound, weight_sum});
    result.classifier.rounds.push_back({std::move(sel.learner), alpha});
  }

  if (result.classifier.rounds.empty()) {
    throw std::runtime_error("train_adaboost: no weak learner better than chance (" + result.diagnostic + ")");
  }
  return result;
}

double threshold_for_detection_rate(std::span<const double> positive_scores, double target) {
  if (positive_scores.empty()) throw std::invalid_argument("adjust_threshold: empty validation set");
  if (!(target > 0.0 && target <= 1.0)) throw std::invalid_argument("adjust_threshold: target outside (0, 1]");
  std::vector<double> sorted(positive_scores.begin(), positive_scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double p = static_cast<double>(sorted.size());
  std::size_t need = static_cast<std::size_t>(std::ceil(target * p - 1e-9));
  need = std::clamp<std::size_t>(need, 1, sorted.size());
  return sorted[need - 1];
}

double adjust_threshold(const StrongClassifier& sc, std::span<const GrayImage> validation_positives, double target) {
  std::vector<double> scores;
  scores.reserve(validation_positives.size());
  for (const GrayImage& img : validation_positives) scores.push_back(sc.score(build_channels(img, false)));
  return threshold_for_detection_rate(scores, target);
}

// ---------------------------------------------------------------------------

BootstrapResult bootstrap_negatives(const Cascade& cascade, std::span<const GrayImage> negative_images, int n,
                                    std::uint64_t seed) {
  BootstrapResult out;
  if (n <= 0) return out;

  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < negative_images.size(); ++i) {
    if (std::min(negative_images[i].width(), negative_images[i].height()) >= kWindowSize) usable.push_back(i);
  }
  if (usable.empty()) {
    out.shortfall = true;
    return out;
  }

  std::mt19937_64 rng(seed);
  const std::uint64_t max_attempts = kBootstrapAttemptsPerWindow * static_cast<std::uint64_t>(n);
  std::uniform_int_distribution<std::size_t> pick_image(0, usable.size() - 1);
  while (static_cast<int>(out.windows.size()) < n && out.attempts < max_attempts) {
    ++out.attempts;
    const GrayImage& img = negative_images[usable[pick_image(rng)]];
    const int limit = std::min(img.width(), img.height());
    int levels = 0;
    while (round_half_up(kWindowSize * std::pow(1.2, levels)) <= limit) ++levels;
    const int level = std::uniform_int_distribution<int>(0, levels - 1)(rng);
    const int side = round_half_up(kWindowSize * std::pow(1.2, level));
    const int x = std::uniform_int_distribution<int>(0, img.width() - side)(rng);
    const int y = std::uniform_int_distribution<int>(0, img.height() - side)(rng);
    GrayImage window = crop_resized(img, {x, y, side, side}, kWindowSize);
    if (cascade.stages.empty() || cascade.accepts(build_channels(window, false))) {
      out.windows.push_back(std::move(window));
    }
  }
  out.shortfall = static_cast<int>(out.windows.size()) < n;
  return out;
}

Cascade train_cascade(std::span<const GrayImage> positives, std::span<const GrayImage> negative_images,
                      const CascadeConfig& config) {
  if (positives.size() < 2) throw std::invalid_argument("train_cascade: need at least two positives");
  if (negative_images.empty()) throw std::invalid_argument("train_cascade: empty negative pool");
  if (config.max_layers < 1) throw std::invalid_argument("train_cascade: max_layers must be >= 1");
  for (const GrayImage& p : positives) {
    if (p.width() != kWindowSize || p.height() != kWindowSize) {
      throw std::invalid_argument("train_cascade: positives must be 24x24");
    }
  }

  std::vector<std::size_t> idx(positives.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 split_rng(derive_seed(config.seed, 0));
  std::shuffle(idx.begin(), idx.end(), split_rng);
  const std::size_t n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(positives.size() * config.validation_fraction)), 1, positives.size() - 1);
  std::vector<GrayImage> validation;
  std::vector<GrayImage> train_pos;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    (i < n_val ? validation : train_pos).push_back(positives[idx[i]]);
  }
  const int per_layer = config.negatives_per_layer > 0 ? config.negatives_per_layer : static_cast<int>(train_pos.size());

  Cascade cascade;
  for (int layer = 0; layer < config.max_layers; ++layer) {
    StageLog log;
    log.layer = layer;
    log.negatives_requested = per_layer;
    BootstrapResult boot = bootstrap_negatives(cascade, negative_images, per_layer, derive_seed(config.seed, layer + 1));
    log.negatives_found = static_cast<int>(boot.windows.size());
    log.bootstrap_attempts = boot.attempts;
    if (log.negatives_found < config.starvation_fraction * per_layer || log.negatives_found == 0) {
      if (layer == 0) {
        throw CascadeConfigError("train_cascade: could not bootstrap negatives for the first layer");
      }
      log.starved = true;
      log.note = "not enough negatives to bootstrap; training stopped";
      cascade.training_log.push_back(log);
      break;
    }

    std::vector<GrayImage> samples = train_pos;
    std::vector<int> labels(train_pos.size(), 1);
    for (GrayImage& g : boot.windows) {
      samples.push_back(std::move(g));
      labels.push_back(-1);
    }
    BoostResult boosted = train_adaboost(samples, labels, config.boost);
    StrongClassifier stage = std::move(boosted.classifier);

    std::vector<double> val_scores;
    for (const GrayImage& v : validation) {
      const ChannelStack stack = build_channels(v, false);
      if (cascade.accepts(stack)) val_scores.push_back(stage.score(stack));
    }
    if (val_scores.empty()) {
      log.note = "no validation positives survive earlier stages; training stopped";
      log.starved = true;
      cascade.training_log.push_back(log);
      break;
    }
    stage.threshold = threshold_for_detection_rate(val_scores, config.target_detection);

    std::size_t val_pass = 0;
    for (double s : val_scores) val_pass += s >= stage.threshold;
    std::size_t fp = 0;
    for (std::size_t i = train_pos.size(); i < samples.size(); ++i) {
      fp += stage.accepts(build_channels(samples[i], false));
    }
    log.rounds = static_cast<int>(stage.rounds.size());
    log.threshold = stage.threshold;
    log.validation_detection_rate = static_cast<double>(val_pass) / val_scores.size();
    log.training_false_positive_rate = static_cast<double>(fp) / boot.windows.size();
    if (!boosted.diagnostic.empty()) log.note = boosted.diagnostic;
    cascade.stages.push_back(std::move(stage));
    cascade.training_log.push_back(log);
  }
  return cascade;
}

}  // namespace rcf
