#include "rcf/model_io.hpp"

#include <cfloat>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include <json.hpp>

namespace rcf {

namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& what) { throw ModelError(ModelErrorCode::kSchema, "model schema: " + what); }

double finite(double v, const char* field) {
  if (!std::isfinite(v)) throw ModelError(ModelErrorCode::kNonFinite, std::string("non-finite value in ") + field);
  return v;
}

// Thresholds may be infinite (constant stumps); JSON has no infinity.
double encode_threshold(double t) {
  if (std::isnan(t)) throw ModelError(ModelErrorCode::kNonFinite, "NaN threshold");
  if (std::isinf(t)) return t > 0 ? DBL_MAX : -DBL_MAX;
  return t;
}

double decode_threshold(double t) {
  finite(t, "threshold");
  if (t == DBL_MAX) return std::numeric_limits<double>::infinity();
  if (t == -DBL_MAX) return -std::numeric_limits<double>::infinity();
  return t;
}

json rect_json(const Rect& r) { return json::array({r.x, r.y, r.w, r.h}); }

const json& field(const json& obj, const char* key) {
  if (!obj.is_object()) schema(std::string("expected an object holding '") + key + "'");
  const auto it = obj.find(key);
  if (it == obj.end()) schema(std::string("missing '") + key + "'");
  return *it;
}

double number(const json& v, const char* what) {
  if (!v.is_number()) schema(std::string("'") + what + "' must be a number");
  return finite(v.get<double>(), what);
}

int integer(const json& v, const char* what) {
  if (!v.is_number_integer()) schema(std::string("'") + what + "' must be an integer");
  return v.get<int>();
}

const json& array(const json& v, const char* what, std::size_t size) {
  if (!v.is_array()) schema(std::string("'") + what + "' must be an array");
  if (size != static_cast<std::size_t>(-1) && v.size() != size) schema(std::string("'") + what + "' has the wrong length");
  return v;
}

constexpr std::size_t kAnySize = static_cast<std::size_t>(-1);

Rect read_rect(const json& v) {
  array(v, "rect", 4);
  const Rect r{integer(v[0], "rect"), integer(v[1], "rect"), integer(v[2], "rect"), integer(v[3], "rect")};
  if (r.w < 1 || r.h < 1 || r.x < 0 || r.y < 0 || r.x + r.w > kWindowSize || r.y + r.h > kWindowSize) {
    schema("rect outside the 24x24 window");
  }
  return r;
}

int read_polarity(const json& v) {
  const int p = integer(v, "polarity");
  if (p != 1 && p != -1) schema("polarity must be +1 or -1");
  return p;
}

// Per-term parallel arrays shared by all learner types.
struct TermArrays {
  json rects = json::array();
  json dims = json::array();
  json projections = json::array();
  json thresholds = json::array();
  json polarities = json::array();
  json trained_errors = json::array();

  void add_stump(const Stump1D& s) {
    thresholds.push_back(encode_threshold(s.threshold));
    polarities.push_back(s.polarity);
    trained_errors.push_back(finite(s.trained_error, "trained_error"));
  }
  void add(const DimStump& d) {
    rects.push_back(rect_json(d.rect));
    dims.push_back(d.dim);
    projections.push_back(json::array());
    add_stump(d.stump);
  }
  void add(const MultiDimStump& m) {
    rects.push_back(rect_json(m.rect));
    dims.push_back(-1);
    json p = json::array();
    for (double v : m.projection) p.push_back(finite(v, "projection"));
    p.push_back(finite(m.bias, "bias"));
    projections.push_back(std::move(p));
    add_stump({m.threshold, m.polarity, m.trained_error});
  }
  void into(json& j) const {
    j["rects"] = rects;
    j["dims"] = dims;
    j["projections"] = projections;
    j["thresholds"] = thresholds;
    j["polarities"] = polarities;
    j["trained_errors"] = trained_errors;
  }
};

json learner_json(const WeakLearner& learner) {
  json j;
  if (const auto* h = std::get_if<HaarStump>(&learner)) {
    j["type"] = "haar_stump";
    j["haar_kinds"] = json::array({std::string(haar_kind_name(h->feature.kind))});
    j["rects"] = json::array({rect_json(h->feature.outer)});
    j["thresholds"] = json::array({encode_threshold(h->stump.threshold)});
    j["polarities"] = json::array({h->stump.polarity});
    j["trained_errors"] = json::array({finite(h->stump.trained_error, "trained_error")});
    return j;
  }
  TermArrays t;
  if (const auto* m = std::get_if<MultiDimStump>(&learner)) {
    j["type"] = "multidim_stump";
    t.add(*m);
    t.into(j);
    return j;
  }
  const auto& joint = std::get<JointLearner>(learner);
  j["type"] = "joint";
  for (const JointTerm& term : joint.terms) std::visit([&t](const auto& x) { t.add(x); }, term);
  t.into(j);
  j["support"] = joint.support;
  json beta = json::array();
  for (double b : joint.beta) beta.push_back(finite(b, "beta"));
  j["beta"] = std::move(beta);
  j["trained_error"] = finite(joint.trained_error, "trained_error");
  return j;
}

Stump1D read_stump(const json& j, std::size_t i) {
  Stump1D s;
  s.threshold = decode_threshold(number(j["thresholds"][i], "thresholds"));
  s.polarity = read_polarity(j["polarities"][i]);
  s.trained_error = number(j["trained_errors"][i], "trained_errors");
  return s;
}

JointTerm read_term(const json& j, std::size_t i) {
  const Rect rect = read_rect(j["rects"][i]);
  const int dim = integer(j["dims"][i], "dims");
  const Stump1D s = read_stump(j, i);
  const json& proj = array(j["projections"][i], "projections", kAnySize);
  if (dim == -1) {
    array(proj, "projections", 9);
    MultiDimStump m;
    m.rect = rect;
    for (int d = 0; d < 8; ++d) m.projection[d] = number(proj[d], "projections");
    m.bias = number(proj[8], "projections");
    m.threshold = s.threshold;
    m.polarity = s.polarity;
    m.trained_error = s.trained_error;
    return m;
  }
  if (dim < 0 || dim > 7) schema("dims entries must be -1 or in [0, 7]");
  if (!proj.empty()) schema("projection given for a single-dimension term");
  return DimStump{rect, dim, s};
}

std::size_t term_count(const json& j, bool with_dims) {
  const std::size_t n = array(field(j, "rects"), "rects", kAnySize).size();
  array(field(j, "thresholds"), "thresholds", n);
  array(field(j, "polarities"), "polarities", n);
  array(field(j, "trained_errors"), "trained_errors", n);
  if (with_dims) {
    array(field(j, "dims"), "dims", n);
    array(field(j, "projections"), "projections", n);
  }
  return n;
}

WeakLearner read_learner(const json& j) {
  const json& type = field(j, "type");
  if (!type.is_string()) schema("'type' must be a string");
  const std::string name = type.get<std::string>();
  if (name == "haar_stump") {
    if (term_count(j, false) != 1) schema("haar_stump has exactly one term");
    const json& kinds = array(field(j, "haar_kinds"), "haar_kinds", 1);
    if (!kinds[0].is_string()) schema("haar kind must be a string");
    HaarStump h;
    try {
      h.feature = {haar_kind_from_name(kinds[0].get<std::string>()), read_rect(j["rects"][0])};
      haar_parts(h.feature);
    } catch (const std::invalid_argument& e) {
      schema(e.what());
    }
    h.stump = read_stump(j, 0);
    return h;
  }
  if (name == "multidim_stump") {
    if (term_count(j, true) != 1) schema("multidim_stump has exactly one term");
    JointTerm t = read_term(j, 0);
    if (!std::holds_alternative<MultiDimStump>(t)) schema("multidim_stump needs dims = [-1]");
    return std::get<MultiDimStump>(t);
  }
  if (name == "joint") {
    const std::size_t n = term_count(j, true);
    if (n < 1) schema("joint learner without terms");
    JointLearner joint;
    for (std::size_t i = 0; i < n; ++i) joint.terms.push_back(read_term(j, i));
    const json& support = array(field(j, "support"), "support", n);
    for (const json& s : support) joint.support.push_back(integer(s, "support"));
    const json& beta = array(field(j, "beta"), "beta", n + 1);
    for (const json& b : beta) joint.beta.push_back(number(b, "beta"));
    joint.trained_error = number(field(j, "trained_error"), "trained_error");
    return joint;
  }
  schema("unknown learner type '" + name + "'");
}

json design_decisions() {
  return {
      {"gradient", "central difference [-1, 0, 1], unscaled, replicated border"},
      {"quadrants", "1: gv>=0,gh>=0; 2: gv>=0,gh<0; 3: gv<0,gh>=0; 4: gv<0,gh<0"},
      {"normalization", "per half v / (||v||_2 + 1e-6)"},
      {"haarFourRect", "top-left and bottom-right cells positive"},
      {"scan", "feature rects scaled per level, round half up"},
      {"score", "sum of stage margins"},
  };
}

json stage_log_json(const StageLog& s) {
  return {
      {"layer", s.layer},
      {"negatives_requested", s.negatives_requested},
      {"negatives_found", s.negatives_found},
      {"bootstrap_attempts", s.bootstrap_attempts},
      {"rounds", s.rounds},
      {"threshold", encode_threshold(s.threshold)},
      {"validation_detection_rate", finite(s.validation_detection_rate, "validation_detection_rate")},
      {"training_false_positive_rate", finite(s.training_false_positive_rate, "training_false_positive_rate")},
      {"starved", s.starved},
      {"note", s.note},
  };
}

StageLog read_stage_log(const json& j) {
  StageLog s;
  s.layer = integer(field(j, "layer"), "layer");
  s.negatives_requested = integer(field(j, "negatives_requested"), "negatives_requested");
  s.negatives_found = integer(field(j, "negatives_found"), "negatives_found");
  const json& attempts = field(j, "bootstrap_attempts");
  if (!attempts.is_number_unsigned() && !(attempts.is_number_integer() && attempts.get<long long>() >= 0)) {
    schema("'bootstrap_attempts' must be a non-negative integer");
  }
  s.bootstrap_attempts = attempts.get<std::uint64_t>();
  s.rounds = integer(field(j, "rounds"), "rounds");
  s.threshold = decode_threshold(number(field(j, "threshold"), "threshold"));
  s.validation_detection_rate = number(field(j, "validation_detection_rate"), "validation_detection_rate");
  s.training_false_positive_rate = number(field(j, "training_false_positive_rate"), "training_false_positive_rate");
  const json& starved = field(j, "starved");
  if (!starved.is_boolean()) schema("'starved' must be a boolean");
  s.starved = starved.get<bool>();
  const json& note = field(j, "note");
  if (!note.is_string()) schema("'note' must be a string");
  s.note = note.get<std::string>();
  return s;
}

}  // namespace

std::string serialize_model(const Cascade& cascade) {
  if (cascade.stages.empty()) throw ModelError(ModelErrorCode::kSchema, "model schema: cascade has no stages");
  const StrongClassifier& first = cascade.stages.front();
  json j;
  j["version"] = kModelVersion;
  j["window"] = json::array({cascade.window_w, cascade.window_h});
  j["featureKind"] = feature_kind_name(first.kind);
  j["jointK"] = first.joint_k;
  j["designDecisions"] = design_decisions();
  json stages = json::array();
  for (const StrongClassifier& sc : cascade.stages) {
    if (sc.kind != first.kind || sc.joint_k != first.joint_k) {
      throw ModelError(ModelErrorCode::kSchema, "model schema: stages mix feature kinds");
    }
    json rounds = json::array();
    for (const BoostRound& r : sc.rounds) {
      rounds.push_back({{"alpha", finite(r.alpha, "alpha")}, {"learner", learner_json(r.learner)}});
    }
    stages.push_back({{"threshold", encode_threshold(sc.threshold)}, {"rounds", std::move(rounds)}});
  }
  j["stages"] = std::move(stages);
  json log = json::array();
  for (const StageLog& s : cascade.training_log) log.push_back(stage_log_json(s));
  j["training_log"] = std::move(log);
  return j.dump(2) + "\n";
}

Cascade parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::out_of_range& e) {
    // Number literals beyond the double range.
    throw ModelError(ModelErrorCode::kNonFinite, std::string("model parse error: ") + e.what());
  } catch (const json::exception& e) {
    throw ModelError(ModelErrorCode::kParse, std::string("model parse error: ") + e.what());
  }
  if (!j.is_object()) schema("top level must be an object");
  const json& version = field(j, "version");
  if (!version.is_number_integer() || version.get<long long>() != kModelVersion) {
    throw ModelError(ModelErrorCode::kVersion, "unsupported model version " + version.dump());
  }
  const json& window = array(field(j, "window"), "window", 2);
  Cascade c;
  c.window_w = integer(window[0], "window");
  c.window_h = integer(window[1], "window");
  if (c.window_w != kWindowSize || c.window_h != kWindowSize) schema("window must be [24, 24]");
  const json& kind = field(j, "featureKind");
  if (!kind.is_string()) schema("'featureKind' must be a string");
  FeatureKind fk;
  try {
    fk = feature_kind_from_name(kind.get<std::string>());
  } catch (const std::invalid_argument& e) {
    schema(e.what());
  }
  const int joint_k = integer(field(j, "jointK"), "jointK");
  if (!field(j, "designDecisions").is_object()) schema("'designDecisions' must be an object");

  const json& stages = array(field(j, "stages"), "stages", kAnySize);
  if (stages.empty()) schema("no stages");
  for (const json& st : stages) {
    StrongClassifier sc;
    sc.kind = fk;
    sc.joint_k = joint_k;
    sc.threshold = decode_threshold(number(field(st, "threshold"), "threshold"));
    for (const json& r : array(field(st, "rounds"), "rounds", kAnySize)) {
      BoostRound round;
      round.alpha = number(field(r, "alpha"), "alpha");
      round.learner = read_learner(field(r, "learner"));
      sc.rounds.push_back(std::move(round));
    }
    c.stages.push_back(std::move(sc));
  }
  for (const json& s : array(field(j, "training_log"), "training_log", kAnySize)) {
    c.training_log.push_back(read_stage_log(s));
  }
  return c;
}

void save_model(const Cascade& cascade, const std::filesystem::path& path) {
  const std::string text = serialize_model(cascade);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError(ModelErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw ModelError(ModelErrorCode::kIo, "write failed for " + path.string());
}

Cascade load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError(ModelErrorCode::kIo, "cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_model(text);
}

}  // namespace rcf
