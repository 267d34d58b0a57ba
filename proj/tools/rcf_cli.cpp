// Command-line front end: train, detect, eval, augment, bench, synth.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rcf/augment.hpp"
#include "rcf/boosting.hpp"
#include "rcf/channels.hpp"
#include "rcf/detector.hpp"
#include "rcf/evaluation.hpp"
#include "rcf/features.hpp"
#include "rcf/imaging.hpp"
#include "rcf/model_io.hpp"
#include "rcf/pgm.hpp"
#include "rcf/synth.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<rcf::GrayImage> load_dir(const std::string& dir, bool windows_only) {
  std::vector<rcf::GrayImage> out;
  for (const fs::path& p : rcf::list_pgm_files(dir)) {
    rcf::GrayImage img = rcf::load_pgm(p);
    if (windows_only && (img.width() != rcf::kWindowSize || img.height() != rcf::kWindowSize)) {
      throw std::runtime_error(p.string() + ": expected a 24x24 patch");
    }
    out.push_back(std::move(img));
  }
  if (out.empty()) throw std::runtime_error("no .pgm files in " + dir);
  return out;
}

struct TrainArgs {
  std::string pos, neg, out, features = "rect", joint_mode = "per-dimension";
  std::optional<std::uint64_t> synth;
  int joint = 1, rounds = 20, layers = 5, synth_count = 2000, neg_per_layer = 0;
  double target_d = 0.995;
  std::uint64_t seed = 1;
};

int run_train(const TrainArgs& a) {
  std::vector<rcf::GrayImage> positives, negatives;
  if (a.synth) {
    positives = rcf::synth_corpus(*a.synth, a.synth_count, 1).positives;
    negatives = rcf::synth_bootstrap_images(*a.synth, a.synth_count, 20, 128);
  } else {
    if (a.pos.empty() || a.neg.empty()) throw CLI::ValidationError("train", "--pos and --neg, or --synth, are required");
    positives = load_dir(a.pos, true);
    negatives = load_dir(a.neg, false);
  }
  rcf::CascadeConfig cfg;
  cfg.boost.rounds = a.rounds;
  if (a.features == "haar") {
    cfg.boost.kind = rcf::FeatureKind::kHaar;
  } else {
    cfg.boost.kind = a.joint >= 2 ? rcf::FeatureKind::kRectJoint : rcf::FeatureKind::kRectSingle;
    cfg.boost.joint_k = a.joint;
    cfg.boost.joint_mode = a.joint_mode == "per-rect" ? rcf::JointMode::kPerRect : rcf::JointMode::kPerDimension;
  }
  cfg.max_layers = a.layers;
  cfg.target_detection = a.target_d;
  cfg.negatives_per_layer = a.neg_per_layer;
  cfg.seed = a.seed;

  const auto t0 = std::chrono::steady_clock::now();
  const rcf::Cascade cascade = rcf::train_cascade(positives, negatives, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const rcf::StageLog& s : cascade.training_log) {
    std::printf("layer %d: negatives %d/%d, rounds %d, threshold %.6g, val D %.4f, train FP %.4f%s%s\n", s.layer,
                s.negatives_found, s.negatives_requested, s.rounds, s.threshold, s.validation_detection_rate,
                s.training_false_positive_rate, s.note.empty() ? "" : ", ", s.note.c_str());
  }
  rcf::save_model(cascade, a.out);
  std::printf("%zu stages written to %s (%.1f s)\n", cascade.stages.size(), a.out.c_str(), secs);
  return 0;
}

int run_detect(const std::string& model, const std::string& image, double scale, double step, const std::string& out) {
  const rcf::Cascade cascade = rcf::load_model(model);
  const rcf::GrayImage img = rcf::load_pgm(image);
  const std::vector<rcf::Detection> raw = rcf::scan(img, cascade, {scale, step});
  const std::vector<rcf::Detection> merged = rcf::merge_detections(raw);
  std::FILE* f = out.empty() ? stdout : std::fopen(out.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write " + out);
  for (const rcf::Detection& d : merged) std::fprintf(f, "%.9g %.9g %.9g %.9g %.9g\n", d.x, d.y, d.w, d.h, d.score);
  if (f != stdout) std::fclose(f);
  std::fprintf(stderr, "%zu raw windows, %zu detections\n", raw.size(), merged.size());
  return 0;
}

int run_eval(const std::string& model, const std::string& pos, const std::string& neg, const std::string& roc) {
  const rcf::Cascade cascade = rcf::load_model(model);
  const rcf::EvaluationReport r = rcf::evaluate_curves(cascade, load_dir(pos, true), load_dir(neg, true));
  if (!roc.empty()) {
    std::ofstream out(roc);
    if (!out) throw std::runtime_error("cannot write " + roc);
    rcf::write_curve_csv(out, r.curve);
  }
  std::printf("test error %.6f, detection rate %.6f, false positives %d (rate %.6f)\n", r.test_error,
              r.detection_rate, r.false_positives, r.false_alarm_rate);
  return 0;
}

int run_augment(const std::string& in, const std::string& out, const std::string& flags, std::uint64_t seed) {
  const rcf::AugmentFlags f = rcf::parse_augment_flags(flags);
  const std::vector<fs::path> files = rcf::list_pgm_files(in);
  fs::create_directories(out);
  for (std::size_t i = 0; i < files.size(); ++i) {
    const rcf::GrayImage img = rcf::load_pgm(files[i]);
    rcf::save_pgm(rcf::augment_patch(img, f, rcf::derive_seed(seed, i)), fs::path(out) / files[i].filename());
  }
  std::printf("%zu patches augmented with flags '%s'\n", files.size(), rcf::augment_flags_string(f).c_str());
  return 0;
}

int run_bench(const std::string& image, const std::string& model) {
  const rcf::Cascade cascade = rcf::load_model(model);
  const rcf::GrayImage img = rcf::load_pgm(image);
  using clock = std::chrono::steady_clock;
  const int reps = 10;
  const auto t0 = clock::now();
  for (int i = 0; i < reps; ++i) {
    const rcf::ChannelStack stack = rcf::build_channels(img, false);
    (void)stack;
  }
  const double build_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count() / reps;
  const auto t1 = clock::now();
  const std::vector<rcf::Detection> raw = rcf::scan(img, cascade);
  const double scan_s = std::chrono::duration<double>(clock::now() - t1).count();
  const std::size_t windows = rcf::scan_window_count(img.width(), img.height());
  std::printf("channel build: %.3f ms\n", build_ms);
  std::printf("scan: %zu windows in %.3f s (%.0f windows/sec), %zu accepted\n", windows, scan_s,
              scan_s > 0 ? windows / scan_s : 0.0, raw.size());
  return 0;
}

int run_synth(std::uint64_t seed, int count, int scene_side, const std::string& out) {
  const fs::path root(out);
  fs::create_directories(root / "pos");
  fs::create_directories(root / "neg");
  const rcf::TrainingSet set = rcf::synth_corpus(seed, count, count);
  char name[32];
  for (int i = 0; i < count; ++i) {
    std::snprintf(name, sizeof name, "%05d.pgm", i);
    rcf::save_pgm(set.positives[i], root / "pos" / name);
    rcf::save_pgm(set.negatives[i], root / "neg" / name);
  }
  rcf::GrayImage scene = rcf::synth_scene(rcf::derive_seed(seed, 7), scene_side, scene_side);
  std::ofstream truth(root / "truth.txt");
  const double scales[] = {1.0, 1.2, 1.44};
  for (int k = 0; k < 3; ++k) {
    const int side = rcf::round_half_up(rcf::kWindowSize * scales[k]);
    const int x = std::min(scene_side - side, 10 + k * (scene_side / 3));
    const int y = std::min(scene_side - side, 10 + ((k * 7) % 3) * (scene_side / 4));
    const rcf::GroundTruthBox b = rcf::plant_target(scene, x, y, scales[k], rcf::derive_seed(seed, 100 + k));
    truth << "scene.pgm " << b.x << ' ' << b.y << ' ' << b.w << ' ' << b.h << '\n';
  }
  rcf::save_pgm(scene, root / "scene.pgm");
  std::printf("%d positives, %d negatives and a %dx%d scene written to %s\n", count, count, scene_side, scene_side,
              out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rectangle-feature cascade detector"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a cascade");
  train->add_option("--pos", ta.pos, "directory of 24x24 positive .pgm patches");
  auto* neg_opt = train->add_option("--neg", ta.neg, "directory of negative .pgm images");
  auto* synth_opt = train->add_option("--synth", ta.synth, "use the synthetic corpus with this seed");
  neg_opt->excludes(synth_opt);
  train->add_option("--features", ta.features, "rect or haar")->check(CLI::IsMember({"rect", "haar"}));
  train->add_option("--joint", ta.joint, "rect features per joint learner (1 = single)")->check(CLI::Range(1, 16));
  train->add_option("--joint-mode", ta.joint_mode, "joint candidates")->check(CLI::IsMember({"per-dimension", "per-rect"}));
  train->add_option("--rounds", ta.rounds, "boosting rounds per layer")->check(CLI::PositiveNumber);
  train->add_option("--layers", ta.layers, "maximum cascade layers")->check(CLI::PositiveNumber);
  train->add_option("--target-d", ta.target_d, "per-layer detection target")->check(CLI::Range(0.0, 1.0));
  train->add_option("--neg-per-layer", ta.neg_per_layer, "bootstrapped negatives per layer (0 = #positives)");
  train->add_option("--synth-count", ta.synth_count, "synthetic positives and negative patches")->check(CLI::PositiveNumber);
  train->add_option("--seed", ta.seed, "training seed");
  train->add_option("--out", ta.out, "output model")->required();

  std::string model, image, out, pos, neg, roc, in_dir, flags;
  double scale = 1.2, step = 1.0;
  std::uint64_t seed = 1;
  auto* detect = app.add_subcommand("detect", "scan an image");
  detect->add_option("--model", model)->required();
  detect->add_option("--image", image)->required();
  detect->add_option("--scale", scale, "pyramid scale factor")->check(CLI::Range(1.01, 4.0));
  detect->add_option("--step", step, "base stride in pixels")->check(CLI::PositiveNumber);
  detect->add_option("--out", out, "detections file (default stdout)");

  auto* eval = app.add_subcommand("eval", "test-set curves");
  eval->add_option("--model", model)->required();
  eval->add_option("--pos", pos)->required();
  eval->add_option("--neg", neg)->required();
  eval->add_option("--roc", roc, "CSV output");

  auto* aug = app.add_subcommand("augment", "noise-augment patches");
  aug->add_option("--in", in_dir)->required();
  aug->add_option("--out", out)->required();
  aug->add_option("--flags", flags, "subset of RML")->required();
  aug->add_option("--seed", seed);

  auto* bench = app.add_subcommand("bench", "timing");
  bench->add_option("--image", image)->required();
  bench->add_option("--model", model)->required();

  int synth_count = 200, scene_side = 200;
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus and a test scene");
  synth->add_option("--seed", seed);
  synth->add_option("--count", synth_count, "patches per class")->check(CLI::PositiveNumber);
  synth->add_option("--scene", scene_side, "scene side in pixels")->check(CLI::Range(60, 4096));
  synth->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return run_train(ta);
    if (*detect) return run_detect(model, image, scale, step, out);
    if (*eval) return run_eval(model, pos, neg, roc);
    if (*aug) return run_augment(in_dir, out, flags, seed);
    if (*bench) return run_bench(image, model);
    if (*synth) return run_synth(seed, synth_count, scene_side, out);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
