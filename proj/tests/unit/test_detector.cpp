#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "rcf/detector.hpp"
#include "rcf/imaging.hpp"
#include "rcf/synth.hpp"

using namespace rcf;

namespace {

Cascade constant_cascade(double threshold) {
  Cascade c;
  StrongClassifier sc;
  sc.threshold = threshold;
  c.stages.push_back(sc);
  return c;
}

const Cascade kPassAll = constant_cascade(-std::numeric_limits<double>::infinity());
const Cascade kRejectAll = constant_cascade(std::numeric_limits<double>::infinity());

Detection box(double x, double y, double s, double score = 1.0) { return {x, y, s, s, score}; }

}  // namespace

TEST_CASE("scan window counts") {
  const GrayImage img(30, 30, 128.0);
  const auto levels = scan_levels(30, 30);
  REQUIRE(levels.size() == 2);
  CHECK(levels[0].side == 24);
  CHECK(levels[1].side == 29);
  CHECK(levels[1].stride == 1);
  CHECK(scan(img, kPassAll).size() == 53);
  CHECK(scan_window_count(30, 30) == 53);
  CHECK(scan(GrayImage(10, 10), kPassAll).empty());
  CHECK(scan(img, kRejectAll).empty());

  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const int w = std::uniform_int_distribution<int>(20, 90)(rng);
    const int h = std::uniform_int_distribution<int>(20, 90)(rng);
    const double step = std::uniform_int_distribution<int>(1, 3)(rng);
    // Closed form per level j: side s_j = floor(24 * 1.2^j + 0.5), stride
    // d_j = max(1, floor(step * 1.2^j + 0.5)), windows (floor((W-s)/d)+1)(floor((H-s)/d)+1).
    std::size_t expected = 0;
    for (int j = 0;; ++j) {
      const int s = static_cast<int>(std::floor(24 * std::pow(1.2, j) + 0.5));
      if (s > std::min(w, h)) break;
      const int d = std::max(1, static_cast<int>(std::floor(step * std::pow(1.2, j) + 0.5)));
      expected += static_cast<std::size_t>((w - s) / d + 1) * ((h - s) / d + 1);
    }
    CHECK(scan_window_count(w, h, {1.2, step}) == expected);
    if (t < 10) CHECK(scan(GrayImage(w, h, 1.0), kPassAll, {1.2, step}).size() == expected);
  }
}

TEST_CASE("scan detections are squares inside the image in level order") {
  const auto dets = scan(GrayImage(40, 33, 5.0), kPassAll, {1.2, 2.0});
  double prev_side = 0;
  for (const Detection& d : dets) {
    CHECK(d.w == d.h);
    CHECK(d.x >= 0);
    CHECK(d.y >= 0);
    CHECK(d.x + d.w <= 40);
    CHECK(d.y + d.h <= 33);
    CHECK(d.w >= prev_side);
    prev_side = d.w;
  }
}

TEST_CASE("scan scores match direct classification at the base level") {
  const TrainingSet set = synth_corpus(3, 30, 30);
  std::vector<GrayImage> windows;
  std::vector<int> labels;
  for (const auto& p : set.positives) { windows.push_back(p); labels.push_back(1); }
  for (const auto& p : set.negatives) { windows.push_back(p); labels.push_back(-1); }
  BoostConfig cfg;
  cfg.rounds = 3;
  cfg.rect_pool = {24, 24, 8, 8, 4};
  Cascade c;
  c.stages.push_back(train_adaboost(windows, labels, cfg).classifier);
  c.stages.back().threshold = -1e9;
  const GrayImage scene = synth_scene(4, 40, 40);
  const auto dets = scan(scene, c);
  const auto again = scan(scene, c);
  CHECK(dets == again);
  for (const Detection& d : dets) {
    if (d.w != 24) continue;
    const GrayImage crop_img = crop(scene, {int(d.x), int(d.y), 24, 24});
    CHECK(d.score == doctest::Approx(c.stages[0].score(build_channels(crop_img)) + 1e9));
  }
}

TEST_CASE("intersection over union") {
  CHECK(intersection_over_union(box(0, 0, 10), box(0, 0, 10)) == 1.0);
  CHECK(intersection_over_union(box(0, 0, 10), box(20, 0, 10)) == 0.0);
  CHECK(intersection_over_union(box(0, 0, 10), box(5, 0, 10)) == doctest::Approx(50.0 / 150.0));
}

TEST_CASE("merge examples") {
  const auto same = merge_detections({box(3, 4, 24, 1.0), box(3, 4, 24, 2.0)});
  REQUIRE(same.size() == 1);
  CHECK(same[0] == box(3, 4, 24, 2.0));

  const std::vector<Detection> apart{box(0, 0, 24), box(100, 100, 24)};
  CHECK(merge_detections(apart) == apart);

  // A~B and B~C overlap (IoU 65/135) but A and C do not (IoU 30/170).
  const Detection a = box(0, 0, 10, 1), b = box(3.5, 0, 10, 3), c = box(7, 0, 10, 2);
  CHECK(intersection_over_union(a, b) >= 0.3);
  CHECK(intersection_over_union(b, c) >= 0.3);
  CHECK(intersection_over_union(a, c) < 0.3);
  std::vector<int> groups;
  const auto chain = merge_detections({a, b, c}, kMergeOverlap, &groups);
  REQUIRE(chain.size() == 1);
  CHECK(chain[0].x == doctest::Approx(3.5));
  CHECK(chain[0].w == doctest::Approx(10));
  CHECK(chain[0].score == 3);
  CHECK(groups == std::vector<int>{0, 0, 0});
  CHECK(merge_detections({}).empty());
}

TEST_CASE("merge is idempotent and conserves detections") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 100; ++t) {
    std::vector<Detection> dets;
    const int n = std::uniform_int_distribution<int>(0, 30)(rng);
    for (int i = 0; i < n; ++i) {
      dets.push_back(box(std::uniform_int_distribution<int>(0, 80)(rng), std::uniform_int_distribution<int>(0, 80)(rng),
                         std::uniform_int_distribution<int>(20, 40)(rng), std::uniform_real_distribution<double>(0, 5)(rng)));
    }
    std::vector<int> groups;
    const auto once = merge_detections(dets, kMergeOverlap, &groups);
    CHECK(merge_detections(once) == once);
    CHECK(once.size() <= dets.size());
    REQUIRE(groups.size() == dets.size());
    std::vector<int> members(once.size(), 0);
    for (int g : groups) {
      REQUIRE(g >= 0);
      REQUIRE(g < static_cast<int>(once.size()));
      ++members[g];
    }
    for (int m : members) CHECK(m >= 1);
    for (std::size_t i = 0; i < once.size(); ++i)
      for (std::size_t j = i + 1; j < once.size(); ++j) CHECK(intersection_over_union(once[i], once[j]) < kMergeOverlap);
  }
}

TEST_CASE("match detections") {
  const GroundTruthBox face{50, 50, 30, 30};
  const auto exact = match_detections({box(50, 50, 30)}, {face});
  CHECK(exact.true_positives == 1);
  CHECK(exact.false_positives == 0);
  CHECK(exact.false_negatives == 0);

  const auto triple = match_detections({box(50, 50, 30, 3), box(52, 51, 30, 2), box(49, 50, 28, 1)}, {face});
  CHECK(triple.true_positives == 1);
  CHECK(triple.false_positives == 2);
  CHECK(triple.per_face_detections == std::vector<int>{3});

  const std::vector<GroundTruthBox> five(5, face);
  const auto none = match_detections({}, five);
  CHECK(none.false_negatives == 5);
  CHECK(none.true_positives == 0);

  CHECK_FALSE(detection_matches(box(60, 50, 30), face));  // centre 10 px off, tolerance 7.5
  CHECK(detection_matches(box(57, 50, 30), face));
  CHECK_FALSE(detection_matches(box(40, 40, 50), face));   // size ratio 5/3
  CHECK(detection_matches(box(45, 45, 40), face));         // ratio 4/3, same centre

  // Two faces, two detections: each claims its nearest face.
  const std::vector<GroundTruthBox> pair{{0, 0, 24, 24}, {100, 0, 24, 24}};
  const auto r = match_detections({box(101, 0, 24, 5), box(1, 1, 24, 4)}, pair);
  CHECK(r.true_positives == 2);
  CHECK(r.false_positives == 0);
  CHECK(r.true_positives + r.false_negatives == 2);
}

TEST_CASE("ground truth parsing") {
  std::istringstream in("# comment\nimg1.pgm 10 20 30 30\n\nimg1.pgm 1 2 24 24\nimg2.pgm 0 0 48 48\n");
  const auto gt = parse_ground_truth(in);
  REQUIRE(gt.size() == 2);
  CHECK(gt.at("img1.pgm").size() == 2);
  CHECK(gt.at("img1.pgm")[0].x == 10);
  CHECK(gt.at("img2.pgm")[0].w == 48);
  std::istringstream bad("img1.pgm 10 20 thirty 30\n");
  CHECK_THROWS_AS(parse_ground_truth(bad), std::runtime_error);
}
