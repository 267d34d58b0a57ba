#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include "rcf/weak_learners.hpp"

using namespace rcf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double stump_error(std::span<const double> v, std::span<const int> y, std::span<const double> w, double t, int p) {
  double e = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const int pred = v[i] >= t ? p : -p;
    if (pred != y[i]) e += w[i];
  }
  return e;
}

// Minimum over every threshold candidate (each value, +-inf) and both polarities.
double exhaustive_stump(std::span<const double> v, std::span<const int> y, std::span<const double> w) {
  std::vector<double> cands(v.begin(), v.end());
  cands.push_back(-kInf);
  cands.push_back(kInf);
  double best = kInf;
  for (double t : cands)
    for (int p : {1, -1}) best = std::min(best, stump_error(v, y, w, t, p));
  return best;
}

Eigen::VectorXd eigen_lsq(const ColumnMatrix<double>& Z, std::span<const double> y, std::span<const double> w) {
  const int n = Z.rows(), m = Z.cols();
  Eigen::MatrixXd X(n, m + 1);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < m; ++c) X(i, c) = Z(i, c);
    X(i, m) = 1.0;
  }
  Eigen::VectorXd Y = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  Eigen::VectorXd W = Eigen::Map<const Eigen::VectorXd>(w.data(), n);
  const Eigen::MatrixXd A = X.transpose() * W.asDiagonal() * X;
  const Eigen::VectorXd b = X.transpose() * W.asDiagonal() * Y;
  return A.colPivHouseholderQr().solve(b);
}

double residual_of(const ColumnMatrix<double>& Z, std::span<const int> support, std::span<const double> y,
                   std::span<const double> w) {
  ColumnMatrix<double> sub(Z.rows(), static_cast<int>(support.size()));
  for (std::size_t s = 0; s < support.size(); ++s) {
    for (int i = 0; i < Z.rows(); ++i) sub(i, static_cast<int>(s)) = Z(i, support[s]);
  }
  const Eigen::VectorXd beta = eigen_lsq(sub, y, w);
  double r = 0.0;
  for (int i = 0; i < Z.rows(); ++i) {
    double f = beta(sub.cols());
    for (int s = 0; s < sub.cols(); ++s) f += beta(s) * sub(i, s);
    r += w[i] * (y[i] - f) * (y[i] - f);
  }
  return r;
}

std::vector<double> normalized(std::vector<double> w) {
  double s = 0.0;
  for (double v : w) s += v;
  for (double& v : w) v /= s;
  return w;
}

}  // namespace

TEST_CASE("stump examples") {
  const std::vector<double> v{1, 2, 3, 4};
  const std::vector<double> w(4, 0.25);
  const Stump1D a = train_stump_1d(v, std::vector<int>{-1, -1, 1, 1}, w);
  CHECK(a.trained_error == 0.0);
  CHECK(a.polarity == 1);
  CHECK(a.threshold > 2.0);
  CHECK(a.threshold <= 3.0);

  const Stump1D b = train_stump_1d(v, std::vector<int>{1, -1, 1, -1}, w);
  CHECK(b.trained_error == doctest::Approx(0.25));

  const Stump1D c = train_stump_1d(v, std::vector<int>{1, 1, 1, 1}, w);
  CHECK(c.trained_error == 0.0);
  CHECK(c.threshold == -kInf);
  CHECK(c.polarity == 1);
  CHECK(c.predict(-1e300) == 1);

  const Stump1D d = train_stump_1d(v, std::vector<int>{-1, -1, -1, -1}, w);
  CHECK(d.trained_error == 0.0);
  CHECK(d.threshold == -kInf);
  CHECK(d.polarity == -1);
}

TEST_CASE("stump validation") {
  const std::vector<double> v{1, 2};
  CHECK_THROWS_AS(train_stump_1d(v, std::vector<int>{1, -1}, std::vector<double>{0.3, 0.3}), std::invalid_argument);
  CHECK_THROWS_AS(train_stump_1d(v, std::vector<int>{1, 0}, std::vector<double>{0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(train_stump_1d(v, std::vector<int>{1}, std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(train_stump_1d(v, std::vector<int>{1, -1}, std::vector<double>{1.5, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(train_stump_1d({}, {}, {}), std::invalid_argument);
}

TEST_CASE("stump ties go to the smallest threshold") {
  // Splits at 1.5 and 3.5 both reach error 1/4 with polarity +1.
  const std::vector<double> v{1, 2, 3, 4};
  const Stump1D s = train_stump_1d(v, std::vector<int>{-1, 1, -1, 1}, std::vector<double>(4, 0.25));
  CHECK(s.threshold == 1.5);
  CHECK(s.polarity == 1);
  CHECK(s.trained_error == doctest::Approx(0.25));
  const Stump1D t = train_stump_1d(std::vector<double>{5, 5, 5}, std::vector<int>{1, -1, 1}, std::vector<double>{0.25, 0.5, 0.25});
  CHECK(t.threshold == -kInf);
  CHECK(t.polarity == 1);
  CHECK(t.trained_error == 0.5);
}

TEST_CASE("stump matches exhaustive search on small random inputs") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 300; ++t) {
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    std::vector<double> v(n), w(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      v[i] = std::uniform_int_distribution<int>(0, 5)(rng);
      y[i] = std::uniform_int_distribution<int>(0, 1)(rng) ? 1 : -1;
      w[i] = std::uniform_int_distribution<int>(1, 8)(rng);
    }
    w = normalized(w);
    const Stump1D s = train_stump_1d(v, y, w);
    CHECK(s.trained_error == doctest::Approx(exhaustive_stump(v, y, w)).epsilon(1e-12));
    CHECK(stump_error(v, y, w, s.threshold, s.polarity) == doctest::Approx(s.trained_error).epsilon(1e-12));
  }
}

TEST_CASE("stump midpoint between adjacent doubles") {
  const double a = 1.0, b = std::nextafter(1.0, 2.0);
  const Stump1D s = train_stump_1d(std::vector<double>{a, b}, std::vector<int>{-1, 1}, std::vector<double>{0.5, 0.5});
  CHECK(s.trained_error == 0.0);
  CHECK(s.predict(a) == -1);
  CHECK(s.predict(b) == 1);
}

TEST_CASE("weighted lsq examples") {
  ColumnMatrix<double> Z(2, 1);
  Z(0, 0) = 1;
  Z(1, 0) = 2;
  const std::vector<double> y{1, 2}, w{0.5, 0.5};
  const auto beta = weighted_lsq(Z, y, w);
  REQUIRE(beta.size() == 2);
  CHECK(beta[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(beta[1]) < 1e-6);
}

TEST_CASE("weighted lsq matches an independent normal-equation solve") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const int n = 30, m = 5;
    ColumnMatrix<double> Z(n, m);
    std::vector<double> y(n), w(n, 1.0 / n);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < m; ++c) Z(i, c) = g(rng);
      y[i] = g(rng);
    }
    const auto beta = weighted_lsq(Z, y, w, 0.0);
    const Eigen::VectorXd ref = eigen_lsq(Z, y, w);
    for (int c = 0; c <= m; ++c) CHECK(std::abs(beta[c] - ref(c)) <= 1e-8);
  }
}

TEST_CASE("doubling a weight equals duplicating the row") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 10, m = 3;
  ColumnMatrix<double> Z(n, m), Zd(n + 1, m);
  std::vector<double> y(n), yd(n + 1);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < m; ++c) Zd(i, c) = Z(i, c) = g(rng);
    yd[i] = y[i] = g(rng);
  }
  for (int c = 0; c < m; ++c) Zd(n, c) = Z(0, c);
  yd[n] = y[0];
  std::vector<double> w(n, 1.0);
  w[0] = 2.0;
  const std::vector<double> wd(n + 1, 1.0);
  const auto a = weighted_lsq(Z, y, w, 0.0), b = weighted_lsq(Zd, yd, wd, 0.0);
  for (int c = 0; c <= m; ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-10));
}

TEST_CASE("weighted lsq survives a singular design") {
  ColumnMatrix<double> Z(4, 2);
  for (int i = 0; i < 4; ++i) Z(i, 0) = Z(i, 1) = i;
  const std::vector<double> y{0, 1, 2, 3}, w(4, 0.25);
  const auto beta = weighted_lsq(Z, y, w, 0.0);
  for (double b : beta) CHECK(std::isfinite(b));
  double r = 0.0;
  for (int i = 0; i < 4; ++i) r += (y[i] - beta[0] * i - beta[1] * i - beta[2]) * (y[i] - beta[0] * i - beta[1] * i - beta[2]);
  CHECK(r < 1e-6);
}

TEST_CASE("greedy sparse lsq") {
  std::mt19937_64 rng(31);
  const int n = 40, m = 8;
  ColumnMatrix<double> Z(n, m);
  std::vector<double> y(n), w(n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < m; ++c) Z(i, c) = std::uniform_int_distribution<int>(0, 1)(rng) ? 1.0 : -1.0;
    y[i] = std::uniform_int_distribution<int>(0, 1)(rng) ? 1.0 : -1.0;
    w[i] = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
  }
  w = normalized(w);

  SUBCASE("k = m uses every column and matches the full fit") {
    const SparseLsqFit fit = greedy_sparse_lsq(Z, y, w, m, 0.0);
    std::vector<int> sorted = fit.support;
    std::sort(sorted.begin(), sorted.end());
    for (int c = 0; c < m; ++c) CHECK(sorted[c] == c);
    const auto full = weighted_lsq(Z, y, w, 0.0);
    for (int s = 0; s < m; ++s) CHECK(fit.beta[s] == doctest::Approx(full[fit.support[s]]).epsilon(1e-8));
    CHECK(fit.beta[m] == doctest::Approx(full[m]).epsilon(1e-8));
  }
  SUBCASE("bounds against exhaustive best subset") {
    for (int k = 1; k <= 3; ++k) {
      const SparseLsqFit fit = greedy_sparse_lsq(Z, y, w, k, 0.0);
      double best = kInf;
      std::vector<int> idx(k);
      std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
          best = std::min(best, residual_of(Z, idx, y, w));
          return;
        }
        for (int c = start; c < m; ++c) {
          idx[depth] = c;
          rec(c + 1, depth + 1);
        }
      };
      rec(0, 0);
      CHECK(fit.residual >= best - 1e-12);
      double best_single = kInf;
      std::vector<int> one(1);
      for (int c = 0; c < m; ++c) {
        one[0] = c;
        best_single = std::min(best_single, residual_of(Z, one, y, w));
      }
      CHECK(fit.residual <= best_single + 1e-12);
      CHECK(fit.residual == doctest::Approx(residual_of(Z, fit.support, y, w)).epsilon(1e-9));
    }
  }
  SUBCASE("residual is non-increasing") {
    const SparseLsqFit fit = greedy_sparse_lsq(Z, y, w, 5, 0.0);
    REQUIRE(fit.step_residual.size() == 5);
    for (int s = 1; s < 5; ++s) CHECK(fit.step_residual[s] <= fit.step_residual[s - 1] * (1 + 1e-12));
  }
  SUBCASE("ties go to the lowest index") {
    ColumnMatrix<double> D(n, 3);
    for (int i = 0; i < n; ++i) D(i, 0) = D(i, 1) = D(i, 2) = Z(i, 0);
    CHECK(greedy_sparse_lsq(D, y, w, 1).support[0] == 0);
  }
  SUBCASE("cardinality errors") {
    CHECK_THROWS_AS(greedy_sparse_lsq(Z, y, w, m + 1), std::invalid_argument);
    CHECK_THROWS_AS(greedy_sparse_lsq(Z, y, w, 0), std::invalid_argument);
  }
}

TEST_CASE("multidimensional stump") {
  std::mt19937_64 rng(37);
  const int n = 200;
  std::vector<Descriptor8> d(n);
  std::vector<int> y(n);
  std::vector<double> w(n, 1.0 / n);
  for (int i = 0; i < n; ++i) {
    for (double& v : d[i]) v = std::uniform_real_distribution<double>(0, 1)(rng);
    double s = d[i][0] + d[i][1] - 1.0;
    if (std::abs(s) < 0.1) {  // enforce a margin
      d[i][0] += s >= 0 ? 0.2 : -0.2;
      s = d[i][0] + d[i][1] - 1.0;
    }
    y[i] = s >= 0 ? 1 : -1;
  }
  const MultiDimStump st = train_multidim_stump(d, y, w, {1, 2, 3, 4});
  CHECK(st.trained_error == 0.0);
  CHECK(st.rect == Rect{1, 2, 3, 4});
  for (int i = 0; i < n; ++i) CHECK(st.predict(d[i]) == y[i]);

  ColumnMatrix<double> Z(n, 8);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 8; ++c) Z(i, c) = d[i][c];
  const std::vector<double> yd(y.begin(), y.end());
  const auto beta = weighted_lsq(Z, yd, w);
  for (int c = 0; c < 8; ++c) CHECK(st.projection[c] == doctest::Approx(beta[c]).epsilon(1e-12));
  CHECK(st.bias == doctest::Approx(beta[8]).epsilon(1e-12));

  std::vector<Descriptor8> same(10, Descriptor8{0.5, 0.1, 0.2, 0.3, 1, 0, 0, 0});
  std::vector<int> ys{1, 1, 1, 1, 1, -1, -1, -1, -1, -1};
  const MultiDimStump flat = train_multidim_stump(same, ys, std::vector<double>(10, 0.1), {});
  CHECK(flat.trained_error == doctest::Approx(0.5));

  const MultiDimStump one_class = train_multidim_stump(same, std::vector<int>(10, 1), std::vector<double>(10, 0.1), {});
  CHECK(one_class.trained_error == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(train_multidim_stump(std::span<const Descriptor8>(same.data(), 1), std::vector<int>{1}, std::vector<double>{1.0}, {}),
                  std::invalid_argument);
}

TEST_CASE("joint learner on the AND toy") {
  // Four equally weighted response cells of (z1, z2); y = +1 iff both are +1.
  const int n = 4;
  const int z1[] = {1, 1, -1, -1}, z2[] = {1, -1, 1, -1};
  const std::vector<int> y{1, -1, -1, -1};
  ColumnMatrix<std::int8_t> Z(n, 2);
  ColumnMatrix<double> v(n, 2);
  for (int i = 0; i < n; ++i) {
    v(i, 0) = Z(i, 0) = static_cast<std::int8_t>(z1[i]);
    v(i, 1) = Z(i, 1) = static_cast<std::int8_t>(z2[i]);
  }
  const std::vector<double> w(4, 0.25);
  const JointFit single = fit_joint_responses(Z, y, w, 1);
  CHECK(single.trained_error == doctest::Approx(0.25));
  const JointFit both = fit_joint_responses(Z, y, w, 2);
  CHECK(both.trained_error == 0.0);
  CHECK_FALSE(both.degenerate);
  // z1 + z2 - 1 up to scale
  CHECK(both.beta[0] == doctest::Approx(0.5));
  CHECK(both.beta[1] == doctest::Approx(0.5));
  CHECK(both.beta[2] == doctest::Approx(-0.5));

  // Through the pool: with the positive cell upweighted the stumps split at 0.
  const std::vector<double> wp{0.3, 0.2, 0.2, 0.3};
  const ScalarColumns pool = ScalarColumns::build(v);
  const JointPoolFit one = train_joint_learner(pool, y, wp, 1);
  CHECK(one.fit.trained_error == doctest::Approx(0.2));
  const JointPoolFit joint = train_joint_learner(pool, y, wp, 2);
  CHECK(joint.fit.trained_error == 0.0);
  std::vector<int> z(2);
  for (int i = 0; i < n; ++i) {
    z[0] = joint.stumps[0].predict(v(i, joint.fit.support[0]));
    z[1] = joint.stumps[1].predict(v(i, joint.fit.support[1]));
    CHECK(joint_predict(joint.fit.beta, z) == y[i]);
  }
  CHECK_THROWS_AS(train_joint_learner(pool, y, wp, 3), std::invalid_argument);
}

TEST_CASE("joint k = 1 picks the exhaustive best binary column") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 40; ++t) {
    const int n = 60, m = 12;
    ColumnMatrix<double> v(n, m);
    std::vector<int> y(n);
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
      y[i] = std::uniform_int_distribution<int>(0, 1)(rng) ? 1 : -1;
      w[i] = std::uniform_real_distribution<double>(0.2, 1.0)(rng);
      for (int c = 0; c < m; ++c) v(i, c) = std::normal_distribution<double>(0.4 * c * y[i] / m, 1.0)(rng);
    }
    w = normalized(w);
    const ScalarColumns pool = ScalarColumns::build(v);
    const JointPoolFit fit = train_joint_learner(pool, y, w, 1, 0.0);

    // Oracle: every column's stump responses, residual of the 1-column refit.
    double best = kInf;
    std::vector<double> residuals(m);
    const std::vector<double> yd(y.begin(), y.end());
    for (int c = 0; c < m; ++c) {
      const Stump1D s = train_stump_1d(v.column(c), y, w);
      ColumnMatrix<double> zc(n, m);
      for (int i = 0; i < n; ++i) zc(i, c) = s.predict(v(i, c));
      const std::vector<int> sup{c};
      residuals[c] = residual_of(zc, sup, yd, w);
      best = std::min(best, residuals[c]);
    }
    CHECK(residuals[fit.fit.support[0]] <= best + 1e-12);
    CHECK(fit.fit.trained_error <= 0.5);
  }
}

TEST_CASE("uninformative joint learner is flagged degenerate") {
  ColumnMatrix<std::int8_t> Z(4, 1, 1);
  const std::vector<int> y{1, -1, 1, -1};
  const JointFit fit = fit_joint_responses(Z, y, std::vector<double>(4, 0.25), 1);
  CHECK(fit.trained_error == doctest::Approx(0.5));
  CHECK(fit.degenerate);
}

TEST_CASE("weight scaling leaves the decision unchanged") {
  std::mt19937_64 rng(43);
  const int n = 50, m = 6;
  ColumnMatrix<std::int8_t> Z(n, m);
  std::vector<int> y(n);
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    y[i] = std::uniform_int_distribution<int>(0, 1)(rng) ? 1 : -1;
    w[i] = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    for (int c = 0; c < m; ++c) Z(i, c) = static_cast<std::int8_t>(std::uniform_int_distribution<int>(0, 3)(rng) ? y[i] : -y[i]);
  }
  w = normalized(w);
  std::vector<double> w3 = w;
  for (double& v : w3) v *= 4.0;
  const JointFit a = fit_joint_responses(Z, y, w, 2, 0.0), b = fit_joint_responses(Z, y, w3, 2, 0.0);
  CHECK(a.support == b.support);
  for (std::size_t i = 0; i < a.beta.size(); ++i) CHECK(a.beta[i] == doctest::Approx(b.beta[i]).epsilon(1e-9));

  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = Z(i, 0) + 0.01 * i;
  const auto order = sort_order(v);
  const Stump1D s1 = fit_stump_sorted(v, order, y, w), s3 = fit_stump_sorted(v, order, y, w3);
  CHECK(s1.threshold == s3.threshold);
  CHECK(s1.polarity == s3.polarity);
}
