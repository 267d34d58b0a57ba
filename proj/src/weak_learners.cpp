#include "rcf/weak_learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace rcf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_sample(std::size_t n, std::span<const int> labels, std::span<const double> weights,
                     const char* who) {
  if (n == 0) throw std::invalid_argument(std::string(who) + ": empty sample");
  if (labels.size() != n || weights.size() != n) {
    throw std::invalid_argument(std::string(who) + ": values, labels and weights differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 1 && labels[i] != -1) throw std::invalid_argument(std::string(who) + ": label not in {-1, +1}");
    if (!(weights[i] >= 0.0)) throw std::invalid_argument(std::string(who) + ": negative or NaN weight");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << who << ": weights sum to " << total << ", expected 1";
    throw std::invalid_argument(msg.str());
  }
}

// Cholesky with diagonal jitter escalation for rank-deficient normal equations.
std::vector<double> solve_normal_equations(const std::vector<double>& gram, const std::vector<double>& rhs,
                                           int dim, double ridge) {
  double trace = 0.0;
  for (int i = 0; i < dim; ++i) trace += gram[i * dim + i];
  double jitter = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    std::vector<double> a = gram;
    std::vector<double> b = rhs;
    for (int i = 0; i < dim; ++i) a[i * dim + i] += ridge + jitter;
    if (cholesky_solve(a, b, dim)) return b;
    jitter = jitter == 0.0 ? 1e-12 * (trace / dim + 1.0) : jitter * 100.0;
  }
  throw std::runtime_error("weighted least squares: normal equations could not be factorized");
}

std::vector<double> weighted_lsq_columns(std::span<const std::span<const double>> cols, std::span<const double> y,
                                         std::span<const double> w, double ridge) {
  const int m = static_cast<int>(cols.size());
  const int dim = m + 1;
  const std::size_t n = y.size();
  std::vector<double> gram(static_cast<std::size_t>(dim) * dim, 0.0);
  std::vector<double> rhs(dim, 0.0);
  std::vector<double> row(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w[i];
    if (wi == 0.0) continue;
    for (int a = 0; a < m; ++a) row[a] = cols[a][i];
    row[m] = 1.0;
    const double wy = wi * y[i];
    for (int a = 0; a < dim; ++a) {
      const double wa = wi * row[a];
      rhs[a] += wy * row[a];
      for (int b = a; b < dim; ++b) gram[a * dim + b] += wa * row[b];
    }
  }
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < a; ++b) gram[a * dim + b] = gram[b * dim + a];
  }
  return solve_normal_equations(gram, rhs, dim, ridge);
}

}  // namespace

bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, int dim) {
  for (int j = 0; j < dim; ++j) {
    double d = a[j * dim + j];
    for (int k = 0; k < j; ++k) d -= a[j * dim + k] * a[j * dim + k];
    if (!(d > 0.0)) return false;
    const double l = std::sqrt(d);
    a[j * dim + j] = l;
    for (int i = j + 1; i < dim; ++i) {
      double s = a[i * dim + j];
      for (int k = 0; k < j; ++k) s -= a[i * dim + k] * a[j * dim + k];
      a[i * dim + j] = s / l;
    }
  }
  for (int i = 0; i < dim; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= a[i * dim + k] * b[k];
    b[i] = s / a[i * dim + i];
  }
  for (int i = dim - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < dim; ++k) s -= a[k * dim + i] * b[k];
    b[i] = s / a[i * dim + i];
  }
  return true;
}

// ---------------------------------------------------------------------------

std::vector<std::uint32_t> sort_order(std::span<const double> values) {
  std::vector<std::uint32_t> order(values.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  return order;
}

Stump1D fit_stump_sorted(std::span<const double> values, std::span<const std::uint32_t> order,
                         std::span<const int> labels, std::span<const double> weights) {
  double total_pos = 0.0;
  double total_neg = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] > 0 ? total_pos : total_neg) += weights[i];

  // Threshold -inf: polarity +1 predicts everything positive.
  Stump1D best{-kInf, 1, total_neg};
  if (total_pos < best.trained_error) best = {-kInf, -1, total_pos};

  double below_pos = 0.0;
  double below_neg = 0.0;
  const std::size_t n = order.size();
  std::size_t i = 0;
  while (i < n) {
    const double v = values[order[i]];
    while (i < n && values[order[i]] == v) {
      const std::uint32_t s = order[i];
      (labels[s] > 0 ? below_pos : below_neg) += weights[s];
      ++i;
    }
    double threshold = kInf;
    if (i < n) {
      const double next = values[order[i]];
      threshold = 0.5 * (v + next);
      if (!(threshold > v)) threshold = next;
    }
    const double err_plus = below_pos + (total_neg - below_neg);
    const double err_minus = below_neg + (total_pos - below_pos);
    if (err_plus < best.trained_error) best = {threshold, 1, err_plus};
    if (err_minus < best.trained_error) best = {threshold, -1, err_minus};
  }
  return best;
}

Stump1D train_stump_1d(std::span<const double> values, std::span<const int> labels,
                       std::span<const double> weights) {
  validate_sample(values.size(), labels, weights, "train_stump_1d");
  const std::vector<std::uint32_t> order = sort_order(values);
  return fit_stump_sorted(values, order, labels, weights);
}

// ---------------------------------------------------------------------------

std::vector<double> weighted_lsq(const ColumnMatrix<double>& Z, std::span<const double> y,
                                 std::span<const double> w, double ridge) {
  if (Z.rows() < 1 || Z.cols() < 1) throw std::invalid_argument("weighted_lsq: design must be at least 1x1");
  if (y.size() != static_cast<std::size_t>(Z.rows()) || w.size() != y.size()) {
    throw std::invalid_argument("weighted_lsq: design, targets and weights differ in length");
  }
  std::vector<std::span<const double>> cols;
  cols.reserve(Z.cols());
  for (int c = 0; c < Z.cols(); ++c) cols.push_back(Z.column(c));
  return weighted_lsq_columns(cols, y, w, ridge);
}

template <typename T>
SparseLsqFit greedy_sparse_lsq(const ColumnMatrix<T>& Z, std::span<const double> y,
                               std::span<const double> w, int k, double ridge) {
  const int m = Z.cols();
  const int n = Z.rows();
  if (k < 1 || k > m) {
    std::ostringstream msg;
    msg << "greedy_sparse_lsq: cardinality " << k << " outside [1, " << m << "]";
    throw std::invalid_argument(msg.str());
  }
  if (y.size() != static_cast<std::size_t>(n) || w.size() != y.size()) {
    throw std::invalid_argument("greedy_sparse_lsq: design, targets and weights differ in length");
  }

  std::vector<double> wy(n);
  double yy = 0.0;
  double sum_w = 0.0;
  double sum_wy = 0.0;
  for (int i = 0; i < n; ++i) {
    wy[i] = w[i] * y[i];
    yy += wy[i] * y[i];
    sum_w += w[i];
    sum_wy += wy[i];
  }

  SparseLsqFit fit;
  std::vector<char> used(m, 0);
  // Normal-equation blocks of the current support: cross[a][b], mean[a] = sum w z_a, rhs[a].
  std::vector<std::vector<double>> cross;
  std::vector<double> mean;
  std::vector<double> rhs;
  std::vector<double> cand_cross;

  for (int step = 0; step < k; ++step) {
    const int t = static_cast<int>(fit.support.size());
    const int dim = t + 2;
    int best_col = -1;
    double best_res = kInf;
    std::vector<double> best_beta;
    std::vector<double> best_cross;
    double best_mean = 0.0;
    double best_sq = 0.0;
    double best_rhs = 0.0;

    cand_cross.assign(t, 0.0);
    std::vector<double> gram(static_cast<std::size_t>(dim) * dim);
    std::vector<double> b(dim);
    for (int j = 0; j < m; ++j) {
      if (used[j]) continue;
      const auto zj = Z.column(j);
      double c0 = 0.0, cjj = 0.0, bj = 0.0;
      std::fill(cand_cross.begin(), cand_cross.end(), 0.0);
      for (int i = 0; i < n; ++i) {
        const double z = static_cast<double>(zj[i]);
        const double wz = w[i] * z;
        c0 += wz;
        cjj += wz * z;
        bj += wy[i] * z;
      }
      for (int s = 0; s < t; ++s) {
        const auto zs = Z.column(fit.support[s]);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += w[i] * static_cast<double>(zj[i]) * static_cast<double>(zs[i]);
        cand_cross[s] = acc;
      }
      // Layout: [support..., candidate, intercept].
      for (int a = 0; a < t; ++a) {
        for (int c = 0; c < t; ++c) gram[a * dim + c] = cross[a][c];
        gram[a * dim + t] = gram[t * dim + a] = cand_cross[a];
        gram[a * dim + t + 1] = gram[(t + 1) * dim + a] = mean[a];
        b[a] = rhs[a];
      }
      gram[t * dim + t] = cjj;
      gram[t * dim + t + 1] = gram[(t + 1) * dim + t] = c0;
      gram[(t + 1) * dim + t + 1] = sum_w;
      b[t] = bj;
      b[t + 1] = sum_wy;

      std::vector<double> beta = solve_normal_equations(gram, b, dim, ridge);
      double bb = 0.0, norm2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        bb += beta[a] * b[a];
        norm2 += beta[a] * beta[a];
      }
      const double res = std::max(0.0, yy - bb - ridge * norm2);
      if (res < best_res) {
        best_res = res;
        best_col = j;
        best_beta = std::move(beta);
        best_cross = cand_cross;
        best_mean = c0;
        best_sq = cjj;
        best_rhs = bj;
      }
    }

    used[best_col] = 1;
    fit.support.push_back(best_col);
    for (int a = 0; a < t; ++a) cross[a].push_back(best_cross[a]);
    best_cross.push_back(best_sq);
    cross.push_back(best_cross);
    mean.push_back(best_mean);
    rhs.push_back(best_rhs);
    fit.beta = best_beta;

    double direct = 0.0;
    for (int i = 0; i < n; ++i) {
      double f = fit.beta.back();
      for (int s = 0; s <= t; ++s) f += fit.beta[s] * static_cast<double>(Z(i, fit.support[s]));
      const double r = y[i] - f;
      direct += w[i] * r * r;
    }
    fit.step_residual.push_back(direct);
  }
  fit.residual = fit.step_residual.back();
  return fit;
}

template SparseLsqFit greedy_sparse_lsq<double>(const ColumnMatrix<double>&, std::span<const double>,
                                                std::span<const double>, int, double);
template SparseLsqFit greedy_sparse_lsq<std::int8_t>(const ColumnMatrix<std::int8_t>&, std::span<const double>,
                                                     std::span<const double>, int, double);

// ---------------------------------------------------------------------------

MultiDimStump train_multidim_stump(const std::array<std::span<const double>, 8>& dims,
                                   std::span<const int> labels, std::span<const double> weights,
                                   const Rect& rect, double ridge) {
  const std::size_t n = labels.size();
  std::vector<double> y(labels.begin(), labels.end());
  const std::vector<double> beta = weighted_lsq_columns(dims, y, weights, ridge);

  MultiDimStump st;
  st.rect = rect;
  for (int d = 0; d < 8; ++d) st.projection[d] = beta[d];
  st.bias = beta[8];

  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = st.bias;
    for (int d = 0; d < 8; ++d) s += st.projection[d] * dims[d][i];
    scores[i] = s;
  }
  const std::vector<std::uint32_t> order = sort_order(scores);
  const Stump1D stump = fit_stump_sorted(scores, order, labels, weights);
  st.threshold = stump.threshold;
  st.polarity = stump.polarity;
  st.trained_error = stump.trained_error;
  return st;
}

MultiDimStump train_multidim_stump(std::span<const Descriptor8> descriptors, std::span<const int> labels,
                                   std::span<const double> weights, const Rect& rect, double ridge) {
  const std::size_t n = descriptors.size();
  if (n < 2) throw std::invalid_argument("train_multidim_stump: need at least 2 samples");
  validate_sample(n, labels, weights, "train_multidim_stump");
  ColumnMatrix<double> cols(static_cast<int>(n), 8);
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < 8; ++d) cols(static_cast<int>(i), d) = descriptors[i][d];
  }
  std::array<std::span<const double>, 8> dims;
  for (int d = 0; d < 8; ++d) dims[d] = cols.column(d);
  return train_multidim_stump(dims, labels, weights, rect, ridge);
}

// ---------------------------------------------------------------------------

ScalarColumns ScalarColumns::build(ColumnMatrix<double> values) {
  ScalarColumns out;
  out.order = ColumnMatrix<std::uint32_t>(values.rows(), values.cols());
  for (int c = 0; c < values.cols(); ++c) {
    const std::vector<std::uint32_t> ord = sort_order(values.column(c));
    std::copy(ord.begin(), ord.end(), out.order.column(c).begin());
  }
  out.values = std::move(values);
  return out;
}

void stump_responses(const Stump1D& stump, std::span<const double> values, std::span<std::int8_t> out) {
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = static_cast<std::int8_t>(stump.predict(values[i]));
}

JointFit fit_joint_responses(const ColumnMatrix<std::int8_t>& Z, std::span<const int> labels,
                             std::span<const double> weights, int k, double ridge) {
  if (k < 1 || k > Z.cols()) {
    std::ostringstream msg;
    msg << "joint learner: cardinality " << k << " exceeds pool of " << Z.cols();
    throw std::invalid_argument(msg.str());
  }
  std::vector<double> y(labels.begin(), labels.end());
  const SparseLsqFit sparse = greedy_sparse_lsq(Z, y, weights, k, ridge);

  JointFit fit;
  fit.support = sparse.support;
  fit.beta = sparse.beta;
  fit.residual = sparse.residual;

  const int n = Z.rows();
  std::vector<double> f(n, fit.beta.back());
  for (int s = 0; s < k; ++s) {
    const auto z = Z.column(fit.support[s]);
    for (int i = 0; i < n; ++i) f[i] += fit.beta[s] * z[i];
  }
  auto error_of = [&](double sign) {
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const int pred = sign * f[i] >= 0.0 ? 1 : -1;
      if (pred != labels[i]) err += weights[i];
    }
    return err;
  };
  fit.trained_error = error_of(1.0);
  if (fit.trained_error > 0.5) {
    const double flipped = error_of(-1.0);
    if (flipped < fit.trained_error) {
      for (double& b : fit.beta) b = -b;
      fit.trained_error = flipped;
    }
  }
  fit.degenerate = fit.trained_error >= 0.5;
  return fit;
}

JointPoolFit train_joint_learner(const ScalarColumns& pool, std::span<const int> labels,
                                 std::span<const double> weights, int k, double ridge) {
  const int m = pool.cols();
  const int n = pool.rows();
  if (m < 1) throw std::invalid_argument("train_joint_learner: empty pool");
  if (k < 1 || k > m) {
    std::ostringstream msg;
    msg << "train_joint_learner: cardinality " << k << " exceeds pool of " << m;
    throw std::invalid_argument(msg.str());
  }
  if (labels.size() != static_cast<std::size_t>(n) || weights.size() != labels.size()) {
    throw std::invalid_argument("train_joint_learner: pool, labels and weights differ in length");
  }

  std::vector<Stump1D> stumps(m);
  ColumnMatrix<std::int8_t> Z(n, m);
  for (int c = 0; c < m; ++c) {
    stumps[c] = fit_stump_sorted(pool.values.column(c), pool.order.column(c), labels, weights);
    stump_responses(stumps[c], pool.values.column(c), Z.column(c));
  }

  JointPoolFit out;
  out.fit = fit_joint_responses(Z, labels, weights, k, ridge);
  for (int c : out.fit.support) out.stumps.push_back(stumps[c]);
  return out;
}

}  // namespace rcf
