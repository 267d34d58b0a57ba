#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "rcf/channels.hpp"

namespace rcf {

inline constexpr double kDefaultRidge = 1e-8;

/// Dense column-major matrix. Columns are contiguous, which is the access
/// pattern of every per-feature scan during training.
template <typename T>
class ColumnMatrix {
 public:
  ColumnMatrix() = default;
  ColumnMatrix(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("ColumnMatrix: negative size");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  std::span<const T> column(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * rows_, static_cast<std::size_t>(rows_)};
  }
  std::span<T> column(int c) {
    return {data_.data() + static_cast<std::size_t>(c) * rows_, static_cast<std::size_t>(rows_)};
  }
  T operator()(int r, int c) const { return data_[static_cast<std::size_t>(c) * rows_ + r]; }
  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(c) * rows_ + r]; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

// ---------------------------------------------------------------------------
// 1-D decision stump

/// prediction = polarity * sign(value - threshold), with sign(0) = +1.
/// Thresholds may be -inf or +inf (constant predictions).
struct Stump1D {
  double threshold = 0.0;
  int polarity = 1;
  double trained_error = 0.0;

  int predict(double value) const { return value >= threshold ? polarity : -polarity; }
  friend bool operator==(const Stump1D&, const Stump1D&) = default;
};

/// Minimum weighted 0/1 error stump over thresholds at the midpoints of sorted
/// distinct values plus -inf and +inf. Ties go to the smallest threshold, then
/// polarity +1. Throws std::invalid_argument for mismatched sizes, labels
/// outside {-1, +1}, negative weights or weights not summing to 1.
Stump1D train_stump_1d(std::span<const double> values, std::span<const int> labels,
                       std::span<const double> weights);

/// Same search given the ascending sample order of `values` (ties in any
/// order). No validation; used on presorted training columns.
Stump1D fit_stump_sorted(std::span<const double> values, std::span<const std::uint32_t> order,
                         std::span<const int> labels, std::span<const double> weights);

/// Ascending order of values, ties by index.
std::vector<std::uint32_t> sort_order(std::span<const double> values);

// ---------------------------------------------------------------------------
// Weighted least squares

/// Minimizes sum_i w_i (y_i - z_i . beta - beta0)^2 + ridge * ||beta||^2 over
/// the m columns of Z plus an implicit intercept. Returns m + 1 coefficients,
/// intercept last. Solved by Cholesky on the normal equations; a singular
/// system is retried with growing diagonal jitter.
std::vector<double> weighted_lsq(const ColumnMatrix<double>& Z, std::span<const double> y,
                                 std::span<const double> w, double ridge = kDefaultRidge);

/// Solves a dense symmetric positive definite system in place. Returns false
/// if a pivot is not strictly positive.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, int dim);

struct SparseLsqFit {
  std::vector<int> support;           // column indices in selection order
  std::vector<double> beta;           // one per support column, intercept last
  double residual = 0.0;              // sum_i w_i (y_i - f_i)^2 at the final support
  std::vector<double> step_residual;  // residual after each greedy step
};

/// Forward greedy selection under the cardinality constraint |support| = k:
/// each step adds the column whose refit (weighted LSQ with intercept on the
/// enlarged support) has the smallest weighted residual; ties go to the
/// lowest column index. Throws std::invalid_argument unless 1 <= k <= cols.
template <typename T>
SparseLsqFit greedy_sparse_lsq(const ColumnMatrix<T>& Z, std::span<const double> y,
                               std::span<const double> w, int k, double ridge = kDefaultRidge);

// ---------------------------------------------------------------------------
// Multidimensional stump over an 8-D block descriptor

using Descriptor8 = std::array<double, 8>;

struct MultiDimStump {
  Rect rect;
  std::array<double, 8> projection{};
  double bias = 0.0;
  double threshold = 0.0;
  int polarity = 1;
  double trained_error = 0.0;

  double project(const Descriptor8& d) const {
    double s = bias;
    for (int i = 0; i < 8; ++i) s += projection[i] * d[i];
    return s;
  }
  int predict(const Descriptor8& d) const { return project(d) >= threshold ? polarity : -polarity; }
};

/// Weighted-LSQ projection of the descriptors onto the labels followed by a
/// 1-D stump on the projected scores. A single-class sample yields a constant
/// stump with error min(sum w+, sum w-).
MultiDimStump train_multidim_stump(std::span<const Descriptor8> descriptors, std::span<const int> labels,
                                   std::span<const double> weights, const Rect& rect,
                                   double ridge = kDefaultRidge);

/// Column form used in training: dims[d][i] is dimension d of sample i.
MultiDimStump train_multidim_stump(const std::array<std::span<const double>, 8>& dims,
                                   std::span<const int> labels, std::span<const double> weights,
                                   const Rect& rect, double ridge = kDefaultRidge);

// ---------------------------------------------------------------------------
// Joint learner: sparse LSQ over binary stump responses

/// Scalar feature columns with their presorted sample orders.
struct ScalarColumns {
  ColumnMatrix<double> values;
  ColumnMatrix<std::uint32_t> order;

  static ScalarColumns build(ColumnMatrix<double> values);
  int rows() const { return values.rows(); }
  int cols() const { return values.cols(); }
};

/// Binary response fit of a joint learner; index-based, geometry-free.
struct JointFit {
  std::vector<int> support;
  std::vector<double> beta;  // k coefficients then intercept
  double residual = 0.0;
  double trained_error = 0.0;
  bool degenerate = false;   // weighted error >= 0.5 even after a sign flip
};

/// Greedy sparse LSQ with cardinality k over binary responses Z in {-1, +1},
/// predicting sign(sum beta_j z_j + beta0) with sign(0) = +1. If the fit's
/// weighted error exceeds 0.5 all coefficients are negated.
JointFit fit_joint_responses(const ColumnMatrix<std::int8_t>& Z, std::span<const int> labels,
                             std::span<const double> weights, int k, double ridge = kDefaultRidge);

struct JointPoolFit {
  JointFit fit;
  std::vector<Stump1D> stumps;  // stumps of the support columns, same order
};

/// Trains one stump per pool column under the current weights, converts the
/// columns to binary responses and runs fit_joint_responses. Throws
/// std::invalid_argument when k exceeds the pool size.
JointPoolFit train_joint_learner(const ScalarColumns& pool, std::span<const int> labels,
                                 std::span<const double> weights, int k, double ridge = kDefaultRidge);

/// Response z in {-1, +1} for every sample of one column under a stump.
void stump_responses(const Stump1D& stump, std::span<const double> values, std::span<std::int8_t> out);

/// sign(sum beta_j z_j + beta0) with sign(0) = +1.
inline int joint_predict(std::span<const double> beta, std::span<const int> responses) {
  double f = beta.back();
  for (std::size_t j = 0; j < responses.size(); ++j) f += beta[j] * responses[j];
  return f >= 0.0 ? 1 : -1;
}

}  // namespace rcf
