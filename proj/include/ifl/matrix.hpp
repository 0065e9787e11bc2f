#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace ifl {

// Row-major so that one instance is one contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Integer class or cluster indices, one per instance.
using Labels = std::vector<std::size_t>;

/// Throws ShapeError unless `m` is rows x cols.
void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, std::string_view what);

/// Throws NumericError if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);

bool all_finite(const Matrix& m);

/// Copies the given rows of `m`, in order.
Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& rows);

/// [a | b]; both must have the same row count.
Matrix hconcat(const Matrix& a, const Matrix& b);

/// Squared Euclidean distance between two rows.
template <typename A, typename B>
double squared_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a - b).squaredNorm();
}

/// Index of the nearest row of `centroids` to `point` (squared Euclidean, ties -> lowest index).
template <typename P>
std::size_t nearest_row(const Eigen::MatrixBase<P>& point, const Matrix& centroids) {
  std::size_t best = 0;
  double best_d = squared_distance(point, centroids.row(0));
  for (Eigen::Index j = 1; j < centroids.rows(); ++j) {
    const double d = squared_distance(point, centroids.row(j));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(j);
    }
  }
  return best;
}

}  // namespace ifl
