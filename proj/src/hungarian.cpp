#include "ifl/cluster.hpp"

#include "ifl/errors.hpp"

#include <limits>
#include <string>

namespace ifl::cluster {

Assignment hungarian(const CostMatrix& cost) {
  if (cost.rows() != cost.cols()) {
    throw ShapeError("hungarian: cost matrix must be square, got " + std::to_string(cost.rows()) + "x" +
                     std::to_string(cost.cols()));
  }
  require_finite(cost, "hungarian cost");
  const auto n = static_cast<std::size_t>(cost.rows());
  Assignment out;
  if (n == 0) return out;

  // Shortest augmenting paths with row/column potentials; index 0 is a virtual column.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> col_owner(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    col_owner[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t r = col_owner[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double reduced = cost(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) - u[r] - v[c];
        if (reduced < minv[c]) {
          minv[c] = reduced;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[col_owner[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (col_owner[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      col_owner[col0] = col_owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  out.row_to_col.assign(n, 0);
  for (std::size_t c = 1; c <= n; ++c) out.row_to_col[col_owner[c] - 1] = c - 1;
  for (std::size_t r = 0; r < n; ++r) {
    out.cost += cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(out.row_to_col[r]));
  }
  return out;
}

}  // namespace ifl::cluster
