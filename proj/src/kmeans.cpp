#include "ifl/cluster.hpp"

#include "ifl/errors.hpp"
#include "ifl/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace ifl::cluster {

HardClustering HardClustering::from_assignment(Labels assignment, std::size_t s, std::optional<Matrix> centroids) {
  HardClustering h;
  h.s = s;
  h.sizes.assign(s, 0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] >= s) {
      throw DataError("cluster index " + std::to_string(assignment[i]) + " at instance " + std::to_string(i) +
                      " is out of range for s=" + std::to_string(s));
    }
    ++h.sizes[assignment[i]];
  }
  h.assignment = std::move(assignment);
  h.centroids = std::move(centroids);
  return h;
}

void HardClustering::validate() const {
  std::vector<std::size_t> counts(s, 0);
  for (auto a : assignment) {
    if (a >= s) throw DataError("cluster index out of range");
    ++counts[a];
  }
  if (counts != sizes) throw DataError("cluster sizes disagree with assignment");
  if (centroids && static_cast<std::size_t>(centroids->rows()) != s) throw DataError("centroid count != s");
}

Labels nearest_centroid_assignment(const Matrix& x, const Matrix& centroids) {
  if (centroids.rows() == 0) throw ShapeError("nearest_centroid_assignment: no centroids");
  if (x.cols() != centroids.cols()) throw ShapeError("nearest_centroid_assignment: dimension mismatch");
  Labels out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = nearest_row(x.row(i), centroids);
  return out;
}

double inertia(const Matrix& x, const Matrix& centroids, const Labels& assignment) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    total += squared_distance(x.row(i), centroids.row(static_cast<Eigen::Index>(assignment[static_cast<std::size_t>(i)])));
  }
  return total;
}

Matrix kmeanspp_seed(const Matrix& x, std::size_t s, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  Rng rng(seed);
  Matrix centroids(static_cast<Eigen::Index>(s), x.cols());
  std::vector<bool> chosen(n, false);

  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t pick = first(rng);
  chosen[pick] = true;
  centroids.row(0) = x.row(static_cast<Eigen::Index>(pick));

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x.row(static_cast<Eigen::Index>(i)), centroids.row(0));

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 1; k < s; ++k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    } else {
      // Every point coincides with a centroid already; take the first unused instance.
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
    }
    chosen[pick] = true;
    centroids.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(x.row(static_cast<Eigen::Index>(i)), centroids.row(static_cast<Eigen::Index>(k))));
    }
  }
  return centroids;
}

namespace {

KMeansResult lloyd(const Matrix& x, Matrix centroids, const KMeansOptions& opts) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto s = static_cast<std::size_t>(centroids.rows());
  KMeansResult result;
  Labels assignment;
  for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
    assignment = nearest_centroid_assignment(x, centroids);
    result.inertia_trace.push_back(inertia(x, centroids, assignment));
    ++result.iterations;

    Matrix sums = Matrix::Zero(centroids.rows(), centroids.cols());
    std::vector<std::size_t> counts(s, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(assignment[i])) += x.row(static_cast<Eigen::Index>(i));
      ++counts[assignment[i]];
    }
    Matrix next = centroids;
    for (std::size_t k = 0; k < s; ++k) {
      if (counts[k] > 0) {
        next.row(static_cast<Eigen::Index>(k)) = sums.row(static_cast<Eigen::Index>(k)) / static_cast<double>(counts[k]);
      }
    }
    std::vector<bool> donor(n, false);
    for (std::size_t k = 0; k < s; ++k) {
      if (counts[k] > 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (donor[i]) continue;
        const double d = squared_distance(x.row(static_cast<Eigen::Index>(i)), centroids.row(static_cast<Eigen::Index>(assignment[i])));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      donor[far] = true;
      next.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(far));
    }

    double shift = 0.0;
    for (std::size_t k = 0; k < s; ++k) {
      shift = std::max(shift, std::sqrt(squared_distance(next.row(static_cast<Eigen::Index>(k)), centroids.row(static_cast<Eigen::Index>(k)))));
    }
    centroids = std::move(next);
    if (shift < opts.tol) {
      result.converged = true;
      break;
    }
  }
  assignment = nearest_centroid_assignment(x, centroids);
  result.inertia = inertia(x, centroids, assignment);
  result.clustering = HardClustering::from_assignment(std::move(assignment), s, std::move(centroids));
  return result;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, std::size_t s, const KMeansOptions& opts) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0) throw DataError("kmeans: empty input");
  if (s == 0) throw ConfigError("kmeans: s must be positive");
  if (s > n) throw ConfigError("kmeans: s=" + std::to_string(s) + " exceeds instance count " + std::to_string(n));

  if (opts.initial) {
    require_shape(*opts.initial, static_cast<Eigen::Index>(s), x.cols(), "kmeans initial centroids");
    return lloyd(x, *opts.initial, opts);
  }
  KMeansResult best;
  const std::size_t restarts = std::max<std::size_t>(opts.restarts, 1);
  for (std::size_t r = 0; r < restarts; ++r) {
    auto run = lloyd(x, kmeanspp_seed(x, s, derive_seed(opts.seed, r)), opts);
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

}  // namespace ifl::cluster
