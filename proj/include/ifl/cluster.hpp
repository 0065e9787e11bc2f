#pragma once

#include "ifl/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace ifl::cluster {

/// A partition of n instances into s clusters.
struct HardClustering {
  Labels assignment;
  std::size_t s = 0;
  std::vector<std::size_t> sizes;
  std::optional<Matrix> centroids;

  std::size_t n() const { return assignment.size(); }

  /// Builds sizes from `assignment`; throws DataError if an index is >= s.
  static HardClustering from_assignment(Labels assignment, std::size_t s, std::optional<Matrix> centroids = {});

  /// Throws DataError if sizes disagree with the assignment.
  void validate() const;
};

/// Cluster `assignment` by nearest centroid (squared Euclidean, ties to the lowest index).
Labels nearest_centroid_assignment(const Matrix& x, const Matrix& centroids);

/// Sum of squared distances of each row to its assigned centroid.
double inertia(const Matrix& x, const Matrix& centroids, const Labels& assignment);

struct KMeansOptions {
  std::size_t max_iter = 300;
  double tol = 1e-8;              // stop once every centroid moves less than this (Euclidean)
  std::size_t restarts = 1;       // seeded k-means++ restarts; the lowest-inertia run wins
  std::uint64_t seed = 0;
  std::optional<Matrix> initial;  // given centroids override seeding (restarts then ignored)
};

struct KMeansResult {
  HardClustering clustering;
  double inertia = 0.0;
  /// Inertia after each assignment step of the winning run.
  std::vector<double> inertia_trace;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Lloyd's algorithm. Empty clusters are re-seeded at the point farthest from its assigned centroid.
KMeansResult kmeans(const Matrix& x, std::size_t s, const KMeansOptions& opts = {});

/// k-means++ seeding.
Matrix kmeanspp_seed(const Matrix& x, std::size_t s, std::uint64_t seed);

enum class Linkage { Average, Ward };

/// Bottom-up agglomeration until `s` clusters remain. Average linkage uses mean pairwise Euclidean
/// distance; ward merges the pair with the smallest increase in within-cluster sum of squares.
/// Equal merge costs go to the lexicographically smallest pair. Output clusters are numbered by
/// their smallest member.
HardClustering hca(const Matrix& x, std::size_t s, Linkage linkage);

/// Square cost matrix for the assignment problem.
using CostMatrix = Matrix;

struct Assignment {
  std::vector<std::size_t> row_to_col;
  double cost = 0.0;
};

/// Minimum-cost perfect matching (Kuhn-Munkres with potentials, O(n^3)).
Assignment hungarian(const CostMatrix& cost);

/// counts(i, j) = number of instances with cluster i and label j; shape s x max(label)+1.
Matrix contingency(const Labels& clusters, std::size_t s, const Labels& labels, std::size_t classes);

/// The one-to-one cluster -> class mapping maximizing agreement, found on the
/// contingency matrix padded to square. Clusters mapped to a padding class get no_class.
struct ClusterClassMapping {
  static constexpr std::size_t no_class = static_cast<std::size_t>(-1);
  std::vector<std::size_t> cluster_to_class;
  std::size_t matched = 0;
};

ClusterClassMapping best_mapping(const Labels& clusters, std::size_t s, const Labels& labels);

/// Unsupervised clustering accuracy in [0, 1].
double clustering_accuracy(const HardClustering& pred, const Labels& labels);
double clustering_accuracy(const Labels& pred, const Labels& labels);

struct PerClusterAccuracy {
  std::vector<double> accuracy;           // one per cluster
  std::vector<std::size_t> mapped_class;  // ClusterClassMapping::no_class when unmatched
  std::vector<bool> empty;                // flagged clusters have accuracy 0
};

/// Fraction of each cluster's members carrying the class the global mapping assigns to it.
PerClusterAccuracy per_cluster_accuracy(const HardClustering& pred, const Labels& labels);

}  // namespace ifl::cluster
