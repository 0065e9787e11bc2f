#pragma once

#include "ifl/cluster.hpp"
#include "ifl/dec.hpp"
#include "ifl/matrix.hpp"
#include "ifl/nn.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ifl::core {

// ---------------------------------------------------------------------------
// Inner folding

struct FoldAssignment {
  std::vector<std::size_t> fold_of;
  std::size_t r = 0;

  std::size_t n() const { return fold_of.size(); }
  /// Instance ids in fold `j` (the inner test set of run j), ascending.
  std::vector<std::size_t> fold(std::size_t j) const;
  /// Instance ids outside fold `j` (the inner train set of run j), ascending.
  std::vector<std::size_t> complement(std::size_t j) const;
  std::vector<std::size_t> fold_sizes() const;
};

/// Seeded random partition of n instances into r folds whose sizes differ by at most one.
FoldAssignment inner_folding(std::size_t n, std::size_t r, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Per-instance error features

struct ErrorFeatureRow {
  double confidence = 0.0;
  std::vector<double> weight;
  std::optional<double> accuracy;
};

/// Cluster whose centroid is nearest to z (squared Euclidean, ties to the lowest index).
std::size_t nearest_cluster(const Eigen::RowVectorXd& z, const dec::ClusterModel& model);

/// size(nearest cluster) / total clustered instances.
double confidence(const Eigen::RowVectorXd& z, const dec::ClusterModel& model);

/// Euclidean distance from z to every centroid.
std::vector<double> weight(const Eigen::RowVectorXd& z, const dec::ClusterModel& model);

/// Per-cluster accuracy of z's nearest cluster.
double accuracy_feature(const Eigen::RowVectorXd& z, const dec::ClusterModel& model,
                        const cluster::PerClusterAccuracy& per_cluster);

ErrorFeatureRow error_features(const Eigen::RowVectorXd& z, const dec::ClusterModel& model,
                               const cluster::PerClusterAccuracy* per_cluster = nullptr);

// ---------------------------------------------------------------------------
// Cluster tracking across runs

/// Cluster memberships of one run, keyed by global instance id.
struct ClusterMembership {
  std::vector<std::size_t> instance_ids;
  Labels assignment;
  std::size_t s = 0;
};

/// Minimum agreement for clusters to be trackable: r% + (100/s)%, as a fraction.
double trackability_threshold(std::size_t r, std::size_t s);

struct Tracking {
  /// permutation[j] = reference cluster matched to current cluster j.
  std::vector<std::size_t> permutation;
  std::size_t shared = 0;
  double overlap = 0.0;        // fraction of shared instances agreeing under the permutation
  double agreement = 0.0;      // value compared with the threshold (accuracy if supplied, else overlap)
  double threshold = 0.0;
  bool trackable = true;
};

/// Aligns `current` to `reference` by maximizing co-assignment counts on the instances both runs saw.
/// When `accuracy` is given (classification) it is tested against the threshold instead of the overlap.
Tracking track_clusters(const ClusterMembership& reference, const ClusterMembership& current, std::size_t r,
                        std::optional<double> accuracy = std::nullopt);

/// out[permutation[j]] = weight[j].
std::vector<double> align_weights(const std::vector<double>& weight, const std::vector<std::size_t>& permutation);

// ---------------------------------------------------------------------------
// Pipelines

struct IflConfig {
  std::size_t s = 0;
  std::size_t r = 10;
  std::vector<std::size_t> hidden_dims{500, 500, 2000};
  std::size_t latent_dim = 10;
  nn::TrainConfig autoencoder;
  dec::DecConfig dec;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // concurrent inner-fold runs

  std::vector<std::size_t> encoder_dims(std::size_t input_dim) const;
  void validate() const;
};

enum class FeatureMode { Clustering, ClassificationRaw, Technique1, Technique2 };

std::string to_string(FeatureMode mode);
FeatureMode feature_mode_from_string(const std::string& name);

/// Diagnostics for one DEC fit inside a pipeline.
struct RunSummary {
  std::size_t run = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<std::size_t> permutation;
  double agreement = 1.0;
  bool trackable = true;
  std::optional<double> inner_accuracy;
  std::vector<std::size_t> missing_classes;
};

struct IflFeatureTable {
  FeatureMode mode = FeatureMode::Clustering;
  std::size_t s = 0;
  Matrix features;
  std::vector<std::string> columns;
  std::vector<std::size_t> instance_id;
  std::vector<std::size_t> version_id;  // technique 1 only
  std::optional<Labels> labels;
  std::vector<RunSummary> runs;
  /// Memberships of the run all others were aligned to.
  std::optional<ClusterMembership> reference;
  std::vector<std::string> warnings;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  bool has_versions() const { return !version_id.empty(); }
  /// Throws DataError when widths, provenance, or labels disagree with the mode.
  void validate() const;
};

/// Column names for a mode with s clusters.
std::vector<std::string> feature_columns(FeatureMode mode, std::size_t s);

/// Inner folding over all of x; one (confidence, weight...) row per instance, ordered by instance id.
IflFeatureTable ifl_cluster_features(const Matrix& x, const IflConfig& cfg);

/// Inner folding over the training data with labels; raw rows (confidence, weight..., accuracy).
IflFeatureTable ifl_classification_train_features(const Matrix& x_train, const Labels& y_train,
                                                  const IflConfig& cfg);

/// One DEC fit on all training data, features for each test row. With `align_to`, weight columns are
/// permuted into the reference run's cluster order.
IflFeatureTable ifl_classification_test_features(const Matrix& x_train, const Labels& y_train,
                                                 const Matrix& x_test, const IflConfig& cfg,
                                                 const ClusterMembership* align_to = nullptr);

/// n*s rows of (confidence, weight[v], accuracy); labels replicated per version.
IflFeatureTable package_technique1(const IflFeatureTable& raw);

/// n rows of (confidence, accuracy, weight...).
IflFeatureTable package_technique2(const IflFeatureTable& raw);

/// Per-instance labels from per-version class scores: scores are summed over each instance's
/// versions and the argmax (ties to the lowest class) wins. Output is ordered by instance id.
struct InstanceLabels {
  std::vector<std::size_t> instance_id;
  Labels label;
};

InstanceLabels aggregate_versions(const Matrix& scores, const std::vector<std::size_t>& instance_id,
                                  const std::vector<std::size_t>& version_id, std::size_t s);

/// Majority vote for hard-label classifiers. Tied classes are resolved by the version with the smallest
/// weight value among those voting for a tied class, then by the lowest class index.
InstanceLabels aggregate_votes(const Labels& predicted, const std::vector<double>& version_weight,
                               const std::vector<std::size_t>& instance_id,
                               const std::vector<std::size_t>& version_id, std::size_t s);

}  // namespace ifl::core
