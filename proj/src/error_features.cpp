#include "ifl/features.hpp"

#include "ifl/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace ifl::core {

std::size_t nearest_cluster(const Eigen::RowVectorXd& z, const dec::ClusterModel& model) {
  if (model.centroids.rows() == 0) throw DataError("nearest_cluster: model has no clusters");
  if (z.size() != model.centroids.cols()) {
    throw ShapeError("nearest_cluster: latent dim " + std::to_string(z.size()) + " vs centroid dim " +
                     std::to_string(model.centroids.cols()));
  }
  return nearest_row(z, model.centroids);
}

double confidence(const Eigen::RowVectorXd& z, const dec::ClusterModel& model) {
  const auto& sizes = model.sizes();
  if (sizes.size() != model.s()) throw DataError("confidence: cluster sizes do not match centroids");
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (total == 0) throw DataError("confidence: model has no clustered instances");
  return static_cast<double>(sizes[nearest_cluster(z, model)]) / static_cast<double>(total);
}

std::vector<double> weight(const Eigen::RowVectorXd& z, const dec::ClusterModel& model) {
  if (z.size() != model.centroids.cols()) throw ShapeError("weight: latent/centroid dim mismatch");
  std::vector<double> out(model.s());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = (z - model.centroids.row(static_cast<Eigen::Index>(j))).norm();
  }
  return out;
}

double accuracy_feature(const Eigen::RowVectorXd& z, const dec::ClusterModel& model,
                        const cluster::PerClusterAccuracy& per_cluster) {
  if (per_cluster.accuracy.size() != model.s()) throw ShapeError("accuracy_feature: per-cluster accuracy size != s");
  return per_cluster.accuracy[nearest_cluster(z, model)];
}

ErrorFeatureRow error_features(const Eigen::RowVectorXd& z, const dec::ClusterModel& model,
                               const cluster::PerClusterAccuracy* per_cluster) {
  ErrorFeatureRow row;
  row.confidence = confidence(z, model);
  row.weight = weight(z, model);
  if (per_cluster != nullptr) row.accuracy = accuracy_feature(z, model, *per_cluster);
  return row;
}

double trackability_threshold(std::size_t r, std::size_t s) {
  if (s == 0) throw ConfigError("trackability_threshold: s must be positive");
  return (static_cast<double>(r) + 100.0 / static_cast<double>(s)) / 100.0;
}

Tracking track_clusters(const ClusterMembership& reference, const ClusterMembership& current, std::size_t r,
                        std::optional<double> accuracy) {
  if (reference.s != current.s) throw ConfigError("track_clusters: runs have different cluster counts");
  if (reference.instance_ids.size() != reference.assignment.size() ||
      current.instance_ids.size() != current.assignment.size()) {
    throw ShapeError("track_clusters: membership ids and assignments differ in length");
  }
  const std::size_t s = current.s;

  std::size_t max_id = 0;
  for (auto id : reference.instance_ids) max_id = std::max(max_id, id);
  for (auto id : current.instance_ids) max_id = std::max(max_id, id);
  constexpr std::size_t absent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> ref_cluster(max_id + 1, absent);
  for (std::size_t k = 0; k < reference.instance_ids.size(); ++k) {
    ref_cluster[reference.instance_ids[k]] = reference.assignment[k];
  }

  // counts(current cluster, reference cluster) over instances both runs clustered.
  Matrix counts = Matrix::Zero(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
  Tracking t;
  for (std::size_t k = 0; k < current.instance_ids.size(); ++k) {
    const auto ref = ref_cluster[current.instance_ids[k]];
    if (ref == absent) continue;
    counts(static_cast<Eigen::Index>(current.assignment[k]), static_cast<Eigen::Index>(ref)) += 1.0;
    ++t.shared;
  }
  if (t.shared == 0) throw DataError("track_clusters: the runs share no instances");

  const auto match = cluster::hungarian(-counts);
  t.permutation = match.row_to_col;
  t.overlap = -match.cost / static_cast<double>(t.shared);
  t.agreement = accuracy.value_or(t.overlap);
  t.threshold = trackability_threshold(r, s);
  t.trackable = t.agreement >= t.threshold;
  return t;
}

std::vector<double> align_weights(const std::vector<double>& w, const std::vector<std::size_t>& permutation) {
  if (w.size() != permutation.size()) throw ShapeError("align_weights: permutation length != weight length");
  std::vector<double> out(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) out.at(permutation[j]) = w[j];
  return out;
}

}  // namespace ifl::core
