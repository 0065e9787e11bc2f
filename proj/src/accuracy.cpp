#include "ifl/cluster.hpp"

#include "ifl/errors.hpp"

#include <algorithm>
#include <string>

namespace ifl::cluster {

namespace {

std::size_t count_of(const Labels& labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

void require_same_length(const Labels& pred, const Labels& labels) {
  if (pred.size() != labels.size()) {
    throw ShapeError("clustering accuracy: " + std::to_string(pred.size()) + " predictions vs " +
                     std::to_string(labels.size()) + " labels");
  }
}

}  // namespace

Matrix contingency(const Labels& clusters, std::size_t s, const Labels& labels, std::size_t classes) {
  require_same_length(clusters, labels);
  Matrix counts = Matrix::Zero(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i] >= s || labels[i] >= classes) throw DataError("contingency: index out of range");
    counts(static_cast<Eigen::Index>(clusters[i]), static_cast<Eigen::Index>(labels[i])) += 1.0;
  }
  return counts;
}

ClusterClassMapping best_mapping(const Labels& clusters, std::size_t s, const Labels& labels) {
  const std::size_t classes = count_of(labels);
  const Matrix counts = contingency(clusters, s, labels, classes);
  const auto dim = static_cast<Eigen::Index>(std::max(s, classes));
  Matrix cost = Matrix::Zero(dim, dim);
  cost.topLeftCorner(counts.rows(), counts.cols()) = -counts;

  const auto match = hungarian(cost);
  ClusterClassMapping mapping;
  mapping.cluster_to_class.assign(s, ClusterClassMapping::no_class);
  for (std::size_t c = 0; c < s; ++c) {
    const std::size_t cls = match.row_to_col[c];
    if (cls < classes) {
      mapping.cluster_to_class[c] = cls;
      mapping.matched += static_cast<std::size_t>(counts(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(cls)));
    }
  }
  return mapping;
}

double clustering_accuracy(const Labels& pred, const Labels& labels) {
  require_same_length(pred, labels);
  if (pred.empty()) return 0.0;
  const auto mapping = best_mapping(pred, count_of(pred), labels);
  return static_cast<double>(mapping.matched) / static_cast<double>(pred.size());
}

double clustering_accuracy(const HardClustering& pred, const Labels& labels) {
  require_same_length(pred.assignment, labels);
  if (pred.assignment.empty()) return 0.0;
  const auto mapping = best_mapping(pred.assignment, pred.s, labels);
  return static_cast<double>(mapping.matched) / static_cast<double>(pred.n());
}

PerClusterAccuracy per_cluster_accuracy(const HardClustering& pred, const Labels& labels) {
  require_same_length(pred.assignment, labels);
  const auto mapping = best_mapping(pred.assignment, pred.s, labels);
  PerClusterAccuracy out;
  out.mapped_class = mapping.cluster_to_class;
  out.accuracy.assign(pred.s, 0.0);
  out.empty.assign(pred.s, false);
  std::vector<std::size_t> hits(pred.s, 0), sizes(pred.s, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = pred.assignment[i];
    ++sizes[c];
    if (labels[i] == mapping.cluster_to_class[c]) ++hits[c];
  }
  for (std::size_t c = 0; c < pred.s; ++c) {
    if (sizes[c] == 0) {
      out.empty[c] = true;
      continue;
    }
    out.accuracy[c] = static_cast<double>(hits[c]) / static_cast<double>(sizes[c]);
  }
  return out;
}

}  // namespace ifl::cluster
