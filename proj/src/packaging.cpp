#include "ifl/features.hpp"

#include "ifl/errors.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace ifl::core {

namespace {

void require_raw(const IflFeatureTable& raw, const char* who) {
  if (raw.mode != FeatureMode::ClassificationRaw) {
    throw DataError(std::string(who) + ": expects a raw classification table, got " + to_string(raw.mode));
  }
  raw.validate();
}

}  // namespace

IflFeatureTable package_technique1(const IflFeatureTable& raw) {
  require_raw(raw, "package_technique1");
  const std::size_t s = raw.s;
  const auto n = raw.rows();
  const auto accuracy_col = static_cast<Eigen::Index>(1 + s);

  IflFeatureTable out;
  out.mode = FeatureMode::Technique1;
  out.s = s;
  out.columns = feature_columns(out.mode, s);
  out.features.resize(static_cast<Eigen::Index>(n * s), 3);
  out.instance_id.reserve(n * s);
  out.version_id.reserve(n * s);
  if (raw.labels) out.labels.emplace();
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = static_cast<Eigen::Index>(i);
    for (std::size_t v = 0; v < s; ++v) {
      const auto dst = static_cast<Eigen::Index>(i * s + v);
      out.features(dst, 0) = raw.features(src, 0);
      out.features(dst, 1) = raw.features(src, static_cast<Eigen::Index>(1 + v));
      out.features(dst, 2) = raw.features(src, accuracy_col);
      out.instance_id.push_back(raw.instance_id[i]);
      out.version_id.push_back(v);
      if (raw.labels) out.labels->push_back((*raw.labels)[i]);
    }
  }
  out.runs = raw.runs;
  out.reference = raw.reference;
  out.warnings = raw.warnings;
  return out;
}

IflFeatureTable package_technique2(const IflFeatureTable& raw) {
  require_raw(raw, "package_technique2");
  const std::size_t s = raw.s;
  const auto ws = static_cast<Eigen::Index>(s);

  IflFeatureTable out = raw;
  out.mode = FeatureMode::Technique2;
  out.columns = feature_columns(out.mode, s);
  out.features.resize(raw.features.rows(), ws + 2);
  out.features.col(0) = raw.features.col(0);
  out.features.col(1) = raw.features.col(1 + ws);
  out.features.middleCols(2, ws) = raw.features.middleCols(1, ws);
  return out;
}

namespace {

// Row indices of each instance's versions, keyed by instance id; every instance must have versions 0..s-1.
std::map<std::size_t, std::vector<std::size_t>> group_versions(std::size_t rows,
                                                               const std::vector<std::size_t>& instance_id,
                                                               const std::vector<std::size_t>& version_id,
                                                               std::size_t s) {
  if (instance_id.size() != rows || version_id.size() != rows) {
    throw ShapeError("aggregate: provenance length != row count");
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < rows; ++k) {
    auto& g = groups[instance_id[k]];
    if (g.empty()) g.assign(s, rows);
    if (version_id[k] >= s) throw DataError("aggregate: version id out of range");
    if (g[version_id[k]] != rows) {
      throw DataError("aggregate: instance " + std::to_string(instance_id[k]) + " repeats version " +
                      std::to_string(version_id[k]));
    }
    g[version_id[k]] = k;
  }
  for (const auto& [id, g] : groups) {
    if (std::find(g.begin(), g.end(), rows) != g.end()) {
      throw DataError("aggregate: instance " + std::to_string(id) + " is missing versions");
    }
  }
  return groups;
}

}  // namespace

InstanceLabels aggregate_versions(const Matrix& scores, const std::vector<std::size_t>& instance_id,
                                  const std::vector<std::size_t>& version_id, std::size_t s) {
  const auto groups = group_versions(static_cast<std::size_t>(scores.rows()), instance_id, version_id, s);
  InstanceLabels out;
  for (const auto& [id, rows] : groups) {
    Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(scores.cols());
    for (auto k : rows) total += scores.row(static_cast<Eigen::Index>(k));
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < total.size(); ++c) {
      if (total(c) > total(best)) best = c;
    }
    out.instance_id.push_back(id);
    out.label.push_back(static_cast<std::size_t>(best));
  }
  return out;
}

InstanceLabels aggregate_votes(const Labels& predicted, const std::vector<double>& version_weight,
                               const std::vector<std::size_t>& instance_id,
                               const std::vector<std::size_t>& version_id, std::size_t s) {
  if (version_weight.size() != predicted.size()) throw ShapeError("aggregate_votes: weight length != row count");
  const auto groups = group_versions(predicted.size(), instance_id, version_id, s);
  InstanceLabels out;
  for (const auto& [id, rows] : groups) {
    std::map<std::size_t, std::size_t> votes;
    for (auto k : rows) ++votes[predicted[k]];
    std::size_t top = 0;
    for (const auto& [cls, count] : votes) top = std::max(top, count);

    std::size_t winner = 0;
    double nearest = 0.0;
    bool found = false;
    for (auto k : rows) {
      const auto cls = predicted[k];
      if (votes[cls] != top) continue;
      const double w = version_weight[k];
      if (!found || w < nearest || (w == nearest && cls < winner)) {
        winner = cls;
        nearest = w;
        found = true;
      }
    }
    out.instance_id.push_back(id);
    out.label.push_back(winner);
  }
  return out;
}

}  // namespace ifl::core
