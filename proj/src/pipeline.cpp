#include "ifl/features.hpp"

#include "ifl/errors.hpp"
#include "ifl/random.hpp"

#include <algorithm>
#include <future>
#include <numeric>
#include <sstream>
#include <string>

namespace ifl::core {

std::vector<std::size_t> IflConfig::encoder_dims(std::size_t input_dim) const {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(latent_dim);
  return dims;
}

void IflConfig::validate() const {
  if (s == 0) throw ConfigError("ifl: s must be positive");
  if (r < 2) throw ConfigError("ifl: r must be at least 2");
  if (latent_dim == 0) throw ConfigError("ifl: latent dim must be positive");
  if (threads == 0) throw ConfigError("ifl: threads must be positive");
  dec.validate();
}

std::string to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::Clustering: return "clustering";
    case FeatureMode::ClassificationRaw: return "classification-raw";
    case FeatureMode::Technique1: return "classification-technique1";
    case FeatureMode::Technique2: return "classification-technique2";
  }
  return "unknown";
}

FeatureMode feature_mode_from_string(const std::string& name) {
  for (auto m : {FeatureMode::Clustering, FeatureMode::ClassificationRaw, FeatureMode::Technique1,
                 FeatureMode::Technique2}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown feature table mode '" + name + "'");
}

std::vector<std::string> feature_columns(FeatureMode mode, std::size_t s) {
  std::vector<std::string> weights;
  for (std::size_t j = 0; j < s; ++j) weights.push_back("weight_" + std::to_string(j));
  std::vector<std::string> cols{"confidence"};
  switch (mode) {
    case FeatureMode::Clustering:
      cols.insert(cols.end(), weights.begin(), weights.end());
      break;
    case FeatureMode::ClassificationRaw:
      cols.insert(cols.end(), weights.begin(), weights.end());
      cols.push_back("accuracy");
      break;
    case FeatureMode::Technique1:
      cols.push_back("weight");
      cols.push_back("accuracy");
      break;
    case FeatureMode::Technique2:
      cols.push_back("accuracy");
      cols.insert(cols.end(), weights.begin(), weights.end());
      break;
  }
  return cols;
}

void IflFeatureTable::validate() const {
  const auto expected = feature_columns(mode, s);
  if (columns != expected) throw DataError("feature table: columns do not match mode " + to_string(mode));
  if (features.cols() != static_cast<Eigen::Index>(columns.size())) {
    throw DataError("feature table: " + std::to_string(features.cols()) + " columns, expected " +
                    std::to_string(columns.size()));
  }
  if (instance_id.size() != rows()) throw DataError("feature table: provenance length != row count");
  if ((mode == FeatureMode::Technique1) != has_versions()) {
    throw DataError("feature table: version ids are present iff the table uses technique 1");
  }
  if (has_versions() && version_id.size() != rows()) throw DataError("feature table: version id length != row count");
  if (labels && labels->size() != rows()) throw DataError("feature table: label count != row count");
}

namespace {

struct FoldRun {
  dec::ClusterModel model;
  ClusterMembership membership;
  std::vector<std::size_t> test_ids;
  std::vector<ErrorFeatureRow> rows;
  std::optional<double> inner_accuracy;
  std::vector<std::size_t> missing_classes;
};

Labels select_labels(const Labels& y, const std::vector<std::size_t>& ids) {
  Labels out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(y[id]);
  return out;
}

// Trains the autoencoder and DEC on x[train_ids] and featurizes `test` against the result.
FoldRun fit_and_featurize(const Matrix& x, const Labels* y, const std::vector<std::size_t>& train_ids,
                          const Matrix& test, std::vector<std::size_t> test_ids, const IflConfig& cfg,
                          std::uint64_t run_seed) {
  FoldRun run;
  const Matrix x_train = select_rows(x, train_ids);
  nn::TrainConfig ae_cfg = cfg.autoencoder;
  ae_cfg.seed = derive_seed(run_seed, 0);
  const auto ae = nn::train_autoencoder(x_train, cfg.encoder_dims(static_cast<std::size_t>(x.cols())), ae_cfg);
  run.model = dec::dec_fit(ae.params, x_train, cfg.s, cfg.dec, derive_seed(run_seed, 1));
  run.membership = ClusterMembership{train_ids, run.model.hard.assignment, cfg.s};

  std::optional<cluster::PerClusterAccuracy> per_cluster;
  if (y != nullptr) {
    const Labels y_train = select_labels(*y, train_ids);
    per_cluster = cluster::per_cluster_accuracy(run.model.hard, y_train);
    run.inner_accuracy = cluster::clustering_accuracy(run.model.hard, y_train);
    std::vector<bool> seen(cfg.s, false);
    for (auto label : y_train) {
      if (label < cfg.s) seen[label] = true;
    }
    for (std::size_t c = 0; c < cfg.s; ++c) {
      if (!seen[c]) run.missing_classes.push_back(c);
    }
  }

  const Matrix z = nn::encode(run.model.encoder, test);
  run.rows.reserve(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    run.rows.push_back(error_features(z.row(i), run.model, per_cluster ? &*per_cluster : nullptr));
  }
  run.test_ids = std::move(test_ids);
  return run;
}

// Runs every inner fold, at most cfg.threads at a time. Results are indexed by run, so the merge order
// does not depend on scheduling.
std::vector<FoldRun> run_inner_folds(const Matrix& x, const Labels* y, const FoldAssignment& folds,
                                     const IflConfig& cfg) {
  std::vector<FoldRun> runs(folds.r);
  auto one = [&](std::size_t j) {
    try {
      auto test_ids = folds.fold(j);
      const Matrix test = select_rows(x, test_ids);
      return fit_and_featurize(x, y, folds.complement(j), test, std::move(test_ids), cfg, derive_seed(cfg.seed, 100 + j));
    } catch (const DegenerateClusterError& e) {
      throw DegenerateClusterError("inner-fold run " + std::to_string(j) + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError("inner-fold run " + std::to_string(j) + ": " + e.what());
    }
  };
  if (cfg.threads <= 1) {
    for (std::size_t j = 0; j < folds.r; ++j) runs[j] = one(j);
    return runs;
  }
  for (std::size_t begin = 0; begin < folds.r; begin += cfg.threads) {
    const std::size_t end = std::min(begin + cfg.threads, folds.r);
    std::vector<std::future<FoldRun>> pending;
    for (std::size_t j = begin; j < end; ++j) pending.push_back(std::async(std::launch::async, one, j));
    for (std::size_t j = begin; j < end; ++j) runs[j] = pending[j - begin].get();
  }
  return runs;
}

RunSummary summarize(std::size_t index, const FoldRun& run) {
  RunSummary s;
  s.run = index;
  s.train_size = run.membership.instance_ids.size();
  s.test_size = run.test_ids.size();
  s.converged = run.model.converged;
  s.iterations = run.model.iterations;
  s.permutation.resize(run.model.s());
  std::iota(s.permutation.begin(), s.permutation.end(), 0);
  s.inner_accuracy = run.inner_accuracy;
  s.missing_classes = run.missing_classes;
  return s;
}

std::string untrackable_warning(std::size_t run, const Tracking& t) {
  std::ostringstream os;
  os << "run " << run << ": cluster agreement " << t.agreement << " is below the trackability threshold "
     << t.threshold << "; weight columns may be misaligned";
  return os.str();
}

IflFeatureTable assemble(const Matrix& x, const Labels* y, const IflConfig& cfg, FeatureMode mode) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0) throw DataError("ifl: empty data");
  if (y != nullptr && y->size() != n) throw ShapeError("ifl: label count != instance count");
  const auto folds = inner_folding(n, cfg.r, derive_seed(cfg.seed, 99));
  const std::size_t smallest_train = n - (n + cfg.r - 1) / cfg.r;
  if (smallest_train < cfg.s) {
    throw ConfigError("ifl: inner train sets of " + std::to_string(smallest_train) + " instances cannot hold s=" +
                      std::to_string(cfg.s) + " clusters");
  }

  auto runs = run_inner_folds(x, y, folds, cfg);

  IflFeatureTable table;
  table.mode = mode;
  table.s = cfg.s;
  table.columns = feature_columns(mode, cfg.s);
  table.features = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(table.columns.size()));
  table.instance_id.resize(n);
  std::iota(table.instance_id.begin(), table.instance_id.end(), 0);
  if (y != nullptr) table.labels = *y;
  table.reference = runs.front().membership;

  for (std::size_t j = 0; j < runs.size(); ++j) {
    auto summary = summarize(j, runs[j]);
    std::vector<std::size_t> permutation = summary.permutation;
    if (j > 0) {
      const auto t = track_clusters(runs.front().membership, runs[j].membership, cfg.r, runs[j].inner_accuracy);
      permutation = t.permutation;
      summary.permutation = t.permutation;
      summary.agreement = t.agreement;
      summary.trackable = t.trackable;
      if (!t.trackable) table.warnings.push_back(untrackable_warning(j, t));
    } else if (runs[j].inner_accuracy) {
      summary.agreement = *runs[j].inner_accuracy;
      summary.trackable = summary.agreement >= trackability_threshold(cfg.r, cfg.s);
    }
    if (!summary.missing_classes.empty()) {
      table.warnings.push_back("run " + std::to_string(j) + ": some classes are absent from the inner train set");
    }
    for (std::size_t k = 0; k < runs[j].test_ids.size(); ++k) {
      const auto row = static_cast<Eigen::Index>(runs[j].test_ids[k]);
      const auto& f = runs[j].rows[k];
      const auto w = align_weights(f.weight, permutation);
      table.features(row, 0) = f.confidence;
      for (std::size_t c = 0; c < cfg.s; ++c) table.features(row, static_cast<Eigen::Index>(1 + c)) = w[c];
      if (mode == FeatureMode::ClassificationRaw) {
        table.features(row, static_cast<Eigen::Index>(1 + cfg.s)) = f.accuracy.value_or(0.0);
      }
    }
    table.runs.push_back(std::move(summary));
  }
  return table;
}

}  // namespace

IflFeatureTable ifl_cluster_features(const Matrix& x, const IflConfig& cfg) {
  return assemble(x, nullptr, cfg, FeatureMode::Clustering);
}

IflFeatureTable ifl_classification_train_features(const Matrix& x_train, const Labels& y_train,
                                                  const IflConfig& cfg) {
  return assemble(x_train, &y_train, cfg, FeatureMode::ClassificationRaw);
}

IflFeatureTable ifl_classification_test_features(const Matrix& x_train, const Labels& y_train,
                                                 const Matrix& x_test, const IflConfig& cfg,
                                                 const ClusterMembership* align_to) {
  cfg.validate();
  if (y_train.size() != static_cast<std::size_t>(x_train.rows())) {
    throw ShapeError("ifl: label count != training instance count");
  }
  if (x_test.rows() > 0 && x_test.cols() != x_train.cols()) throw ShapeError("ifl: test width != train width");

  IflFeatureTable table;
  table.mode = FeatureMode::ClassificationRaw;
  table.s = cfg.s;
  table.columns = feature_columns(table.mode, cfg.s);
  table.features = Matrix::Zero(x_test.rows(), static_cast<Eigen::Index>(table.columns.size()));
  if (x_test.rows() == 0) return table;

  std::vector<std::size_t> train_ids(static_cast<std::size_t>(x_train.rows()));
  std::iota(train_ids.begin(), train_ids.end(), 0);
  std::vector<std::size_t> test_ids(static_cast<std::size_t>(x_test.rows()));
  std::iota(test_ids.begin(), test_ids.end(), 0);
  const auto run = fit_and_featurize(x_train, &y_train, train_ids, x_test, test_ids, cfg, derive_seed(cfg.seed, 50));

  auto summary = summarize(0, run);
  if (align_to != nullptr) {
    const auto t = track_clusters(*align_to, run.membership, cfg.r, run.inner_accuracy);
    summary.permutation = t.permutation;
    summary.agreement = t.agreement;
    summary.trackable = t.trackable;
    if (!t.trackable) table.warnings.push_back(untrackable_warning(0, t));
  }
  for (std::size_t k = 0; k < run.rows.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    const auto w = align_weights(run.rows[k].weight, summary.permutation);
    table.features(row, 0) = run.rows[k].confidence;
    for (std::size_t c = 0; c < cfg.s; ++c) table.features(row, static_cast<Eigen::Index>(1 + c)) = w[c];
    table.features(row, static_cast<Eigen::Index>(1 + cfg.s)) = run.rows[k].accuracy.value_or(0.0);
  }
  table.instance_id = std::move(test_ids);
  table.reference = run.membership;
  table.runs.push_back(std::move(summary));
  return table;
}

}  // namespace ifl::core
