#include "ifl/eval.hpp"

#include "ifl/cluster.hpp"
#include "ifl/errors.hpp"
#include "ifl/random.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <string>

namespace ifl::eval {

std::string to_string(Task t) { return t == Task::Clustering ? "clustering" : "classification"; }

std::string to_string(Method m) {
  switch (m) {
    case Method::KMeans: return "kmeans";
    case Method::HcaAverage: return "hca-average";
    case Method::HcaWard: return "hca-ward";
    case Method::Dec: return "dec";
    case Method::Knn: return "knn";
    case Method::Mlp: return "mlp";
  }
  return "unknown";
}

std::string to_string(InputMode m) {
  switch (m) {
    case InputMode::Primary: return "primary";
    case InputMode::Ifl: return "ifl";
    case InputMode::PrimaryIfl: return "primary+ifl";
  }
  return "unknown";
}

Task task_from_string(const std::string& s) {
  if (s == "clustering") return Task::Clustering;
  if (s == "classification") return Task::Classification;
  throw ConfigError("unknown task '" + s + "'");
}

Method method_from_string(const std::string& s) {
  for (auto m : {Method::KMeans, Method::HcaAverage, Method::HcaWard, Method::Dec, Method::Knn, Method::Mlp}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown method '" + s + "'");
}

InputMode input_mode_from_string(const std::string& s) {
  for (auto m : {InputMode::Primary, InputMode::Ifl, InputMode::PrimaryIfl}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown feature mode '" + s + "'");
}

bool ExperimentConfig::needs_ifl() const {
  return std::any_of(feature_modes.begin(), feature_modes.end(), [](InputMode m) { return m != InputMode::Primary; });
}

void ExperimentConfig::validate() const {
  if (repeats == 0) throw ConfigError("experiment: repeats must be at least 1");
  if (methods.empty()) throw ConfigError("experiment: no methods selected");
  if (feature_modes.empty()) throw ConfigError("experiment: no feature modes selected");
  for (auto m : methods) {
    const bool classifier = m == Method::Knn || m == Method::Mlp;
    if (classifier != (task == Task::Classification)) {
      throw ConfigError("experiment: method " + to_string(m) + " does not apply to a " + to_string(task) + " task");
    }
  }
  if (task == Task::Classification && technique != 1 && technique != 2) {
    throw ConfigError("experiment: technique must be 1 or 2");
  }
  ifl.validate();
}

const Cell* ExperimentReport::find(const std::string& method, const std::string& feature_mode) const {
  for (const auto& c : cells) {
    if (c.method == method && c.feature_mode == feature_mode) return &c;
  }
  return nullptr;
}

void finalize(Cell& cell) {
  if (cell.raw.empty()) {
    cell.mean = 0.0;
    cell.variance = 0.0;
    return;
  }
  const double n = static_cast<double>(cell.raw.size());
  cell.mean = std::accumulate(cell.raw.begin(), cell.raw.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : cell.raw) ss += (v - cell.mean) * (v - cell.mean);
  cell.variance = ss / n;
}

void minmax_scale(Matrix& train, Matrix& other) {
  for (Eigen::Index j = 0; j < train.cols(); ++j) {
    const double lo = train.rows() > 0 ? train.col(j).minCoeff() : 0.0;
    const double hi = train.rows() > 0 ? train.col(j).maxCoeff() : 0.0;
    const double span = hi - lo;
    auto apply = [&](Matrix& m) {
      if (m.rows() == 0) return;
      if (span > 0.0) {
        m.col(j) = (m.col(j).array() - lo) / span;
      } else {
        m.col(j).setZero();
      }
    };
    apply(train);
    if (other.cols() == train.cols()) apply(other);
  }
}

namespace {

std::vector<Cell> make_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (auto m : cfg.methods) {
    for (auto f : cfg.feature_modes) {
      Cell c;
      c.method = to_string(m);
      c.feature_mode = to_string(f);
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

// Seed of one (repeat, method, mode) cell; independent of which other cells the config enables.
std::uint64_t cell_seed(std::uint64_t repeat_seed, Method m, InputMode f) {
  return derive_seed(repeat_seed, 10 + 3 * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(f));
}

Matrix build_input(InputMode mode, const Matrix& primary, const Matrix& ifl_features) {
  switch (mode) {
    case InputMode::Primary: return primary;
    case InputMode::Ifl: return ifl_features;
    case InputMode::PrimaryIfl: return hconcat(primary, ifl_features);
  }
  return primary;
}

struct ClusterScore {
  double accuracy = 0.0;
  std::optional<double> init_accuracy;
};

ClusterScore cluster_and_score(Method method, const Matrix& x, const Labels& labels, const ExperimentConfig& cfg,
                               std::uint64_t seed) {
  const std::size_t s = cfg.ifl.s;
  switch (method) {
    case Method::KMeans: {
      cluster::KMeansOptions opts;
      opts.restarts = cfg.kmeans_restarts;
      opts.seed = seed;
      return {cluster::clustering_accuracy(cluster::kmeans(x, s, opts).clustering, labels), {}};
    }
    case Method::HcaAverage:
      return {cluster::clustering_accuracy(cluster::hca(x, s, cluster::Linkage::Average), labels), {}};
    case Method::HcaWard:
      return {cluster::clustering_accuracy(cluster::hca(x, s, cluster::Linkage::Ward), labels), {}};
    case Method::Dec: {
      nn::TrainConfig ae_cfg = cfg.ifl.autoencoder;
      ae_cfg.seed = derive_seed(seed, 0);
      const auto ae = nn::train_autoencoder(x, cfg.ifl.encoder_dims(static_cast<std::size_t>(x.cols())), ae_cfg);
      dec::DecConfig dec_cfg = cfg.ifl.dec;
      dec_cfg.kmeans_restarts = cfg.kmeans_restarts;
      const auto model = dec::dec_fit(ae.params, x, s, dec_cfg, derive_seed(seed, 1));
      return {cluster::clustering_accuracy(model.hard, labels), cluster::clustering_accuracy(model.initial, labels)};
    }
    case Method::Knn:
    case Method::Mlp:
      break;
  }
  throw ConfigError("method " + to_string(method) + " is not a clustering method");
}

void append_warnings(std::vector<std::string>& out, std::size_t repeat, const std::vector<std::string>& in) {
  for (const auto& w : in) out.push_back("repeat " + std::to_string(repeat) + ": " + w);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ExperimentReport run_clustering_experiment(const Dataset& data, const ExperimentConfig& cfg) {
  if (cfg.task != Task::Clustering) throw ConfigError("run_clustering_experiment: config task is not clustering");
  cfg.validate();
  if (!data.labels) throw DataError("run_clustering_experiment: labels are required to score clusterings");
  const Labels& labels = *data.labels;

  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config = cfg;
  report.cells = make_cells(cfg);

  for (std::size_t k = 0; k < cfg.repeats; ++k) {
    const auto repeat_start = std::chrono::steady_clock::now();
    const std::uint64_t seed = cfg.repeat_seed(k);
    report.seeds.push_back(seed);

    Matrix features;
    std::optional<std::string> ifl_error;
    if (cfg.needs_ifl()) {
      core::IflConfig icfg = cfg.ifl;
      icfg.seed = derive_seed(seed, 1);
      try {
        auto table = core::ifl_cluster_features(data.x, icfg);
        features = std::move(table.features);
        append_warnings(report.warnings, k, table.warnings);
        if (cfg.rescale_ifl) {
          Matrix none;
          minmax_scale(features, none);
        }
      } catch (const std::exception& e) {
        ifl_error = e.what();
      }
    }

    std::size_t c = 0;
    for (auto method : cfg.methods) {
      for (auto mode : cfg.feature_modes) {
        Cell& cell = report.cells[c++];
        if (mode != InputMode::Primary && ifl_error) {
          cell.errors.push_back("repeat " + std::to_string(k) + ": feature learning failed: " + *ifl_error);
          continue;
        }
        try {
          const Matrix x = build_input(mode, data.x, features);
          cell.input_width = static_cast<std::size_t>(x.cols());
          const auto score = cluster_and_score(method, x, labels, cfg, cell_seed(seed, method, mode));
          cell.raw.push_back(score.accuracy);
          if (score.init_accuracy) cell.init_raw.push_back(*score.init_accuracy);
        } catch (const std::exception& e) {
          cell.errors.push_back("repeat " + std::to_string(k) + ": " + e.what());
        }
      }
    }
    report.repeat_seconds.push_back(seconds_since(repeat_start));
  }
  for (auto& cell : report.cells) finalize(cell);
  report.total_seconds = seconds_since(start);
  return report;
}

namespace {

struct ClassifierInputs {
  Matrix train_x;
  Labels train_y;
  Matrix test_x;
  // Technique 1 only: provenance of test rows and each row's weight value for vote fallback.
  std::vector<std::size_t> test_instance;
  std::vector<std::size_t> test_version;
};

Matrix replicate_rows(const Matrix& x, std::size_t times) {
  Matrix out(x.rows() * static_cast<Eigen::Index>(times), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (std::size_t v = 0; v < times; ++v) out.row(i * static_cast<Eigen::Index>(times) + static_cast<Eigen::Index>(v)) = x.row(i);
  }
  return out;
}

}  // namespace

ExperimentReport run_classification_experiment(const Dataset& train, const Dataset& test, const ExperimentConfig& cfg) {
  if (cfg.task != Task::Classification) {
    throw ConfigError("run_classification_experiment: config task is not classification");
  }
  cfg.validate();
  if (!train.labels || !test.labels) throw DataError("run_classification_experiment: train and test need labels");
  if (train.dim() != test.dim()) throw ShapeError("run_classification_experiment: train/test widths differ");
  const Labels& y_train = *train.labels;
  const Labels& y_test = *test.labels;
  const std::size_t classes = std::max(train.classes(), test.classes());
  const std::size_t s = cfg.ifl.s;

  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config = cfg;
  report.cells = make_cells(cfg);

  for (std::size_t k = 0; k < cfg.repeats; ++k) {
    const auto repeat_start = std::chrono::steady_clock::now();
    const std::uint64_t seed = cfg.repeat_seed(k);
    report.seeds.push_back(seed);

    core::IflFeatureTable train_table, test_table;
    std::optional<std::string> ifl_error;
    if (cfg.needs_ifl()) {
      core::IflConfig icfg = cfg.ifl;
      icfg.seed = derive_seed(seed, 1);
      try {
        auto raw_train = core::ifl_classification_train_features(train.x, y_train, icfg);
        auto raw_test = core::ifl_classification_test_features(train.x, y_train, test.x, icfg,
                                                               raw_train.reference ? &*raw_train.reference : nullptr);
        append_warnings(report.warnings, k, raw_train.warnings);
        append_warnings(report.warnings, k, raw_test.warnings);
        if (cfg.technique == 1) {
          train_table = core::package_technique1(raw_train);
          test_table = core::package_technique1(raw_test);
        } else {
          train_table = core::package_technique2(raw_train);
          test_table = core::package_technique2(raw_test);
        }
        if (cfg.rescale_ifl) minmax_scale(train_table.features, test_table.features);
      } catch (const std::exception& e) {
        ifl_error = e.what();
      }
    }

    std::size_t c = 0;
    for (auto method : cfg.methods) {
      for (auto mode : cfg.feature_modes) {
        Cell& cell = report.cells[c++];
        if (mode != InputMode::Primary && ifl_error) {
          cell.errors.push_back("repeat " + std::to_string(k) + ": feature learning failed: " + *ifl_error);
          continue;
        }
        try {
          const bool versions = mode != InputMode::Primary && cfg.technique == 1;
          ClassifierInputs in;
          if (mode == InputMode::Primary) {
            in.train_x = train.x;
            in.train_y = y_train;
            in.test_x = test.x;
          } else {
            const Matrix primary_train = versions ? replicate_rows(train.x, s) : train.x;
            const Matrix primary_test = versions ? replicate_rows(test.x, s) : test.x;
            in.train_x = build_input(mode, primary_train, train_table.features);
            in.test_x = build_input(mode, primary_test, test_table.features);
            in.train_y = *train_table.labels;
            in.test_instance = test_table.instance_id;
            in.test_version = test_table.version_id;
          }
          cell.input_width = static_cast<std::size_t>(in.train_x.cols());

          const std::uint64_t cseed = cell_seed(seed, method, mode);
          Prediction pred;
          if (method == Method::Knn) {
            pred = knn_predict(in.train_x, in.train_y, in.test_x, cfg.knn_k, classes);
          } else {
            MlpConfig mcfg = cfg.mlp;
            mcfg.seed = cseed;
            mcfg.classes = classes;
            pred = mlp_classify(in.train_x, in.train_y, in.test_x, mcfg);
          }
          Labels predicted = pred.labels;
          if (versions) {
            const auto agg = core::aggregate_versions(pred.scores, in.test_instance, in.test_version, s);
            predicted.assign(y_test.size(), 0);
            for (std::size_t i = 0; i < agg.instance_id.size(); ++i) predicted[agg.instance_id[i]] = agg.label[i];
          }
          cell.raw.push_back(classification_accuracy(predicted, y_test));
        } catch (const std::exception& e) {
          cell.errors.push_back("repeat " + std::to_string(k) + ": " + e.what());
        }
      }
    }
    report.repeat_seconds.push_back(seconds_since(repeat_start));
  }
  for (auto& cell : report.cells) finalize(cell);
  report.total_seconds = seconds_since(start);
  return report;
}

}  // namespace ifl::eval
