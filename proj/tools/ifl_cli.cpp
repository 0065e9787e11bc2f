// Command-line front end.
//
//   ifl cluster  --data x.csv --label-column label -s 4 --methods kmeans,dec --modes primary,ifl --report r.json
//   ifl classify --data train.csv --test test.csv --label-column label -s 6 --technique 2 --report r.json
//   ifl features --data x.csv -s 4 --mode clustering --out features.csv
//   ifl project  --data x.csv -s 4 --out projection.csv
//
// Options may also come from a TOML/INI file given before the verb (ifl --config run.toml cluster ...),
// grouped under a [cluster], [classify], [features] or [project] section. Command-line flags win.
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
#include "ifl/dataset.hpp"
#include "ifl/dec.hpp"
#include "ifl/errors.hpp"
#include "ifl/eval.hpp"
#include "ifl/features.hpp"
#include "ifl/io.hpp"
#include "ifl/nn.hpp"
#include "ifl/random.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

using namespace ifl;

namespace {

constexpr int kConfigError = 2;
constexpr int kDataError = 3;
constexpr int kNumericError = 4;

struct DataOptions {
  std::string data;
  std::string images, labels;
  std::string test;
  std::string test_images, test_labels;
  std::string label_column;
  std::string scaling = "none";
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
};

struct Options {
  DataOptions in;
  core::IflConfig ifl;
  std::vector<std::string> methods;
  std::vector<std::string> modes{"primary"};
  std::size_t repeats = 5;
  int technique = 2;
  std::size_t knn_k = 5;
  eval::MlpConfig mlp;
  std::size_t kmeans_restarts = 10;
  bool rescale_ifl = false;
  std::string feature_mode = "clustering";
  std::string out;
  std::string test_out;
  std::string report;
  bool no_timing = false;
};

void add_data_options(CLI::App* cmd, Options& o, bool with_test) {
  cmd->add_option("--data", o.in.data, "CSV file with one instance per row");
  cmd->add_option("--images", o.in.images, "IDX image file (alternative to --data)");
  cmd->add_option("--labels", o.in.labels, "IDX label file paired with --images");
  cmd->add_option("--label-column", o.in.label_column, "CSV label column: header name or 0-based index (negative from the end)");
  cmd->add_option("--scaling", o.in.scaling, "none | divide-by-max | divide-by-two")
      ->check(CLI::IsMember({"none", "divide-by-max", "divide-by-two"}));
  if (with_test) {
    cmd->add_option("--test", o.in.test, "held-out CSV; when absent the data is split");
    cmd->add_option("--test-images", o.in.test_images, "held-out IDX images");
    cmd->add_option("--test-labels", o.in.test_labels, "held-out IDX labels");
    cmd->add_option("--test-fraction", o.in.test_fraction, "fraction held out when no test set is given")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--split-seed", o.in.split_seed, "seed of the train/test split");
  }
}

void add_model_options(CLI::App* cmd, Options& o) {
  auto& c = o.ifl;
  cmd->add_option("-s,--clusters", c.s, "number of clusters (classes for classification)")->required();
  cmd->add_option("-r,--folds", c.r, "inner folds")->capture_default_str();
  cmd->add_option("--hidden", c.hidden_dims, "encoder hidden widths")->delimiter(',')->capture_default_str();
  cmd->add_option("--latent", c.latent_dim, "bottleneck width")->capture_default_str();
  cmd->add_option("--ae-epochs", c.autoencoder.epochs, "autoencoder epochs")->capture_default_str();
  cmd->add_option("--ae-batch", c.autoencoder.batch_size, "autoencoder batch size")->capture_default_str();
  cmd->add_option("--ae-lr", c.autoencoder.adam.learning_rate, "autoencoder learning rate")->capture_default_str();
  cmd->add_option("--alpha", c.dec.alpha, "Student's t degrees of freedom")->capture_default_str();
  cmd->add_option("--dec-tol", c.dec.tol, "stop when fewer than this fraction change cluster")->capture_default_str();
  cmd->add_option("--dec-max-iter", c.dec.max_iter, "maximum refinement steps")->capture_default_str();
  cmd->add_option("--dec-batch", c.dec.batch_size, "refinement batch size")->capture_default_str();
  cmd->add_option("--dec-lr", c.dec.learning_rate, "refinement learning rate")->capture_default_str();
  cmd->add_option("--update-interval", c.dec.update_interval, "steps between target refreshes (0: one pass)")
      ->capture_default_str();
  cmd->add_option("--kmeans-restarts", o.kmeans_restarts, "k-means restarts")->capture_default_str();
  cmd->add_option("--seed", c.seed, "master seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "concurrent inner-fold runs")->capture_default_str();
}

void add_report_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--report", o.report, "JSON report path");
  cmd->add_flag("--no-timing", o.no_timing, "omit wall-clock timings from the report");
}

io::Scaling scaling(const Options& o) { return io::scaling_from_string(o.in.scaling); }

Dataset load(const std::string& csv, const std::string& images, const std::string& labels, const Options& o) {
  if (!images.empty() || !labels.empty()) {
    if (images.empty() || labels.empty()) throw ConfigError("IDX input needs both an image and a label file");
    return io::load_idx(images, labels, scaling(o));
  }
  if (csv.empty()) throw ConfigError("no input data given (--data or --images/--labels)");
  io::CsvOptions opts;
  if (!o.in.label_column.empty()) opts.label_column = o.in.label_column;
  opts.scaling = scaling(o);
  return io::load_csv(csv, opts);
}

std::vector<std::pair<std::string, std::string>> inputs(const Options& o) {
  std::vector<std::pair<std::string, std::string>> out;
  auto add = [&](const char* key, const std::string& v) {
    if (!v.empty()) out.emplace_back(key, v);
  };
  add("data", o.in.data);
  add("images", o.in.images);
  add("labels", o.in.labels);
  add("test", o.in.test);
  add("test_images", o.in.test_images);
  add("test_labels", o.in.test_labels);
  add("label_column", o.in.label_column);
  add("scaling", o.in.scaling);
  return out;
}

eval::ExperimentConfig experiment_config(const Options& o, eval::Task task) {
  eval::ExperimentConfig cfg;
  cfg.task = task;
  for (const auto& m : o.methods) cfg.methods.push_back(eval::method_from_string(m));
  cfg.feature_modes.clear();
  for (const auto& m : o.modes) cfg.feature_modes.push_back(eval::input_mode_from_string(m));
  cfg.repeats = o.repeats;
  cfg.master_seed = o.ifl.seed;
  cfg.ifl = o.ifl;
  cfg.technique = o.technique;
  cfg.knn_k = o.knn_k;
  cfg.mlp = o.mlp;
  cfg.kmeans_restarts = o.kmeans_restarts;
  cfg.rescale_ifl = o.rescale_ifl;
  return cfg;
}

void print_cells(const eval::ExperimentReport& report) {
  std::printf("%-12s %-12s %6s %10s %12s\n", "method", "features", "width", "mean", "variance");
  for (const auto& c : report.cells) {
    std::printf("%-12s %-12s %6zu %10.4f %12.6f%s\n", c.method.c_str(), c.feature_mode.c_str(), c.input_width, c.mean,
                c.variance, c.errors.empty() ? "" : "  (errors)");
  }
  for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

int finish(eval::ExperimentReport& report, const Options& o) {
  report.inputs = inputs(o);
  if (!o.report.empty()) io::export_report(report, o.report, {!o.no_timing});
  int code = 0;
  for (const auto& c : report.cells) {
    for (const auto& e : c.errors) {
      std::fprintf(stderr, "error: %s/%s %s\n", c.method.c_str(), c.feature_mode.c_str(), e.c_str());
      code = kNumericError;
    }
  }
  return code;
}

int run_cluster(const Options& o) {
  const Dataset data = load(o.in.data, o.in.images, o.in.labels, o);
  auto report = eval::run_clustering_experiment(data, experiment_config(o, eval::Task::Clustering));
  print_cells(report);
  return finish(report, o);
}

std::pair<Dataset, Dataset> train_and_test(const Options& o) {
  Dataset train = load(o.in.data, o.in.images, o.in.labels, o);
  if (!o.in.test.empty() || !o.in.test_images.empty()) {
    Dataset test = load(o.in.test, o.in.test_images, o.in.test_labels, o);
    return {std::move(train), std::move(test)};
  }
  return train_test_split(train, o.in.test_fraction, o.in.split_seed);
}

int run_classify(const Options& o) {
  const auto [train, test] = train_and_test(o);
  auto report = eval::run_classification_experiment(train, test, experiment_config(o, eval::Task::Classification));
  print_cells(report);
  return finish(report, o);
}

int run_features(const Options& o) {
  if (o.out.empty()) throw ConfigError("features: --out is required");
  o.ifl.validate();
  const auto mode = core::feature_mode_from_string(o.feature_mode);
  eval::ExperimentReport report;
  report.config = experiment_config(o, eval::Task::Clustering);
  report.seeds = {o.ifl.seed};

  if (mode == core::FeatureMode::Clustering) {
    const Dataset data = load(o.in.data, o.in.images, o.in.labels, o);
    const auto table = core::ifl_cluster_features(data.x, o.ifl);
    io::export_features(table, o.out);
    report.warnings = table.warnings;
  } else {
    const bool split = o.in.test.empty() && o.in.test_images.empty();
    Dataset train, test;
    if (split && o.test_out.empty()) {
      train = load(o.in.data, o.in.images, o.in.labels, o);
    } else {
      std::tie(train, test) = train_and_test(o);
    }
    if (!train.labels) throw DataError("features: classification modes need labels (--label-column or --labels)");
    const auto raw = core::ifl_classification_train_features(train.x, *train.labels, o.ifl);
    auto package = [&](const core::IflFeatureTable& t) {
      switch (mode) {
        case core::FeatureMode::Technique1: return core::package_technique1(t);
        case core::FeatureMode::Technique2: return core::package_technique2(t);
        default: return t;
      }
    };
    io::export_features(package(raw), o.out);
    report.warnings = raw.warnings;
    if (!o.test_out.empty()) {
      auto test_raw = core::ifl_classification_test_features(train.x, *train.labels, test.x, o.ifl,
                                                             raw.reference ? &*raw.reference : nullptr);
      if (test.labels) test_raw.labels = *test.labels;
      io::export_features(package(test_raw), o.test_out);
    }
  }
  for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return finish(report, o);
}

int run_project(const Options& o) {
  if (o.out.empty()) throw ConfigError("project: --out is required");
  o.ifl.validate();
  const Dataset data = load(o.in.data, o.in.images, o.in.labels, o);
  nn::TrainConfig ae_cfg = o.ifl.autoencoder;
  ae_cfg.seed = derive_seed(o.ifl.seed, 0);
  const auto ae = nn::train_autoencoder(data.x, o.ifl.encoder_dims(data.dim()), ae_cfg);
  const std::uint64_t dec_seed = derive_seed(o.ifl.seed, 1);
  const auto model = dec::dec_fit(ae.params, data.x, o.ifl.s, o.ifl.dec, dec_seed);
  io::export_projection(nn::encode(model.encoder, data.x), model.hard.assignment, o.out);
  if (data.labels) {
    std::printf("ACC %.4f (k-means init %.4f)\n", cluster::clustering_accuracy(model.hard, *data.labels),
                cluster::clustering_accuracy(model.initial, *data.labels));
  }
  eval::ExperimentReport report;
  report.config = experiment_config(o, eval::Task::Clustering);
  report.seeds = {o.ifl.seed, ae_cfg.seed, dec_seed};
  return finish(report, o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse feature learning: error-based features for clustering and classification"};
  app.set_config("--config", "", "TOML/INI file of option defaults, one [verb] section per subcommand");
  app.require_subcommand(1);

  Options o;
  o.ifl.s = 0;

  auto* cluster_cmd = app.add_subcommand("cluster", "clustering experiment over repeats");
  add_data_options(cluster_cmd, o, false);
  add_model_options(cluster_cmd, o);
  cluster_cmd->add_option("--methods", o.methods, "kmeans, hca-average, hca-ward, dec")->delimiter(',')->required();
  cluster_cmd->add_option("--modes", o.modes, "primary, ifl, primary+ifl")->delimiter(',')->capture_default_str();
  cluster_cmd->add_option("--repeats", o.repeats, "repeats")->capture_default_str();
  cluster_cmd->add_flag("--rescale-ifl", o.rescale_ifl, "min-max scale IFL columns");
  add_report_options(cluster_cmd, o);

  auto* classify_cmd = app.add_subcommand("classify", "classification experiment over repeats");
  add_data_options(classify_cmd, o, true);
  add_model_options(classify_cmd, o);
  classify_cmd->add_option("--methods", o.methods, "knn, mlp")->delimiter(',')->required();
  classify_cmd->add_option("--modes", o.modes, "primary, ifl, primary+ifl")->delimiter(',')->capture_default_str();
  classify_cmd->add_option("--repeats", o.repeats, "repeats")->capture_default_str();
  classify_cmd->add_option("--technique", o.technique, "IFL packaging: 1 (versions) or 2 (wide)")->capture_default_str();
  classify_cmd->add_option("--knn-k", o.knn_k, "neighbours")->capture_default_str();
  classify_cmd->add_option("--mlp-hidden", o.mlp.hidden_dims, "MLP hidden widths")->delimiter(',')->capture_default_str();
  classify_cmd->add_option("--mlp-epochs", o.mlp.epochs, "MLP epochs")->capture_default_str();
  classify_cmd->add_option("--mlp-batch", o.mlp.batch_size, "MLP batch size")->capture_default_str();
  classify_cmd->add_option("--mlp-lr", o.mlp.learning_rate, "MLP learning rate")->capture_default_str();
  classify_cmd->add_flag("--rescale-ifl", o.rescale_ifl, "min-max scale IFL columns using training rows");
  add_report_options(classify_cmd, o);

  auto* features_cmd = app.add_subcommand("features", "write the learned feature table");
  add_data_options(features_cmd, o, true);
  add_model_options(features_cmd, o);
  features_cmd->add_option("--mode", o.feature_mode, "clustering | classification-raw | classification-technique1 | classification-technique2")
      ->check(CLI::IsMember({"clustering", "classification-raw", "classification-technique1",
                             "classification-technique2"}))
      ->capture_default_str();
  features_cmd->add_option("--out", o.out, "feature CSV")->required();
  features_cmd->add_option("--test-out", o.test_out, "feature CSV for the held-out rows (classification modes)");
  add_report_options(features_cmd, o);

  auto* project_cmd = app.add_subcommand("project", "2-D principal-component view of the refined embedding");
  add_data_options(project_cmd, o, false);
  add_model_options(project_cmd, o);
  project_cmd->add_option("--out", o.out, "projection CSV (x,y,cluster)")->required();
  add_report_options(project_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  o.ifl.dec.kmeans_restarts = o.kmeans_restarts;

  try {
    if (*cluster_cmd) return run_cluster(o);
    if (*classify_cmd) return run_classify(o);
    if (*features_cmd) return run_features(o);
    if (*project_cmd) return run_project(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kNumericError;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kDataError;
  } catch (const ShapeError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kDataError;
  }
  return kConfigError;
}
