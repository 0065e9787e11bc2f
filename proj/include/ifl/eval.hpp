#pragma once

#include "ifl/dataset.hpp"
#include "ifl/dec.hpp"
#include "ifl/features.hpp"
#include "ifl/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ifl::eval {

// ---------------------------------------------------------------------------
// Classifiers

struct Prediction {
  Labels labels;
  Matrix scores;  // n_test x classes, rows sum to one
};

/// Majority vote among the k nearest training rows (Euclidean). Distance ties go to the lower training
/// index, vote ties to the lower class. Scores are vote fractions.
Prediction knn_predict(const Matrix& train_x, const Labels& train_y, const Matrix& test_x, std::size_t k,
                       std::size_t classes = 0);

struct MlpConfig {
  std::vector<std::size_t> hidden_dims{64};
  std::size_t epochs = 200;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::size_t classes = 0;  // 0 infers max(train_y) + 1
};

/// Rectifier MLP with a softmax head trained on cross-entropy with Adam.
Prediction mlp_classify(const Matrix& train_x, const Labels& train_y, const Matrix& test_x, const MlpConfig& cfg);

double classification_accuracy(const Labels& predicted, const Labels& truth);

// ---------------------------------------------------------------------------
// Experiments

enum class Task { Clustering, Classification };
enum class Method { KMeans, HcaAverage, HcaWard, Dec, Knn, Mlp };
enum class InputMode { Primary, Ifl, PrimaryIfl };

std::string to_string(Task t);
std::string to_string(Method m);
std::string to_string(InputMode m);
Task task_from_string(const std::string& s);
Method method_from_string(const std::string& s);
InputMode input_mode_from_string(const std::string& s);

struct ExperimentConfig {
  Task task = Task::Clustering;
  std::vector<Method> methods;
  std::vector<InputMode> feature_modes{InputMode::Primary};
  std::size_t repeats = 5;
  std::uint64_t master_seed = 0;
  /// Inner folding, network, and DEC settings. The DEC baseline reuses the same network shape.
  core::IflConfig ifl;
  int technique = 2;  // classification packaging: 1 or 2
  std::size_t knn_k = 5;
  MlpConfig mlp;
  std::size_t kmeans_restarts = 10;
  bool rescale_ifl = false;  // min-max scale IFL columns using the training rows

  /// Seed of repeat k.
  std::uint64_t repeat_seed(std::size_t k) const { return master_seed + 1000 * k; }
  bool needs_ifl() const;
  void validate() const;
};

/// One (method, feature mode) cell across all repeats.
struct Cell {
  std::string method;
  std::string feature_mode;
  std::size_t input_width = 0;
  std::vector<double> raw;
  double mean = 0.0;
  double variance = 0.0;          // population variance of raw
  std::vector<double> init_raw;   // DEC only: accuracy of its k-means initialization per repeat
  std::vector<std::string> errors;
};

struct ExperimentReport {
  ExperimentConfig config;
  /// Where the data came from (e.g. file paths), echoed for replay.
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::uint64_t> seeds;
  std::vector<Cell> cells;
  std::vector<std::string> warnings;
  std::vector<double> repeat_seconds;
  double total_seconds = 0.0;

  const Cell* find(const std::string& method, const std::string& feature_mode) const;
};

/// Recomputes mean and population variance from raw.
void finalize(Cell& cell);

ExperimentReport run_clustering_experiment(const Dataset& data, const ExperimentConfig& cfg);
ExperimentReport run_classification_experiment(const Dataset& train, const Dataset& test,
                                               const ExperimentConfig& cfg);

/// Scales each column of `train` to [0, 1] and applies the same map to `other`; constant columns become 0.
void minmax_scale(Matrix& train, Matrix& other);

}  // namespace ifl::eval
