#include "ifl/eval.hpp"

#include "ifl/errors.hpp"
#include "ifl/nn.hpp"
#include "ifl/random.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

namespace ifl::eval {

namespace {

std::size_t infer_classes(const Labels& y, std::size_t requested) {
  const std::size_t seen = y.empty() ? 0 : *std::max_element(y.begin(), y.end()) + 1;
  if (requested == 0) return seen;
  if (seen > requested) {
    throw DataError("class index " + std::to_string(seen - 1) + " is out of range for " + std::to_string(requested) +
                    " classes");
  }
  return requested;
}

void softmax_rows(Matrix& logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

Labels argmax(const Matrix& scores) {
  Labels out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return out;
}

}  // namespace

Prediction knn_predict(const Matrix& train_x, const Labels& train_y, const Matrix& test_x, std::size_t k,
                       std::size_t classes) {
  const auto n = static_cast<std::size_t>(train_x.rows());
  if (n == 0) throw DataError("knn_predict: empty training set");
  if (train_y.size() != n) throw ShapeError("knn_predict: label count != training rows");
  if (test_x.rows() > 0 && test_x.cols() != train_x.cols()) throw ShapeError("knn_predict: feature widths differ");
  if (k == 0 || k > n) throw ConfigError("knn_predict: k must lie in [1, n_train]");
  classes = infer_classes(train_y, classes);

  Prediction out;
  out.scores = Matrix::Zero(test_x.rows(), static_cast<Eigen::Index>(classes));
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (Eigen::Index t = 0; t < test_x.rows(); ++t) {
    for (std::size_t i = 0; i < n; ++i) dist[i] = {squared_distance(test_x.row(t), train_x.row(static_cast<Eigen::Index>(i))), i};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t m = 0; m < k; ++m) out.scores(t, static_cast<Eigen::Index>(train_y[dist[m].second])) += 1.0;
  }
  out.scores /= static_cast<double>(k);
  out.labels = argmax(out.scores);
  return out;
}

Prediction mlp_classify(const Matrix& train_x, const Labels& train_y, const Matrix& test_x, const MlpConfig& cfg) {
  const auto n = static_cast<std::size_t>(train_x.rows());
  if (n == 0) throw DataError("mlp_classify: empty training set");
  if (train_y.size() != n) throw ShapeError("mlp_classify: label count != training rows");
  if (test_x.rows() > 0 && test_x.cols() != train_x.cols()) throw ShapeError("mlp_classify: feature widths differ");
  if (cfg.batch_size == 0) throw ConfigError("mlp_classify: batch size must be positive");
  const std::size_t classes = infer_classes(train_y, cfg.classes);

  std::vector<std::size_t> dims{static_cast<std::size_t>(train_x.cols())};
  dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
  dims.push_back(classes);
  std::vector<nn::Activation> acts(dims.size() - 1, nn::Activation::Relu);
  acts.back() = nn::Activation::Linear;
  Rng init_rng(derive_seed(cfg.seed, 0));
  nn::Network net = nn::make_network(dims, acts, init_rng);

  Matrix onehot = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < n; ++i) onehot(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(train_y[i])) = 1.0;

  Rng rng(derive_seed(cfg.seed, 1));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::min(cfg.batch_size, n);
  nn::AdamState adam(nn::AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8});
  auto params = net.parameters();
  std::vector<std::size_t> rows;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t begin = 0; begin < n; begin += batch) {
      rows.assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                  order.begin() + static_cast<std::ptrdiff_t>(std::min(begin + batch, n)));
      const auto act = nn::dense_forward(net, select_rows(train_x, rows));
      Matrix grad = act.back();
      softmax_rows(grad);
      grad -= select_rows(onehot, rows);
      grad /= static_cast<double>(rows.size());
      nn::adam_step(params, nn::backprop(net, act, grad), adam);
    }
  }

  Prediction out;
  if (test_x.rows() == 0) {
    out.scores = Matrix::Zero(0, static_cast<Eigen::Index>(classes));
    return out;
  }
  out.scores = nn::dense_forward(net, test_x).back();
  softmax_rows(out.scores);
  require_finite(out.scores, "mlp_classify scores");
  out.labels = argmax(out.scores);
  return out;
}

double classification_accuracy(const Labels& predicted, const Labels& truth) {
  if (predicted.size() != truth.size()) throw ShapeError("classification_accuracy: length mismatch");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace ifl::eval
