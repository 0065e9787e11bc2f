#include "ifl/dataset.hpp"

#include "ifl/errors.hpp"
#include "ifl/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ifl {

std::size_t Dataset::classes() const {
  if (!labels || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end()) + 1;
}

Dataset make_blobs(const BlobSpec& spec) {
  if (spec.centers == 0 || spec.centers > spec.dim) throw ConfigError("make_blobs: need 1 <= centers <= dim");
  if (spec.n < spec.centers) throw ConfigError("make_blobs: fewer instances than centers");
  const double offset = spec.separation / std::sqrt(2.0);
  Rng rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.stddev);

  Dataset data;
  data.x.resize(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.dim));
  data.labels.emplace(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t c = i % spec.centers;
    (*data.labels)[i] = c;
    for (std::size_t j = 0; j < spec.dim; ++j) {
      data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = noise(rng) + (j == c ? offset : 0.0);
    }
  }
  return data;
}

Labels add_label_noise(const Labels& labels, std::size_t classes, double fraction, std::uint64_t seed) {
  if (classes < 2) throw ConfigError("add_label_noise: need at least two classes");
  if (fraction < 0.0 || fraction > 1.0) throw ConfigError("add_label_noise: fraction must lie in [0, 1]");
  Labels out = labels;
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto flips = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(labels.size())));
  std::uniform_int_distribution<std::size_t> other(1, classes - 1);
  for (std::size_t k = 0; k < flips; ++k) {
    const auto i = order[k];
    out[i] = (labels[i] + other(rng)) % classes;
  }
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) throw ConfigError("train_test_split: fraction must lie in [0, 1)");
  std::vector<std::size_t> order(data.n());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround((1.0 - test_fraction) * static_cast<double>(data.n())));
  std::vector<std::size_t> train_ids(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_ids(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train_ids.begin(), train_ids.end());
  std::sort(test_ids.begin(), test_ids.end());

  auto take = [&](const std::vector<std::size_t>& ids) {
    Dataset part;
    part.x = select_rows(data.x, ids);
    part.label_values = data.label_values;
    if (data.labels) {
      part.labels.emplace();
      for (auto id : ids) part.labels->push_back((*data.labels)[id]);
    }
    return part;
  };
  return {take(train_ids), take(test_ids)};
}

}  // namespace ifl
