#pragma once

#include "ifl/matrix.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace ifl {

/// Instances as rows, with optional contiguous class labels in [0, classes).
struct Dataset {
  Matrix x;
  std::optional<Labels> labels;
  /// Original label value for each contiguous class index (empty when labels were generated).
  std::vector<long long> label_values;

  std::size_t n() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
  std::size_t classes() const;
};

/// Isotropic Gaussian blobs. Center k sits at (separation / sqrt(2)) * e_k, so every pair of centers is
/// exactly `separation` apart; requires centers <= dim. Instances are assigned round-robin to centers.
struct BlobSpec {
  std::size_t n = 1000;
  std::size_t dim = 20;
  std::size_t centers = 4;
  double stddev = 1.0;
  double separation = 10.0;
  std::uint64_t seed = 0;
};

Dataset make_blobs(const BlobSpec& spec);

/// Replaces round(fraction * n) labels, chosen at random, with a different random class.
Labels add_label_noise(const Labels& labels, std::size_t classes, double fraction, std::uint64_t seed);

/// Seeded shuffle split; the first part holds round((1 - test_fraction) * n) instances.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed);

}  // namespace ifl
