// Independent reference implementations used only by tests. Nothing here calls into the code paths
// it is used to check.
#pragma once

#include "ifl/matrix.hpp"
#include "ifl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace ifl::testing {

using Table = std::vector<std::vector<double>>;

inline Table to_table(const Matrix& m) {
  Table t(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return t;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

/// Plain triple-loop forward pass; returns the output of every layer.
inline std::vector<Table> naive_forward(const nn::Network& net, const Table& input) {
  std::vector<Table> outs;
  Table a = input;
  for (const auto& layer : net.layers) {
    const auto in = static_cast<std::size_t>(layer.weight.rows());
    const auto out = static_cast<std::size_t>(layer.weight.cols());
    Table next(a.size(), std::vector<double>(out));
    for (std::size_t r = 0; r < a.size(); ++r) {
      for (std::size_t j = 0; j < out; ++j) {
        double acc = layer.bias(0, static_cast<Eigen::Index>(j));
        for (std::size_t i = 0; i < in; ++i) acc += a[r][i] * layer.weight(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (layer.activation == nn::Activation::Relu && acc < 0.0) acc = 0.0;
        next[r][j] = acc;
      }
    }
    outs.push_back(next);
    a = std::move(next);
  }
  return outs;
}

/// Pre-activation signs of every rectifier unit; used to detect finite-difference steps that cross a kink.
inline std::vector<bool> relu_pattern(const nn::Network& net, const Table& input) {
  std::vector<bool> pattern;
  Table a = input;
  for (const auto& layer : net.layers) {
    const auto in = static_cast<std::size_t>(layer.weight.rows());
    const auto out = static_cast<std::size_t>(layer.weight.cols());
    Table next(a.size(), std::vector<double>(out));
    for (std::size_t r = 0; r < a.size(); ++r) {
      for (std::size_t j = 0; j < out; ++j) {
        double acc = layer.bias(0, static_cast<Eigen::Index>(j));
        for (std::size_t i = 0; i < in; ++i) acc += a[r][i] * layer.weight(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (layer.activation == nn::Activation::Relu) {
          pattern.push_back(acc > 0.0);
          if (acc < 0.0) acc = 0.0;
        }
        next[r][j] = acc;
      }
    }
    a = std::move(next);
  }
  return pattern;
}

/// Mean squared reconstruction error computed from the naive forward pass.
inline double naive_reconstruction_loss(const nn::Network& net, const Table& x) {
  const auto out = naive_forward(net, x).back();
  double total = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r)
    for (std::size_t j = 0; j < x[r].size(); ++j) total += (x[r][j] - out[r][j]) * (x[r][j] - out[r][j]);
  return total / static_cast<double>(x.size());
}

inline double central_difference(const std::function<double()>& f, double& param, double step = 1e-5) {
  const double saved = param;
  param = saved + step;
  const double up = f();
  param = saved - step;
  const double down = f();
  param = saved;
  return (up - down) / (2.0 * step);
}

/// |a - b| / max(|a|, |b|), with gradients below `floor` in both treated as matching in absolute terms.
inline double relative_error(double a, double b, double floor = 1e-7) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / scale;
}

/// Minimum-cost permutation by enumeration.
inline std::pair<std::vector<std::size_t>, double> brute_force_assignment(const Matrix& cost) {
  std::vector<std::size_t> perm(static_cast<std::size_t>(cost.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) c += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best, best_cost};
}

enum class NaiveLinkage { Average, Ward };

/// Agglomeration recomputing every cluster-pair linkage from its definition at every step. Clusters are
/// numbered by their smallest member; equal costs go to the pair with the smallest (min member) ids.
inline std::vector<std::size_t> naive_hca(const Table& x, std::size_t s, NaiveLinkage linkage) {
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < x.size(); ++i) clusters.push_back({i});
  auto dist = [&](std::size_t a, std::size_t b) {
    double d = 0.0;
    for (std::size_t k = 0; k < x[a].size(); ++k) d += (x[a][k] - x[b][k]) * (x[a][k] - x[b][k]);
    return d;
  };
  auto centroid = [&](const std::vector<std::size_t>& c) {
    std::vector<double> m(x[0].size(), 0.0);
    for (auto i : c)
      for (std::size_t k = 0; k < m.size(); ++k) m[k] += x[i][k] / static_cast<double>(c.size());
    return m;
  };
  auto cost = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (linkage == NaiveLinkage::Average) {
      double total = 0.0;
      for (auto i : a)
        for (auto j : b) total += std::sqrt(dist(i, j));
      return total / static_cast<double>(a.size() * b.size());
    }
    const auto ca = centroid(a);
    const auto cb = centroid(b);
    double d = 0.0;
    for (std::size_t k = 0; k < ca.size(); ++k) d += (ca[k] - cb[k]) * (ca[k] - cb[k]);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    return na * nb / (na + nb) * d;
  };
  while (clusters.size() > s) {
    std::size_t best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        const double c = cost(clusters[a], clusters[b]);
        if (c < best) {
          best = c;
          best_a = a;
          best_b = b;
        }
      }
    }
    clusters[best_a].insert(clusters[best_a].end(), clusters[best_b].begin(), clusters[best_b].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  std::vector<std::size_t> out(x.size());
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (auto i : clusters[c]) out[i] = c;
  return out;
}

/// Exhaustive-scan k nearest neighbours with explicit tie rules.
inline std::vector<std::size_t> naive_knn(const Table& train, const std::vector<std::size_t>& labels, const Table& test,
                                          std::size_t k, std::size_t classes) {
  std::vector<std::size_t> out;
  for (const auto& t : test) {
    std::vector<bool> used(train.size(), false);
    std::vector<std::size_t> votes(classes, 0);
    for (std::size_t m = 0; m < k; ++m) {
      std::size_t best = train.size();
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < train.size(); ++i) {
        if (used[i]) continue;
        double d = 0.0;
        for (std::size_t j = 0; j < t.size(); ++j) d += (t[j] - train[i][j]) * (t[j] - train[i][j]);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      used[best] = true;
      ++votes[labels[best]];
    }
    std::size_t winner = 0;
    for (std::size_t c = 1; c < classes; ++c)
      if (votes[c] > votes[winner]) winner = c;
    out.push_back(winner);
  }
  return out;
}

/// Euclidean distance from explicit sums.
inline double naive_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(d);
}

}  // namespace ifl::testing
