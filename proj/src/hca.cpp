#include "ifl/cluster.hpp"

#include "ifl/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ifl::cluster {

namespace {

// Upper-triangular storage of pairwise cluster dissimilarities, indexed by slot.
class Condensed {
 public:
  explicit Condensed(std::size_t n) : n_(n), d_(n * (n - 1) / 2) {}

  double& operator()(std::size_t i, std::size_t j) { return d_[index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const { return d_[index(i, j)]; }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }

  std::size_t n_;
  std::vector<double> d_;
};

}  // namespace

HardClustering hca(const Matrix& x, std::size_t s, Linkage linkage) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0) throw DataError("hca: empty input");
  if (s == 0) throw ConfigError("hca: s must be positive");
  if (s > n) throw ConfigError("hca: s=" + std::to_string(s) + " exceeds instance count " + std::to_string(n));

  // Slot i always holds the cluster whose smallest member is instance i.
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  std::vector<bool> active(n, true);

  if (n > 1) {
    Condensed dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d2 = squared_distance(x.row(static_cast<Eigen::Index>(i)), x.row(static_cast<Eigen::Index>(j)));
        // Ward works on squared distances: the Lance-Williams recurrence then tracks twice the SSE increase.
        dist(i, j) = linkage == Linkage::Ward ? d2 : std::sqrt(d2);
      }
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> nn(n, none);
    std::vector<double> nn_dist(n, inf);
    auto refresh = [&](std::size_t i) {
      nn[i] = none;
      nn_dist[i] = inf;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (active[j] && dist(i, j) < nn_dist[i]) {
          nn_dist[i] = dist(i, j);
          nn[i] = j;
        }
      }
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    for (std::size_t remaining = n; remaining > s; --remaining) {
      std::size_t a = none;
      for (std::size_t i = 0; i < n; ++i) {
        if (active[i] && nn[i] != none && (a == none || nn_dist[i] < nn_dist[a])) a = i;
      }
      const std::size_t b = nn[a];
      const double na = static_cast<double>(members[a].size());
      const double nb = static_cast<double>(members[b].size());
      const double dab = dist(a, b);

      for (std::size_t k = 0; k < n; ++k) {
        if (!active[k] || k == a || k == b) continue;
        if (linkage == Linkage::Average) {
          dist(a, k) = (na * dist(a, k) + nb * dist(b, k)) / (na + nb);
        } else {
          const double nk = static_cast<double>(members[k].size());
          dist(a, k) = ((na + nk) * dist(a, k) + (nb + nk) * dist(b, k) - nk * dab) / (na + nb + nk);
        }
      }
      members[a].insert(members[a].end(), members[b].begin(), members[b].end());
      members[b].clear();
      active[b] = false;

      refresh(a);
      for (std::size_t k = 0; k < n; ++k) {
        if (!active[k] || k == a) continue;
        if (nn[k] == a || nn[k] == b) {
          refresh(k);
        } else if (k < a && (dist(k, a) < nn_dist[k] || (dist(k, a) == nn_dist[k] && a < nn[k]))) {
          nn[k] = a;
          nn_dist[k] = dist(k, a);
        }
      }
    }
  }

  Labels assignment(n);
  std::size_t label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    for (auto m : members[i]) assignment[m] = label;
    ++label;
  }
  return HardClustering::from_assignment(std::move(assignment), s);
}

}  // namespace ifl::cluster
