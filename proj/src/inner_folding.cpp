#include "ifl/features.hpp"

#include "ifl/errors.hpp"
#include "ifl/random.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace ifl::core {

std::vector<std::size_t> FoldAssignment::fold(std::size_t j) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == j) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::complement(std::size_t j) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != j) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
  std::vector<std::size_t> sizes(r, 0);
  for (auto f : fold_of) ++sizes[f];
  return sizes;
}

FoldAssignment inner_folding(std::size_t n, std::size_t r, std::uint64_t seed) {
  if (r < 2) throw ConfigError("inner_folding: r must be at least 2");
  if (r > n) throw ConfigError("inner_folding: r=" + std::to_string(r) + " exceeds instance count " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  FoldAssignment folds;
  folds.r = r;
  folds.fold_of.assign(n, 0);
  for (std::size_t pos = 0; pos < n; ++pos) folds.fold_of[order[pos]] = pos % r;
  return folds;
}

}  // namespace ifl::core
