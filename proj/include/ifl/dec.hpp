#pragma once

#include "ifl/cluster.hpp"
#include "ifl/matrix.hpp"
#include "ifl/nn.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ifl::dec {

/// Student's-t similarities between embedded points and centroids; rows sum to one.
struct SoftAssignment {
  Matrix q;
};

/// Sharpened, frequency-normalized version of a soft assignment.
struct TargetDistribution {
  Matrix p;
};

struct DecConfig {
  double alpha = 1.0;
  double tol = 0.001;                 // stop when fewer than this fraction of instances change cluster
  std::size_t max_iter = 2000;        // gradient steps
  std::size_t update_interval = 0;    // steps between target refreshes; 0 means one pass over the data
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;        // shared by encoder weights and centroids
  std::size_t kmeans_restarts = 10;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Result of the refinement phase.
struct ClusterModel {
  nn::Network encoder;
  Matrix centroids;           // s x e
  cluster::HardClustering hard;
  cluster::HardClustering initial;  // k-means on the pre-refinement embedding
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> change_fractions;  // assignment changes observed at each target refresh

  std::size_t s() const { return static_cast<std::size_t>(centroids.rows()); }
  const std::vector<std::size_t>& sizes() const { return hard.sizes; }
};

SoftAssignment soft_assign(const Matrix& z, const Matrix& centroids, double alpha);

/// Throws DegenerateClusterError if some soft cluster frequency is zero.
TargetDistribution target_distribution(const SoftAssignment& q);

/// KL(P || Q) summed over all entries, with 0 log 0 = 0.
double kl_divergence(const TargetDistribution& p, const SoftAssignment& q);

struct KlGradients {
  Matrix dz;   // n x e
  Matrix dmu;  // s x e
};

/// Analytic gradients of kl_divergence(p, soft_assign(z, centroids)) with P held fixed.
KlGradients kl_gradients(const Matrix& z, const Matrix& centroids, const TargetDistribution& p,
                         const SoftAssignment& q, double alpha);

/// Hard labels from a soft assignment (row argmax, ties to the lowest index).
Labels argmax_rows(const Matrix& m);

/// Refines `encoder` and k-means centroids on encode(x) by minimizing KL(P || Q).
ClusterModel dec_fit(const nn::Network& encoder, const Matrix& x, std::size_t s, const DecConfig& cfg,
                     std::uint64_t seed);
ClusterModel dec_fit(const nn::AutoencoderParams& autoencoder, const Matrix& x, std::size_t s,
                     const DecConfig& cfg, std::uint64_t seed);

}  // namespace ifl::dec
