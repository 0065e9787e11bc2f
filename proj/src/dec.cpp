#include "ifl/dec.hpp"

#include "ifl/errors.hpp"
#include "ifl/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ifl::dec {

void DecConfig::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("dec: alpha must be positive");
  if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("dec: tol must lie in (0, 1)");
  if (batch_size == 0) throw ConfigError("dec: batch size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("dec: learning rate must be positive");
}

namespace {

// (1 + d^2 / alpha)^-1 for every (instance, centroid) pair.
Matrix inverse_kernel_base(const Matrix& z, const Matrix& centroids, double alpha) {
  Matrix out(z.rows(), centroids.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
      out(i, j) = 1.0 / (1.0 + squared_distance(z.row(i), centroids.row(j)) / alpha);
    }
  }
  return out;
}

}  // namespace

SoftAssignment soft_assign(const Matrix& z, const Matrix& centroids, double alpha) {
  if (centroids.rows() == 0) throw ShapeError("soft_assign: no centroids");
  if (z.cols() != centroids.cols()) {
    throw ShapeError("soft_assign: latent dim " + std::to_string(z.cols()) + " vs centroid dim " +
                     std::to_string(centroids.cols()));
  }
  if (!(alpha > 0.0)) throw ConfigError("soft_assign: alpha must be positive");
  Matrix q = inverse_kernel_base(z, centroids, alpha);
  if (alpha != 1.0) q = q.array().pow((alpha + 1.0) / 2.0).matrix();
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const double total = q.row(i).sum();
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw NumericError("soft_assign: kernel row " + std::to_string(i) + " underflowed");
    }
    q.row(i) /= total;
  }
  return {std::move(q)};
}

TargetDistribution target_distribution(const SoftAssignment& sa) {
  const Matrix& q = sa.q;
  const Eigen::RowVectorXd freq = q.colwise().sum();
  for (Eigen::Index j = 0; j < freq.size(); ++j) {
    if (!(freq(j) > 0.0)) {
      throw DegenerateClusterError("target_distribution: cluster " + std::to_string(j) +
                                   " has zero soft frequency");
    }
  }
  Matrix p = q.cwiseAbs2();
  p.array().rowwise() /= freq.array();
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) /= p.row(i).sum();
  return {std::move(p)};
}

double kl_divergence(const TargetDistribution& target, const SoftAssignment& soft) {
  const Matrix& p = target.p;
  const Matrix& q = soft.q;
  require_shape(q, p.rows(), p.cols(), "kl_divergence");
  // Summed as p log(p/q) - p + q: identical for normalized rows, but every term is non-negative,
  // so rounding cannot push the total below zero.
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      const double pij = p(i, j), qij = q(i, j);
      const double term = pij > 0.0 ? pij * std::log(pij / qij) - pij + qij : qij;
      total += std::max(term, 0.0);
    }
  }
  return total;
}

KlGradients kl_gradients(const Matrix& z, const Matrix& centroids, const TargetDistribution& target,
                         const SoftAssignment& soft, double alpha) {
  const Matrix& p = target.p;
  const Matrix& q = soft.q;
  require_shape(p, z.rows(), centroids.rows(), "kl_gradients target");
  require_shape(q, z.rows(), centroids.rows(), "kl_gradients soft assignment");
  if (z.cols() != centroids.cols()) throw ShapeError("kl_gradients: latent/centroid dim mismatch");

  const Matrix base = inverse_kernel_base(z, centroids, alpha);
  // coeff(i, j) = ((alpha + 1) / alpha) * (1 + d^2/alpha)^-1 * (p_ij - q_ij)
  const Matrix coeff = ((alpha + 1.0) / alpha) * base.cwiseProduct(p - q);

  KlGradients g{Matrix::Zero(z.rows(), z.cols()), Matrix::Zero(centroids.rows(), centroids.cols())};
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
      const auto diff = z.row(i) - centroids.row(j);
      g.dz.row(i) += coeff(i, j) * diff;
      g.dmu.row(j) -= coeff(i, j) * diff;
    }
  }
  return g;
}

Labels argmax_rows(const Matrix& m) {
  Labels out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < m.cols(); ++j) {
      if (m(i, j) > m(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return out;
}

namespace {

cluster::HardClustering hard_from(const Matrix& q, const Matrix& centroids) {
  return cluster::HardClustering::from_assignment(argmax_rows(q), static_cast<std::size_t>(q.cols()), centroids);
}

void require_nonempty(const cluster::HardClustering& hard, std::size_t iteration) {
  for (std::size_t j = 0; j < hard.s; ++j) {
    if (hard.sizes[j] == 0) {
      throw DegenerateClusterError("dec_fit: cluster " + std::to_string(j) + " lost all members by iteration " +
                                   std::to_string(iteration));
    }
  }
}

}  // namespace

ClusterModel dec_fit(const nn::Network& encoder, const Matrix& x, std::size_t s, const DecConfig& cfg,
                     std::uint64_t seed) {
  cfg.validate();
  encoder.validate();
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0) throw DataError("dec_fit: empty data");
  if (s == 0 || s > n) throw ConfigError("dec_fit: need 1 <= s <= n, got s=" + std::to_string(s));

  ClusterModel model;
  model.encoder = encoder;

  const Matrix z0 = nn::encode(model.encoder, x);
  cluster::KMeansOptions km;
  km.restarts = cfg.kmeans_restarts;
  km.seed = derive_seed(seed, 0);
  auto init = cluster::kmeans(z0, s, km);
  model.centroids = *init.clustering.centroids;
  model.initial = std::move(init.clustering);

  const std::size_t batch = std::min(cfg.batch_size, n);
  const std::size_t batches_per_pass = (n + batch - 1) / batch;
  const std::size_t update_interval = cfg.update_interval == 0 ? batches_per_pass : cfg.update_interval;

  Rng rng(derive_seed(seed, 1));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  nn::AdamState adam(nn::AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8});
  auto params = model.encoder.parameters();
  params.push_back(&model.centroids);

  TargetDistribution target;
  Labels previous;
  std::vector<std::size_t> rows;
  std::size_t cursor = n;  // forces a shuffle on the first batch
  for (std::size_t iter = 0; iter < cfg.max_iter; ++iter) {
    if (iter % update_interval == 0) {
      const auto q = soft_assign(nn::encode(model.encoder, x), model.centroids, cfg.alpha);
      target = target_distribution(q);
      Labels current = argmax_rows(q.q);
      if (!previous.empty()) {
        std::size_t changed = 0;
        for (std::size_t i = 0; i < n; ++i) changed += current[i] != previous[i];
        const double fraction = static_cast<double>(changed) / static_cast<double>(n);
        model.change_fractions.push_back(fraction);
        if (fraction < cfg.tol) {
          model.converged = true;
          break;
        }
      }
      previous = std::move(current);
    }

    if (cursor >= n) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const std::size_t end = std::min(cursor + batch, n);
    rows.assign(order.begin() + static_cast<std::ptrdiff_t>(cursor), order.begin() + static_cast<std::ptrdiff_t>(end));
    cursor = end;

    const Matrix xb = select_rows(x, rows);
    const auto acts = nn::dense_forward(model.encoder, xb);
    const Matrix& zb = acts.back();
    const auto qb = soft_assign(zb, model.centroids, cfg.alpha);
    const TargetDistribution pb{select_rows(target.p, rows)};
    auto g = kl_gradients(zb, model.centroids, pb, qb, cfg.alpha);
    const double scale = 1.0 / static_cast<double>(rows.size());
    auto grads = nn::backprop(model.encoder, acts, g.dz * scale);
    grads.push_back(g.dmu * scale);
    nn::adam_step(params, grads, adam);
    ++model.iterations;
  }

  for (const Matrix* p : model.encoder.parameters()) require_finite(*p, "dec_fit encoder");
  require_finite(model.centroids, "dec_fit centroids");

  const auto q = soft_assign(nn::encode(model.encoder, x), model.centroids, cfg.alpha);
  target_distribution(q);  // surfaces a collapsed soft column
  model.hard = hard_from(q.q, model.centroids);
  require_nonempty(model.hard, model.iterations);
  return model;
}

ClusterModel dec_fit(const nn::AutoencoderParams& autoencoder, const Matrix& x, std::size_t s,
                     const DecConfig& cfg, std::uint64_t seed) {
  autoencoder.validate();
  return dec_fit(autoencoder.encoder(), x, s, cfg, seed);
}

}  // namespace ifl::dec
