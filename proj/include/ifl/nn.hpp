#pragma once

#include "ifl/matrix.hpp"
#include "ifl/random.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ifl::nn {

enum class Activation { Linear, Relu };

/// Fully connected layer computing act(x * weight + bias) on row-major batches.
struct DenseLayer {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out
  Activation activation = Activation::Linear;

  Eigen::Index in_dim() const { return weight.rows(); }
  Eigen::Index out_dim() const { return weight.cols(); }
};

/// A stack of dense layers. Parameters are ordered W0, b0, W1, b1, ...
struct Network {
  std::vector<DenseLayer> layers;

  std::vector<std::size_t> dims() const;
  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;

  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;

  /// Throws ShapeError if consecutive layers do not chain.
  void validate() const;
};

/// Symmetric autoencoder. The first `encoder_layers` layers form the encoder f, the rest the decoder g.
struct AutoencoderParams {
  Network network;
  std::size_t encoder_layers = 0;

  std::vector<std::size_t> layer_dims() const { return network.dims(); }
  Eigen::Index input_dim() const { return network.input_dim(); }
  Eigen::Index latent_dim() const;

  /// Copy of the encoder half.
  Network encoder() const;

  void validate() const;
};

/// Gradients in the same order and shapes as Network::parameters().
using Gradients = std::vector<Matrix>;

/// Builds a network with fan-in scaled uniform weights and zero biases.
/// `activations` has one entry per layer (dims.size() - 1).
Network make_network(const std::vector<std::size_t>& dims, const std::vector<Activation>& activations, Rng& rng);

/// Mirrors `encoder_dims` (d, hidden..., e) into d-hidden-e-hidden-d. Hidden layers use
/// `hidden`; the bottleneck and reconstruction layers are linear.
AutoencoderParams make_autoencoder(const std::vector<std::size_t>& encoder_dims, std::uint64_t seed,
                                   Activation hidden = Activation::Relu);

/// All layer outputs; element 0 is the input batch, element k+1 the output of layer k.
std::vector<Matrix> dense_forward(const Network& net, const Matrix& batch);
std::vector<Matrix> dense_forward(const AutoencoderParams& params, const Matrix& batch);

/// Mean over instances of the squared Euclidean reconstruction error.
double reconstruction_loss(const Matrix& x, const Matrix& x_hat);

/// Backpropagates dL/d(output) through a forward pass produced by dense_forward.
/// When `input_grad` is non-null it receives dL/d(input).
Gradients backprop(const Network& net, const std::vector<Matrix>& activations, const Matrix& output_grad,
                   Matrix* input_grad = nullptr);

/// Exact gradients of reconstruction_loss(batch, g(f(batch))) with respect to every parameter.
Gradients backprop_reconstruction(const AutoencoderParams& params, const Matrix& batch);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::uint64_t step = 0;

  AdamState() = default;
  explicit AdamState(AdamConfig cfg) : config(cfg) {}
};

/// One bias-corrected Adam update. Moments are allocated on the first call and must keep their shapes.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 256;
  AdamConfig adam;
  std::uint64_t seed = 0;
  Activation hidden_activation = Activation::Relu;
};

struct TrainLog {
  std::vector<double> epoch_loss;
  double seconds = 0.0;
  std::uint64_t seed = 0;
};

struct TrainedAutoencoder {
  AutoencoderParams params;
  TrainLog log;
};

/// End-to-end minibatch Adam on the reconstruction loss. Batches are a seeded shuffle per epoch;
/// the last partial batch is used as-is.
TrainedAutoencoder train_autoencoder(const Matrix& data, const std::vector<std::size_t>& encoder_dims,
                                     const TrainConfig& cfg);

/// Bottleneck activations, n x e.
Matrix encode(const AutoencoderParams& params, const Matrix& x);
Matrix encode(const Network& encoder, const Matrix& x);

}  // namespace ifl::nn
