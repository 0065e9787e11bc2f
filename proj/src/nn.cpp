#include "ifl/nn.hpp"

#include "ifl/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

namespace ifl::nn {

std::vector<std::size_t> Network::dims() const {
  std::vector<std::size_t> out;
  if (layers.empty()) return out;
  out.push_back(static_cast<std::size_t>(layers.front().in_dim()));
  for (const auto& layer : layers) out.push_back(static_cast<std::size_t>(layer.out_dim()));
  return out;
}

Eigen::Index Network::input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
Eigen::Index Network::output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

std::vector<Matrix*> Network::parameters() {
  std::vector<Matrix*> out;
  out.reserve(2 * layers.size());
  for (auto& layer : layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<const Matrix*> Network::parameters() const {
  std::vector<const Matrix*> out;
  out.reserve(2 * layers.size());
  for (const auto& layer : layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

void Network::validate() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& layer = layers[k];
    if (layer.bias.rows() != 1 || layer.bias.cols() != layer.out_dim()) {
      throw ShapeError("layer " + std::to_string(k) + ": bias shape does not match weight columns");
    }
    if (k > 0 && layers[k - 1].out_dim() != layer.in_dim()) {
      throw ShapeError("layer " + std::to_string(k) + ": input dim " + std::to_string(layer.in_dim()) +
                       " does not chain with previous output " + std::to_string(layers[k - 1].out_dim()));
    }
  }
}

Eigen::Index AutoencoderParams::latent_dim() const {
  return network.layers.at(encoder_layers - 1).out_dim();
}

Network AutoencoderParams::encoder() const {
  Network enc;
  enc.layers.assign(network.layers.begin(), network.layers.begin() + static_cast<std::ptrdiff_t>(encoder_layers));
  return enc;
}

void AutoencoderParams::validate() const {
  network.validate();
  if (encoder_layers == 0 || encoder_layers > network.layers.size()) {
    throw ShapeError("autoencoder: encoder layer count out of range");
  }
  if (network.output_dim() != network.input_dim()) {
    throw ShapeError("autoencoder: output dim must equal input dim");
  }
}

Network make_network(const std::vector<std::size_t>& dims, const std::vector<Activation>& activations, Rng& rng) {
  if (dims.size() < 2) throw ConfigError("network needs at least an input and an output dimension");
  if (activations.size() != dims.size() - 1) throw ConfigError("one activation per layer is required");
  Network net;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const auto in = static_cast<Eigen::Index>(dims[k]);
    const auto out = static_cast<Eigen::Index>(dims[k + 1]);
    if (in == 0 || out == 0) throw ConfigError("layer dimensions must be positive");
    // He-uniform for rectifier layers, LeCun-uniform for linear ones.
    const double gain = activations[k] == Activation::Relu ? 6.0 : 3.0;
    const double limit = std::sqrt(gain / static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer{Matrix(in, out), Matrix::Zero(1, out), activations[k]};
    for (Eigen::Index i = 0; i < in; ++i) {
      for (Eigen::Index j = 0; j < out; ++j) layer.weight(i, j) = dist(rng);
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

AutoencoderParams make_autoencoder(const std::vector<std::size_t>& encoder_dims, std::uint64_t seed,
                                   Activation hidden) {
  if (encoder_dims.size() < 2) throw ConfigError("autoencoder needs at least input and latent dimensions");
  std::vector<std::size_t> dims(encoder_dims);
  for (auto it = encoder_dims.rbegin() + 1; it != encoder_dims.rend(); ++it) dims.push_back(*it);

  const std::size_t encoder_layers = encoder_dims.size() - 1;
  std::vector<Activation> acts(dims.size() - 1, hidden);
  acts[encoder_layers - 1] = Activation::Linear;
  acts.back() = Activation::Linear;

  Rng rng(seed);
  return AutoencoderParams{make_network(dims, acts, rng), encoder_layers};
}

namespace {

void apply_activation(Matrix& m, Activation act) {
  if (act == Activation::Relu) m = m.cwiseMax(0.0);
}

}  // namespace

std::vector<Matrix> dense_forward(const Network& net, const Matrix& batch) {
  if (batch.cols() != net.input_dim()) {
    throw ShapeError("dense_forward: batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                     std::to_string(net.input_dim()));
  }
  std::vector<Matrix> acts;
  acts.reserve(net.layers.size() + 1);
  acts.push_back(batch);
  for (const auto& layer : net.layers) {
    Matrix out = acts.back() * layer.weight;
    out.rowwise() += layer.bias.row(0);
    apply_activation(out, layer.activation);
    acts.push_back(std::move(out));
  }
  return acts;
}

std::vector<Matrix> dense_forward(const AutoencoderParams& params, const Matrix& batch) {
  return dense_forward(params.network, batch);
}

double reconstruction_loss(const Matrix& x, const Matrix& x_hat) {
  require_shape(x_hat, x.rows(), x.cols(), "reconstruction_loss");
  if (x.rows() == 0) return 0.0;
  return (x - x_hat).squaredNorm() / static_cast<double>(x.rows());
}

Gradients backprop(const Network& net, const std::vector<Matrix>& activations, const Matrix& output_grad,
                   Matrix* input_grad) {
  if (activations.size() != net.layers.size() + 1) throw ShapeError("backprop: activation count mismatch");
  require_shape(output_grad, activations.back().rows(), activations.back().cols(), "backprop output gradient");

  Gradients grads(2 * net.layers.size());
  Matrix delta = output_grad;
  for (std::size_t k = net.layers.size(); k-- > 0;) {
    const auto& layer = net.layers[k];
    if (layer.activation == Activation::Relu) {
      delta = delta.cwiseProduct((activations[k + 1].array() > 0.0).cast<double>().matrix());
    }
    grads[2 * k] = activations[k].transpose() * delta;
    grads[2 * k + 1] = delta.colwise().sum();
    if (k > 0 || input_grad != nullptr) delta = delta * layer.weight.transpose();
  }
  if (input_grad != nullptr) *input_grad = std::move(delta);
  return grads;
}

Gradients backprop_reconstruction(const AutoencoderParams& params, const Matrix& batch) {
  const auto acts = dense_forward(params, batch);
  const double n = static_cast<double>(std::max<Eigen::Index>(batch.rows(), 1));
  const Matrix output_grad = (2.0 / n) * (acts.back() - batch);
  return backprop(params.network, acts, output_grad);
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter and gradient counts differ");
  if (state.first_moment.empty()) {
    for (const Matrix* p : params) {
      state.first_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.second_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (state.first_moment.size() != params.size()) throw ShapeError("adam_step: state tracks a different parameter set");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_shape(grads[i], params[i]->rows(), params[i]->cols(), "adam_step gradient");
    require_shape(state.first_moment[i], params[i]->rows(), params[i]->cols(), "adam_step moment");
  }

  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    m = c.beta1 * m + (1.0 - c.beta1) * grads[i];
    v = c.beta2 * v + (1.0 - c.beta2) * grads[i].cwiseAbs2();
    auto m_hat = m.array() / correction1;
    auto v_hat = v.array() / correction2;
    params[i]->array() -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
  }
}

TrainedAutoencoder train_autoencoder(const Matrix& data, const std::vector<std::size_t>& encoder_dims,
                                     const TrainConfig& cfg) {
  if (data.rows() == 0) throw DataError("train_autoencoder: empty data");
  require_finite(data, "train_autoencoder input");
  if (encoder_dims.empty() || static_cast<Eigen::Index>(encoder_dims.front()) != data.cols()) {
    throw ShapeError("train_autoencoder: first layer dim must equal the data width");
  }
  if (cfg.batch_size == 0) throw ConfigError("train_autoencoder: batch size must be positive");

  const auto start = std::chrono::steady_clock::now();
  TrainedAutoencoder result{make_autoencoder(encoder_dims, cfg.seed, cfg.hidden_activation), {}};
  result.log.seed = cfg.seed;

  // Shuffling draws from its own stream so that initialization does not depend on epoch count.
  Rng rng(derive_seed(cfg.seed, 1));
  const auto n = static_cast<std::size_t>(data.rows());
  const std::size_t batch = std::min(cfg.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  AdamState adam(cfg.adam);
  auto params = result.params.network.parameters();
  std::vector<std::size_t> rows;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::size_t end = std::min(begin + batch, n);
      rows.assign(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end));
      const Matrix xb = select_rows(data, rows);
      const auto acts = dense_forward(result.params, xb);
      const double b = static_cast<double>(xb.rows());
      epoch_loss += reconstruction_loss(xb, acts.back()) * b;
      const Matrix output_grad = (2.0 / b) * (acts.back() - xb);
      const auto grads = backprop(result.params.network, acts, output_grad);
      adam_step(params, grads, adam);
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw NumericError("train_autoencoder: loss diverged at epoch " + std::to_string(epoch));
    }
    result.log.epoch_loss.push_back(epoch_loss);
  }
  for (const Matrix* p : result.params.network.parameters()) require_finite(*p, "train_autoencoder parameters");
  result.log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

Matrix encode(const Network& encoder, const Matrix& x) { return dense_forward(encoder, x).back(); }

Matrix encode(const AutoencoderParams& params, const Matrix& x) {
  if (x.cols() != params.input_dim()) {
    throw ShapeError("encode: input has " + std::to_string(x.cols()) + " columns, encoder expects " +
                     std::to_string(params.input_dim()));
  }
  Matrix z = x;
  for (std::size_t k = 0; k < params.encoder_layers; ++k) {
    const auto& layer = params.network.layers[k];
    Matrix out = z * layer.weight;
    out.rowwise() += layer.bias.row(0);
    apply_activation(out, layer.activation);
    z = std::move(out);
  }
  return z;
}

}  // namespace ifl::nn
