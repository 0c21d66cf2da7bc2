#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <type_traits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "prescreen/error.hpp"
#include "prescreen/rng.hpp"

// Dense feed-forward binary classifier: ReLU/tanh/sigmoid hidden layers, one
// sigmoid output unit, regularized cross-entropy, exact backprop, Adam/SGD.

namespace prescreen::nnet {

enum class Activation : std::uint8_t { ReLU = 0, Sigmoid = 1, Tanh = 2 };
enum class Optimizer : std::uint8_t { Adam = 0, Sgd = 1 };

/// Penalties attached to one dense layer. Activity regularization penalizes
/// the layer's outputs (post-activation) averaged over the batch.
struct Regularization {
  double kernel_l1 = 0.0;
  double kernel_l2 = 0.0;
  double bias_l2 = 0.0;
  double activity_l2 = 0.0;
};

struct LayerSpec {
  std::size_t width = 1;
  Activation activation = Activation::ReLU;
  Regularization reg{};
};

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct NetworkSpec {
  std::size_t input_dim = 0;
  std::vector<LayerSpec> hidden;
  std::size_t epochs = 300;
  std::size_t batch_size = 10;
  Optimizer optimizer = Optimizer::Adam;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  AdamHyper adam{};
};

inline void validate(const NetworkSpec& spec) {
  if (spec.input_dim == 0) throw Error(ErrorKind::InvalidHyperparam, "network input_dim must be >= 1");
  if (spec.batch_size == 0) throw Error(ErrorKind::InvalidHyperparam, "batch_size must be >= 1");
  if (spec.epochs == 0) throw Error(ErrorKind::InvalidHyperparam, "epochs must be >= 1");
  if (!(spec.learning_rate > 0.0)) throw Error(ErrorKind::InvalidHyperparam, "learning_rate must be > 0");
  for (const auto& l : spec.hidden) {
    if (l.width == 0) throw Error(ErrorKind::InvalidHyperparam, "layer width must be >= 1");
    const auto& r = l.reg;
    if (r.kernel_l1 < 0 || r.kernel_l2 < 0 || r.bias_l2 < 0 || r.activity_l2 < 0)
      throw Error(ErrorKind::InvalidHyperparam, "regularization coefficients must be >= 0");
  }
}

inline constexpr Regularization kDeepRegularization{1e-5, 1e-4, 1e-4, 1e-4};

/// Four ReLU layers of 100 units with L1-L2 kernel, L2 bias and L2 activity
/// penalties; Adam, 300 epochs, batch 10.
inline NetworkSpec deep_spec(std::size_t input_dim, std::uint64_t seed = 0) {
  NetworkSpec spec;
  spec.input_dim = input_dim;
  spec.hidden.assign(4, LayerSpec{100, Activation::ReLU, kDeepRegularization});
  spec.seed = seed;
  return spec;
}

/// One unregularized hidden layer of 32 ReLU units.
inline NetworkSpec shallow_spec(std::size_t input_dim, std::uint64_t seed = 0) {
  NetworkSpec spec;
  spec.input_dim = input_dim;
  spec.hidden = {LayerSpec{32, Activation::ReLU, {}}};
  spec.seed = seed;
  return spec;
}

inline constexpr double kProbClamp = 1e-7;

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void activate(Eigen::MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::ReLU: z = z.cwiseMax(0.0); break;
    case Activation::Sigmoid: z = z.unaryExpr([](double v) { return sigmoid(v); }); break;
    case Activation::Tanh: z = z.array().tanh().matrix(); break;
  }
}

/// d(act)/dz expressed through the activation output a.
inline void scale_by_derivative(Eigen::MatrixXd& grad, const Eigen::MatrixXd& a, Activation act) {
  switch (act) {
    case Activation::ReLU: grad = (a.array() > 0.0).select(grad, 0.0); break;
    case Activation::Sigmoid: grad = (grad.array() * a.array() * (1.0 - a.array())).matrix(); break;
    case Activation::Tanh: grad = (grad.array() * (1.0 - a.array().square())).matrix(); break;
  }
}

}  // namespace detail

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Parameters live in one flat buffer (per layer: weights out x in column-major,
/// then bias) so optimizers and serialization work on a single span.
class Network {
 public:
  struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    Activation activation = Activation::ReLU;
    Regularization reg{};
    std::size_t weight_offset = 0;
    std::size_t bias_offset = 0;
  };

  Network() = default;

  /// Zero-initialized network for `spec` (hidden layers plus sigmoid output).
  explicit Network(const NetworkSpec& spec) {
    validate(spec);
    std::size_t in = spec.input_dim, offset = 0;
    auto add = [&](std::size_t width, Activation act, Regularization reg) {
      Layer l{in, width, act, reg, offset, offset + in * width};
      offset = l.bias_offset + width;
      layers_.push_back(l);
      in = width;
    };
    for (const auto& h : spec.hidden) add(h.width, h.activation, h.reg);
    add(1, Activation::Sigmoid, {});
    params_.assign(offset, 0.0);
  }

  /// He-uniform weights for ReLU layers, Glorot-uniform otherwise; zero biases.
  static Network initialized(const NetworkSpec& spec, Rng& rng) {
    Network net(spec);
    for (const auto& l : net.layers_) {
      const double limit = l.activation == Activation::ReLU
                               ? std::sqrt(6.0 / static_cast<double>(l.in))
                               : std::sqrt(6.0 / static_cast<double>(l.in + l.out));
      for (std::size_t i = 0; i < l.in * l.out; ++i) net.params_[l.weight_offset + i] = rng.uniform(-limit, limit);
    }
    return net;
  }

  std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  Eigen::Map<Eigen::MatrixXd> weights(std::size_t layer) {
    const auto& l = layers_.at(layer);
    return {params_.data() + l.weight_offset, static_cast<Eigen::Index>(l.out), static_cast<Eigen::Index>(l.in)};
  }
  Eigen::Map<const Eigen::MatrixXd> weights(std::size_t layer) const {
    const auto& l = layers_.at(layer);
    return {params_.data() + l.weight_offset, static_cast<Eigen::Index>(l.out), static_cast<Eigen::Index>(l.in)};
  }
  Eigen::Map<Eigen::VectorXd> bias(std::size_t layer) {
    const auto& l = layers_.at(layer);
    return {params_.data() + l.bias_offset, static_cast<Eigen::Index>(l.out)};
  }
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const {
    const auto& l = layers_.at(layer);
    return {params_.data() + l.bias_offset, static_cast<Eigen::Index>(l.out)};
  }

  /// Probability of the positive class per row, strictly inside (0, 1).
  Eigen::VectorXd forward(const Eigen::MatrixXd& batch) const {
    std::vector<Eigen::MatrixXd> acts;
    run(batch, acts);
    const double hi = std::nextafter(1.0, 0.0);
    return acts.back().col(0).cwiseMax(std::numeric_limits<double>::min()).cwiseMin(hi);
  }

  double loss(const Eigen::MatrixXd& batch, std::span<const int> labels) const {
    std::vector<Eigen::MatrixXd> acts;
    run(batch, acts);
    return total_loss(acts, labels);
  }

  /// Loss and exact reverse-mode gradient over the whole batch.
  LossAndGradient loss_and_gradient(const Eigen::MatrixXd& batch, std::span<const int> labels) const {
    LossAndGradient out;
    out.gradient.resize(params_.size());
    out.loss = loss_and_gradient(batch, labels, out.gradient);
    return out;
  }

  /// Same, writing every entry of `gradient` (sized like parameters()) in place.
  double loss_and_gradient(const Eigen::MatrixXd& batch, std::span<const int> labels, std::span<double> gradient) const {
    if (gradient.size() != params_.size())
      throw Error(ErrorKind::ShapeMismatch, "gradient buffer size differs from parameter count");
    std::vector<Eigen::MatrixXd> acts;
    run(batch, acts);
    const double loss = total_loss(acts, labels);

    const auto rows = batch.rows();
    const double inv_n = 1.0 / static_cast<double>(rows);
    // dL/dz at the output (batch x 1); zero where the probability is clamped.
    Eigen::MatrixXd delta(rows, 1);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double p = acts.back()(i, 0);
      delta(i, 0) = (p > kProbClamp && p < 1.0 - kProbClamp) ? (p - labels[static_cast<std::size_t>(i)]) * inv_n : 0.0;
    }
    for (std::size_t li = layers_.size(); li-- > 0;) {
      const auto& l = layers_[li];
      const Eigen::MatrixXd& input = acts[li];
      Eigen::Map<Eigen::MatrixXd> dW(gradient.data() + l.weight_offset, static_cast<Eigen::Index>(l.out),
                                     static_cast<Eigen::Index>(l.in));
      Eigen::Map<Eigen::VectorXd> db(gradient.data() + l.bias_offset, static_cast<Eigen::Index>(l.out));
      dW.noalias() = delta.transpose() * input;
      db = delta.colwise().sum().transpose();
      const auto W = weights(li);
      if (l.reg.kernel_l1 > 0.0) dW.array() += l.reg.kernel_l1 * ((W.array() > 0.0).cast<double>() - (W.array() < 0.0).cast<double>());
      if (l.reg.kernel_l2 > 0.0) dW += 2.0 * l.reg.kernel_l2 * W;
      if (l.reg.bias_l2 > 0.0) db += 2.0 * l.reg.bias_l2 * bias(li);
      if (li == 0) break;
      // Propagate to the previous layer's output, add its activity penalty, then
      // pass through its activation derivative.
      Eigen::MatrixXd grad_a = delta * W;
      const auto& prev = layers_[li - 1];
      if (prev.reg.activity_l2 > 0.0) grad_a += (2.0 * prev.reg.activity_l2 * inv_n) * acts[li];
      detail::scale_by_derivative(grad_a, acts[li], prev.activation);
      delta = std::move(grad_a);
    }
    return loss;
  }

  /// Sum of weight, bias and activity penalties for an already-run batch.
  double penalty(const std::vector<Eigen::MatrixXd>& acts) const {
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(acts.front().rows());
    for (std::size_t li = 0; li < layers_.size(); ++li) {
      const auto& r = layers_[li].reg;
      const auto W = weights(li);
      if (r.kernel_l1 > 0.0) total += r.kernel_l1 * W.cwiseAbs().sum();
      if (r.kernel_l2 > 0.0) total += r.kernel_l2 * W.squaredNorm();
      if (r.bias_l2 > 0.0) total += r.bias_l2 * bias(li).squaredNorm();
      if (r.activity_l2 > 0.0) total += r.activity_l2 * acts[li + 1].squaredNorm() * inv_n;
    }
    return total;
  }

 private:
  friend Network read_network(std::istream& in);

  /// acts[0] is the input, acts[l + 1] the output of layer l.
  void run(const Eigen::MatrixXd& batch, std::vector<Eigen::MatrixXd>& acts) const {
    if (static_cast<std::size_t>(batch.cols()) != input_dim())
      throw Error(ErrorKind::DimensionMismatch, "batch has " + std::to_string(batch.cols()) +
                                                    " columns, network expects " + std::to_string(input_dim()));
    acts.clear();
    acts.reserve(layers_.size() + 1);
    acts.push_back(batch);
    for (std::size_t li = 0; li < layers_.size(); ++li) {
      Eigen::MatrixXd z = acts.back() * weights(li).transpose();
      z.rowwise() += bias(li).transpose();
      detail::activate(z, layers_[li].activation);
      acts.push_back(std::move(z));
    }
  }

  double total_loss(const std::vector<Eigen::MatrixXd>& acts, std::span<const int> labels) const {
    const auto rows = acts.front().rows();
    if (static_cast<std::size_t>(rows) != labels.size())
      throw Error(ErrorKind::DimensionMismatch, "label count differs from batch rows");
    if (rows == 0) throw Error(ErrorKind::DimensionMismatch, "empty batch");
    double bce = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double p = std::clamp(acts.back()(i, 0), kProbClamp, 1.0 - kProbClamp);
      const int y = labels[static_cast<std::size_t>(i)];
      if (y != 0 && y != 1) throw Error(ErrorKind::RangeViolation, "labels must be 0/1");
      bce -= y == 1 ? std::log(p) : std::log(1.0 - p);
    }
    return bce / static_cast<double>(rows) + penalty(acts);
  }

  std::vector<Layer> layers_;
  std::vector<double> params_;
};

// ---------------------------------------------------------------------------
// Optimizers

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  AdamState(std::size_t size, AdamHyper hyper = {})
      : m(size, 0.0), v(size, 0.0), beta1(hyper.beta1), beta2(hyper.beta2), epsilon(hyper.epsilon) {}
};

inline void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size())
    throw Error(ErrorKind::ShapeMismatch, "adam_step: parameter, gradient and state sizes differ");
  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  const auto n = static_cast<Eigen::Index>(params.size());
  Eigen::Map<Eigen::ArrayXd> p(params.data(), n), m(state.m.data(), n), v(state.v.data(), n);
  const Eigen::Map<const Eigen::ArrayXd> g(grads.data(), n);
  m = state.beta1 * m + (1.0 - state.beta1) * g;
  v = state.beta2 * v + (1.0 - state.beta2) * g.square();
  p -= lr * (m / c1) / ((v / c2).sqrt() + state.epsilon);
}

inline void sgd_step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size()) throw Error(ErrorKind::ShapeMismatch, "sgd_step: size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

// ---------------------------------------------------------------------------
// Training

struct TrainResult {
  Network network;
  std::vector<double> loss_trace;  // mean mini-batch loss per epoch
};

inline TrainResult train(const NetworkSpec& spec, const Eigen::MatrixXd& x, std::span<const int> labels) {
  validate(spec);
  const auto n = static_cast<std::size_t>(x.rows());
  if (labels.size() != n) throw Error(ErrorKind::DimensionMismatch, "label count differs from rows");
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (pos == 0 || pos == n) throw Error(ErrorKind::SingleClass, "training data holds a single class");

  Rng rng(spec.seed);
  TrainResult result{Network::initialized(spec, rng), {}};
  Network& net = result.network;
  AdamState adam(net.parameters().size(), spec.adam);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batches = (n + spec.batch_size - 1) / spec.batch_size;
  Eigen::MatrixXd xb;
  std::vector<int> yb;
  std::vector<double> grad(net.parameters().size());
  result.loss_trace.reserve(spec.epochs);

  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * spec.batch_size, end = std::min(n, begin + spec.batch_size);
      xb.resize(static_cast<Eigen::Index>(end - begin), x.cols());
      yb.resize(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        xb.row(static_cast<Eigen::Index>(i - begin)) = x.row(static_cast<Eigen::Index>(order[i]));
        yb[i - begin] = labels[order[i]];
      }
      const double loss = net.loss_and_gradient(xb, yb, grad);
      if (!std::isfinite(loss))
        throw Error(ErrorKind::NonFiniteLoss,
                    "loss became non-finite at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b));
      if (spec.optimizer == Optimizer::Adam) {
        adam_step(adam, net.parameters(), grad, spec.learning_rate);
      } else {
        sgd_step(net.parameters(), grad, spec.learning_rate);
      }
      if (!Eigen::Map<const Eigen::ArrayXd>(net.parameters().data(), static_cast<Eigen::Index>(net.parameters().size()))
               .allFinite())
        throw Error(ErrorKind::NonFiniteLoss, "parameters became non-finite at epoch " + std::to_string(epoch));
      epoch_loss += loss;
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(batches));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Serialization. Layout (all integers and reals little-endian):
//   "PSNN" | u32 version | u64 input_dim | u64 layer_count
//   per layer: u64 width | u8 activation | f64 kernel_l1, kernel_l2, bias_l2, activity_l2
//   u64 parameter_count | f64 parameters...

inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw Error(ErrorKind::InvalidModelFile, "model file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

inline void write_network(const Network& net, std::ostream& out) {
  out.write("PSNN", 4);
  detail::put_le<std::uint32_t>(out, kModelFormatVersion);
  detail::put_le<std::uint64_t>(out, net.input_dim());
  detail::put_le<std::uint64_t>(out, net.layers().size());
  for (const auto& l : net.layers()) {
    detail::put_le<std::uint64_t>(out, l.out);
    detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(l.activation));
    detail::put_le<double>(out, l.reg.kernel_l1);
    detail::put_le<double>(out, l.reg.kernel_l2);
    detail::put_le<double>(out, l.reg.bias_l2);
    detail::put_le<double>(out, l.reg.activity_l2);
  }
  detail::put_le<std::uint64_t>(out, net.parameters().size());
  for (double p : net.parameters()) detail::put_le<double>(out, p);
}

inline Network read_network(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "PSNN", 4) != 0)
    throw Error(ErrorKind::InvalidModelFile, "bad magic; not a network file");
  const auto version = detail::get_le<std::uint32_t>(in);
  if (version != kModelFormatVersion)
    throw Error(ErrorKind::InvalidModelFile, "unsupported model format version " + std::to_string(version));
  NetworkSpec spec;
  spec.input_dim = detail::get_le<std::uint64_t>(in);
  const auto count = detail::get_le<std::uint64_t>(in);
  if (count == 0 || count > 4096) throw Error(ErrorKind::InvalidModelFile, "implausible layer count");
  std::vector<LayerSpec> layers(count);
  for (auto& l : layers) {
    l.width = detail::get_le<std::uint64_t>(in);
    const auto act = detail::get_le<std::uint8_t>(in);
    if (act > 2) throw Error(ErrorKind::InvalidModelFile, "unknown activation code");
    l.activation = static_cast<Activation>(act);
    l.reg.kernel_l1 = detail::get_le<double>(in);
    l.reg.kernel_l2 = detail::get_le<double>(in);
    l.reg.bias_l2 = detail::get_le<double>(in);
    l.reg.activity_l2 = detail::get_le<double>(in);
  }
  const auto& last = layers.back();
  if (last.width != 1 || last.activation != Activation::Sigmoid)
    throw Error(ErrorKind::InvalidModelFile, "output layer must be a single sigmoid unit");
  spec.hidden.assign(layers.begin(), layers.end() - 1);
  Network net(spec);
  const auto n_params = detail::get_le<std::uint64_t>(in);
  if (n_params != net.params_.size()) throw Error(ErrorKind::InvalidModelFile, "parameter count mismatch");
  for (auto& p : net.params_) p = detail::get_le<double>(in);
  return net;
}

}  // namespace prescreen::nnet
