#include "prema/tinynn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "prema/errors.hpp"

namespace prema::nn {
namespace {

constexpr double kProbabilityFloor = 1e-12;

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

void apply_activation(const Activation& act, std::vector<double>& z) {
  switch (act.kind) {
    case ActivationKind::kLinear:
      return;
    case ActivationKind::kReLU:
      for (double& v : z) v = v > 0 ? v : 0.0;
      return;
    case ActivationKind::kLeakyReLU:
      for (double& v : z) v = leaky_relu(v, act.alpha);
      return;
    case ActivationKind::kSoftmax:
      z = softmax(z);
      return;
  }
}

// dL/dz given dL/da for elementwise activations; `z` is the pre-activation.
void activation_backward(const Activation& act, std::span<const double> z,
                         std::span<const double> a, std::vector<double>& grad) {
  switch (act.kind) {
    case ActivationKind::kLinear:
      return;
    case ActivationKind::kReLU:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!(z[i] > 0)) grad[i] = 0.0;
      }
      return;
    case ActivationKind::kLeakyReLU:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!(z[i] > 0)) grad[i] *= act.alpha;
      }
      return;
    case ActivationKind::kSoftmax: {
      // J^T g for softmax: a * (g - <g, a>).
      double dot = 0.0;
      for (std::size_t i = 0; i < grad.size(); ++i) dot += grad[i] * a[i];
      for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] = a[i] * (grad[i] - dot);
      }
      return;
    }
  }
}

std::vector<double> affine(const Layer& layer, std::span<const double> x) {
  const std::size_t in = layer.spec.in_dim;
  std::vector<double> z(layer.biases);
  for (std::size_t r = 0; r < layer.spec.out_dim; ++r) {
    const double* row = layer.weights.data() + r * in;
    double acc = 0.0;
    for (std::size_t c = 0; c < in; ++c) acc += row[c] * x[c];
    z[r] += acc;
  }
  return z;
}

void check_input(const Mlp& model, std::span<const double> x) {
  if (x.size() != model.input_dim()) {
    throw ShapeError("input has " + std::to_string(x.size()) +
                     " features, model expects " +
                     std::to_string(model.input_dim()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw ParameterError("non-finite model input");
  }
}

void check_target(const Mlp& model, std::span<const double> y) {
  if (y.size() != model.output_dim()) {
    throw ShapeError("target has " + std::to_string(y.size()) +
                     " values, model outputs " +
                     std::to_string(model.output_dim()));
  }
}

double sample_loss(LossKind loss, std::span<const double> y,
                   std::span<const double> out) {
  return loss == LossKind::kCategoricalCrossEntropy ? cce_loss(y, out)
                                                    : mae_loss(y, out);
}

// Forward pass keeping every pre-activation and activation.
struct Trace {
  std::vector<std::vector<double>> z;  // per layer
  std::vector<std::vector<double>> a;  // a[0] = scaled input, a[l+1] = layer l
};

Trace forward(const Mlp& model, std::span<const double> x) {
  Trace t;
  t.a.push_back(model.scaler.apply(x));
  for (const Layer& layer : model.layers) {
    std::vector<double> z = affine(layer, t.a.back());
    std::vector<double> a = z;
    apply_activation(layer.spec.activation, a);
    t.z.push_back(std::move(z));
    t.a.push_back(std::move(a));
  }
  return t;
}

template <typename F>
void for_each_param_block(Mlp& model, const Gradients& g, Gradients& v,
                          F&& fn) {
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    fn(std::span<double>(model.layers[l].weights),
       std::span<const double>(g.weights[l]), std::span<double>(v.weights[l]));
    fn(std::span<double>(model.layers[l].biases),
       std::span<const double>(g.biases[l]), std::span<double>(v.biases[l]));
  }
}

}  // namespace

// --- scaler -----------------------------------------------------------------

FeatureScaler FeatureScaler::identity(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

FeatureScaler FeatureScaler::fit(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw ParameterError("cannot fit a scaler on zero rows");
  const std::size_t dim = rows.front().size();
  FeatureScaler s{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (const auto& r : rows) {
    if (r.size() != dim) throw ShapeError("ragged rows in scaler fit");
    for (std::size_t i = 0; i < dim; ++i) s.mean[i] += r[i];
  }
  const double n = static_cast<double>(rows.size());
  for (double& m : s.mean) m /= n;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = r[i] - s.mean[i];
      s.std[i] += d * d;
    }
  }
  for (double& sd : s.std) {
    sd = std::sqrt(sd / n);
    if (!(sd > 0)) sd = 1.0;
  }
  return s;
}

std::vector<double> FeatureScaler::apply(std::span<const double> x) const {
  if (x.size() != mean.size()) throw ShapeError("scaler dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / std[i];
  return out;
}

// --- model ------------------------------------------------------------------

void Mlp::validate() const {
  if (layers.empty()) throw ShapeError("model has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    const LayerSpec& s = layer.spec;
    if (s.in_dim < 1 || s.out_dim < 1) throw ShapeError("layer dims must be >= 1");
    if (l > 0 && layers[l - 1].spec.out_dim != s.in_dim) {
      throw ShapeError("layer " + std::to_string(l) +
                       " input does not match previous output");
    }
    if (s.activation.kind == ActivationKind::kSoftmax && l + 1 != layers.size()) {
      throw ShapeError("softmax is only allowed on the final layer");
    }
    if (layer.weights.size() != s.in_dim * s.out_dim ||
        layer.biases.size() != s.out_dim) {
      throw ShapeError("parameter storage does not match layer dims");
    }
    if (!std::isfinite(s.activation.alpha)) {
      throw ParameterError("non-finite activation alpha");
    }
    for (double v : layer.weights) {
      if (!std::isfinite(v)) throw ParameterError("non-finite weight");
    }
    for (double v : layer.biases) {
      if (!std::isfinite(v)) throw ParameterError("non-finite bias");
    }
  }
  if (scaler.mean.size() != input_dim() || scaler.std.size() != input_dim()) {
    throw ShapeError("scaler dimension does not match model input");
  }
  for (std::size_t i = 0; i < scaler.std.size(); ++i) {
    if (!std::isfinite(scaler.mean[i]) || !std::isfinite(scaler.std[i]) ||
        !(scaler.std[i] > 0)) {
      throw ParameterError("scaler entries must be finite with std > 0");
    }
  }
}

std::vector<std::size_t> Mlp::parameter_counts() const {
  std::vector<std::size_t> counts;
  for (const Layer& l : layers) counts.push_back(l.spec.parameter_count());
  return counts;
}

std::size_t Mlp::parameter_count() const {
  const auto counts = parameter_counts();
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

Mlp make_mlp(ModelKind kind, std::span<const LayerSpec> specs,
             std::uint64_t seed) {
  if (specs.empty()) throw ShapeError("model needs at least one layer");
  Mlp m;
  m.kind = kind;
  std::mt19937_64 rng(seed);
  for (const LayerSpec& s : specs) {
    Layer layer;
    layer.spec = s;
    const double limit =
        std::sqrt(6.0 / static_cast<double>(s.in_dim + s.out_dim));
    std::uniform_real_distribution<double> dist(-limit, limit);
    layer.weights.resize(s.in_dim * s.out_dim);
    for (double& w : layer.weights) w = dist(rng);
    layer.biases.assign(s.out_dim, 0.0);
    m.layers.push_back(std::move(layer));
  }
  m.scaler = FeatureScaler::identity(specs.front().in_dim);
  round_to_storage_precision(m);
  m.validate();
  return m;
}

void round_to_storage_precision(Mlp& model) {
  for (Layer& l : model.layers) {
    for (double& w : l.weights) w = static_cast<float>(w);
    for (double& b : l.biases) b = static_cast<float>(b);
  }
}

// --- primitives -------------------------------------------------------------

double leaky_relu(double x, double alpha) { return x >= 0 ? x : alpha * x; }

std::vector<double> softmax(std::span<const double> v) {
  if (v.empty()) throw ParameterError("softmax of an empty vector");
  const double peak = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - peak);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

double cce_loss(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ShapeError("cross-entropy operands differ in length");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] != 0.0) {
      loss -= y_true[i] * std::log(std::max(y_pred[i], kProbabilityFloor));
    }
  }
  return loss;
}

double mae_loss(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.empty()) throw ParameterError("MAE of empty vectors");
  if (y_true.size() != y_pred.size()) {
    throw ShapeError("MAE operands differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    sum += std::abs(y_true[i] - y_pred[i]);
  }
  return sum / static_cast<double>(y_true.size());
}

std::vector<double> infer(const Mlp& model, std::span<const double> x) {
  check_input(model, x);
  std::vector<double> a = model.scaler.apply(x);
  for (const Layer& layer : model.layers) {
    a = affine(layer, a);
    apply_activation(layer.spec.activation, a);
  }
  return a;
}

double batch_loss(const Mlp& model, std::span<const Sample> batch,
                  LossKind loss) {
  if (batch.empty()) throw ParameterError("empty batch");
  double total = 0.0;
  for (const Sample& s : batch) {
    check_target(model, s.y);
    total += sample_loss(loss, s.y, infer(model, s.x));
  }
  return total / static_cast<double>(batch.size());
}

Gradients zero_gradients(const Mlp& model) {
  Gradients g;
  for (const Layer& l : model.layers) {
    g.weights.emplace_back(l.weights.size(), 0.0);
    g.biases.emplace_back(l.biases.size(), 0.0);
  }
  return g;
}

Gradients gradients(const Mlp& model, std::span<const Sample> batch,
                    LossKind loss) {
  if (batch.empty()) throw ParameterError("empty batch");
  Gradients g = zero_gradients(model);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  const std::size_t depth = model.layers.size();
  const bool fused_softmax_cce =
      loss == LossKind::kCategoricalCrossEntropy &&
      model.layers.back().spec.activation.kind == ActivationKind::kSoftmax;

  for (const Sample& s : batch) {
    check_input(model, s.x);
    check_target(model, s.y);
    const Trace t = forward(model, s.x);
    const std::vector<double>& out = t.a.back();

    // dL/dz for the last layer.
    std::vector<double> delta(out.size());
    if (fused_softmax_cce) {
      const double y_sum = std::accumulate(s.y.begin(), s.y.end(), 0.0);
      for (std::size_t i = 0; i < out.size(); ++i) {
        delta[i] = out[i] * y_sum - s.y[i];
      }
    } else {
      if (loss == LossKind::kCategoricalCrossEntropy) {
        for (std::size_t i = 0; i < out.size(); ++i) {
          delta[i] = out[i] > kProbabilityFloor ? -s.y[i] / out[i] : 0.0;
        }
      } else {
        const double inv_n = 1.0 / static_cast<double>(out.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
          delta[i] = sign(out[i] - s.y[i]) * inv_n;
        }
      }
      activation_backward(model.layers.back().spec.activation, t.z.back(),
                          out, delta);
    }

    for (std::size_t l = depth; l-- > 0;) {
      const Layer& layer = model.layers[l];
      const std::vector<double>& input = t.a[l];
      const std::size_t in = layer.spec.in_dim;
      for (std::size_t r = 0; r < layer.spec.out_dim; ++r) {
        const double d = delta[r] * inv_batch;
        g.biases[l][r] += d;
        double* gw = g.weights[l].data() + r * in;
        for (std::size_t c = 0; c < in; ++c) gw[c] += d * input[c];
      }
      if (l == 0) break;
      std::vector<double> prev(in, 0.0);
      for (std::size_t r = 0; r < layer.spec.out_dim; ++r) {
        const double* row = layer.weights.data() + r * in;
        for (std::size_t c = 0; c < in; ++c) prev[c] += row[c] * delta[r];
      }
      activation_backward(model.layers[l - 1].spec.activation, t.z[l - 1],
                          t.a[l], prev);
      delta = std::move(prev);
    }
  }
  return g;
}

// --- optimisation -----------------------------------------------------------

void TrainConfig::validate() const {
  if (epochs < 1) throw ParameterError("epochs must be >= 1");
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) {
    throw ParameterError("learning_rate must be > 0");
  }
  if (!(rho > 0 && rho < 1)) throw ParameterError("rho must lie in (0, 1)");
  if (!(epsilon > 0)) throw ParameterError("epsilon must be > 0");
}

void rmsprop_update(std::span<double> params, std::span<const double> grads,
                    std::span<double> velocity, const TrainConfig& cfg) {
  if (params.size() != grads.size() || params.size() != velocity.size()) {
    throw ShapeError("RMSProp operands differ in length");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    velocity[i] = cfg.rho * velocity[i] + (1.0 - cfg.rho) * g * g;
    params[i] -= cfg.learning_rate * g / (std::sqrt(velocity[i]) + cfg.epsilon);
  }
}

void rmsprop_step(Mlp& model, const Gradients& grads, RmsPropState& state,
                  const TrainConfig& cfg) {
  if (grads.weights.size() != model.layers.size() ||
      state.weights.size() != model.layers.size()) {
    throw ShapeError("gradient set does not match model");
  }
  for_each_param_block(model, grads, state,
                       [&](std::span<double> p, std::span<const double> gr,
                           std::span<double> v) { rmsprop_update(p, gr, v, cfg); });
}

TrainHistory train(Mlp& model, std::span<const Sample> train_set,
                   std::span<const Sample> val_set, const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  if (train_set.empty()) throw ParameterError("training set is empty");
  if (val_set.empty()) throw ParameterError("validation set is empty");

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  RmsPropState state = zero_gradients(model);
  TrainHistory history;
  std::vector<Sample> batch;
  batch.reserve(cfg.batch_size);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      batch.clear();
      for (std::size_t k = begin; k < end; ++k) batch.push_back(train_set[order[k]]);
      epoch_loss += batch_loss(model, batch, cfg.loss) *
                    static_cast<double>(batch.size());
      const Gradients g = gradients(model, batch, cfg.loss);
      rmsprop_step(model, g, state, cfg);
    }
    epoch_loss /= static_cast<double>(order.size());
    const double val_loss = batch_loss(model, val_set, cfg.loss);
    if (!std::isfinite(epoch_loss) || !std::isfinite(val_loss)) {
      throw TrainingDivergedError(epoch + 1);
    }
    history.train_loss.push_back(epoch_loss);
    history.val_loss.push_back(val_loss);
  }
  round_to_storage_precision(model);
  return history;
}

}  // namespace prema::nn
