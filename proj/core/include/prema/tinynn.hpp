#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace prema::nn {

// Wire codes are part of the model file format.
enum class ActivationKind : std::uint8_t {
  kLinear = 0,
  kReLU = 1,
  kLeakyReLU = 2,
  kSoftmax = 3,
};

struct Activation {
  ActivationKind kind = ActivationKind::kLinear;
  float alpha = 0.0f;  // LeakyReLU negative slope; stored as f32 on disk

  static Activation linear() { return {ActivationKind::kLinear, 0.0f}; }
  static Activation relu() { return {ActivationKind::kReLU, 0.0f}; }
  static Activation leaky_relu(float alpha = 0.01f) {
    return {ActivationKind::kLeakyReLU, alpha};
  }
  static Activation softmax() { return {ActivationKind::kSoftmax, 0.0f}; }

  friend bool operator==(const Activation&, const Activation&) = default;
};

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation;

  std::size_t parameter_count() const { return in_dim * out_dim + out_dim; }
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Layer {
  LayerSpec spec;
  std::vector<double> weights;  // out_dim x in_dim, row-major
  std::vector<double> biases;   // out_dim

  double& w(std::size_t row, std::size_t col) {
    return weights[row * spec.in_dim + col];
  }
  double w(std::size_t row, std::size_t col) const {
    return weights[row * spec.in_dim + col];
  }
  friend bool operator==(const Layer&, const Layer&) = default;
};

// Per-feature z-score applied to inputs before the first layer.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> std;

  static FeatureScaler identity(std::size_t dim);
  // Population statistics of `rows`; a zero-variance column gets std 1.
  static FeatureScaler fit(std::span<const std::vector<double>> rows);

  std::vector<double> apply(std::span<const double> x) const;
  friend bool operator==(const FeatureScaler&, const FeatureScaler&) = default;
};

enum class ModelKind : std::uint8_t {
  kClassifier = 0,
  kRegressor = 1,
};

struct Mlp {
  ModelKind kind = ModelKind::kClassifier;
  std::vector<Layer> layers;
  FeatureScaler scaler;

  // Throws ShapeError/ParameterError when dims do not chain, Softmax is not
  // last, a parameter is non-finite, or a scaler std is not positive.
  void validate() const;

  std::size_t input_dim() const { return layers.front().spec.in_dim; }
  std::size_t output_dim() const { return layers.back().spec.out_dim; }
  std::vector<std::size_t> parameter_counts() const;
  std::size_t parameter_count() const;

  friend bool operator==(const Mlp&, const Mlp&) = default;
};

// Glorot-uniform weights in +-sqrt(6 / (in + out)), zero biases, identity
// scaler. Parameters are rounded to f32 so that the model survives a
// save/restore cycle bit-exactly.
Mlp make_mlp(ModelKind kind, std::span<const LayerSpec> specs,
             std::uint64_t seed);

// Rounds every weight and bias to the nearest f32 value.
void round_to_storage_precision(Mlp& model);

double leaky_relu(double x, double alpha);
std::vector<double> softmax(std::span<const double> v);

// -sum(y * log(max(p, 1e-12))) for one sample.
double cce_loss(std::span<const double> y_true, std::span<const double> y_pred);
// sum(|y - p|) / n.
double mae_loss(std::span<const double> y_true, std::span<const double> y_pred);

enum class LossKind : std::uint8_t {
  kCategoricalCrossEntropy,
  kMeanAbsoluteError,
};

struct Sample {
  std::vector<double> x;
  std::vector<double> y;
};

// Mean per-sample loss over a batch.
double batch_loss(const Mlp& model, std::span<const Sample> batch,
                  LossKind loss);

std::vector<double> infer(const Mlp& model, std::span<const double> x);

// Same shapes as the model's weights and biases.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

Gradients zero_gradients(const Mlp& model);

// Reverse-mode gradients of batch_loss(). Subgradient conventions:
// d|x|/dx = sign(x) with sign(0) = 0, ReLU'(0) = 0, LeakyReLU'(0) = alpha.
Gradients gradients(const Mlp& model, std::span<const Sample> batch,
                    LossKind loss);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 10;
  double learning_rate = 1e-3;
  double rho = 0.9;
  double epsilon = 1e-7;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::kCategoricalCrossEntropy;
  bool shuffle = true;

  void validate() const;
};

// RMSProp accumulators, shaped like Gradients.
using RmsPropState = Gradients;

// v <- rho * v + (1 - rho) * g^2; p <- p - lr * g / (sqrt(v) + epsilon).
void rmsprop_update(std::span<double> params, std::span<const double> grads,
                    std::span<double> velocity, const TrainConfig& cfg);
void rmsprop_step(Mlp& model, const Gradients& grads, RmsPropState& state,
                  const TrainConfig& cfg);

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

// Mini-batch RMSProp. Deterministic for a given cfg.seed. The model is
// rounded to storage precision when training ends. Throws
// TrainingDivergedError naming the first epoch with a non-finite loss.
TrainHistory train(Mlp& model, std::span<const Sample> train_set,
                   std::span<const Sample> val_set, const TrainConfig& cfg);

// Binary model file (little-endian):
//   "PMNN" | u16 version=1 | u8 kind | u8 layer count
//   per layer: u32 in | u32 out | u8 activation | f32 alpha
//   per layer: f32 weights (row-major) | f32 biases
//   u32 input dim | per feature: f64 mean | f64 std
//   u32 CRC32 of everything before it
std::vector<std::uint8_t> serialize(const Mlp& model);
// Throws FormatError with the byte offset of the offending field.
Mlp deserialize(std::span<const std::uint8_t> bytes);

void save(const Mlp& model, const std::filesystem::path& path);
Mlp restore(const std::filesystem::path& path);

}  // namespace prema::nn
