#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "prema/fault_class.hpp"
#include "prema/features.hpp"
#include "prema/tinynn.hpp"
#include "prema/waveform.hpp"

namespace prema {

// Fault model: 2 -> 36 -> 24 -> 12 -> 4, LeakyReLU(0.01) hidden, Softmax out.
nn::Mlp build_fault_model(std::uint64_t seed);
// RUL model: 2 -> 64 -> 16 -> 4 -> 1, ReLU hidden, linear out.
nn::Mlp build_rul_model(std::uint64_t seed);

std::vector<double> one_hot(FaultClass c);

enum class TargetKind {
  kFaultClass,
  kRul,
};

struct DatasetRow {
  FeatureVector features;
  FaultClass label = FaultClass::kGood;  // kFaultClass datasets
  double rul_cycles = 0.0;               // kRul datasets: remaining cycles
  std::uint64_t cycle = 0;               // kRul: position on the trajectory
  std::size_t group = 0;                 // valve the row came from
  std::string provenance;                // "seed:<n>" or "<file>:<line>"
};

struct Dataset {
  TargetKind kind = TargetKind::kFaultClass;
  std::vector<DatasetRow> rows;

  std::size_t size() const { return rows.size(); }
  // Non-empty, every feature finite, RUL targets >= 0.
  void validate() const;
  std::array<std::size_t, kNumFaultClasses> class_counts() const;
};

struct SplitFractions {
  double train = 0.7;
  double val = 0.2;
  double test = 0.1;
};

struct DatasetSplit {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Shuffles with `seed` and cuts round(n * train) / round(n * val) / rest.
// Classification datasets are cut per class (stratified). Throws
// ParameterError when the fractions do not sum to 1 or a split ends up empty.
DatasetSplit split_dataset(const Dataset& ds, const SplitFractions& fractions,
                           std::uint64_t seed);

struct FaultDatasetConfig {
  // Rows per class, indexed by FaultClass.
  std::array<std::size_t, kNumFaultClasses> counts = {600, 200, 200, 400};
  double jitter = 0.10;     // relative, uniform, on rise_tau and the dip
  double noise_std = 0.5;   // mA
  std::array<double, 4> under_voltages = {8.0, 10.0, 12.0, 14.0};
  std::size_t max_retries = 10;
  ValveParams valve{};
  AdcConfig adc{};
  ExtractionConfig extraction{};
};

// One synthetic actuation per row, labelled with the injected fault. A row
// whose features cannot be extracted is redrawn with the next seed; after
// max_retries failures generation stops with the last extraction error.
Dataset gen_fault_dataset(const FaultDatasetConfig& cfg, std::uint64_t seed);

struct RulDatasetConfig {
  std::size_t n_valves = 4;
  std::uint64_t failure_cycle = 1500;
  std::uint64_t sample_every = 5;
  double jitter = 0.03;    // per-valve, relative
  double noise_std = 0.5;  // mA
  // Raise the temperature by 10 deg C per 100 cycles past cycle 1000.
  bool thermal_stress = false;
  ValveParams valve{};
  AdcConfig adc{};
  ExtractionConfig extraction{};
};

// Run-to-failure trajectories. Each valve is sampled every `sample_every`
// cycles from cycle 0; target = failure_cycle - cycle.
Dataset gen_rul_dataset(const RulDatasetConfig& cfg, std::uint64_t seed);

// Temperature applied at `cycle` when thermal stress is on.
double thermal_stress_temperature(double base, std::uint64_t cycle);

struct EvalReport {
  TargetKind kind = TargetKind::kFaultClass;
  std::size_t n = 0;
  double accuracy = 0.0;
  // confusion[true][pred]: mean predicted probability of `pred` over the rows
  // whose label is `true`. Rows of absent classes stay zero.
  std::array<std::array<double, kNumFaultClasses>, kNumFaultClasses>
      confusion{};
  std::array<std::size_t, kNumFaultClasses> support{};
  double mae_cycles = 0.0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

using Predictor = std::function<std::vector<double>(std::span<const double>)>;

// Throws ParameterError on an empty set or a kind mismatch.
EvalReport evaluate(const nn::Mlp& model, const Dataset& test);
EvalReport evaluate(const Predictor& predict, TargetKind kind,
                    const Dataset& test);

struct ModelTrainConfig {
  nn::TrainConfig train{};  // loss is chosen by the task
  SplitFractions split{};
  std::uint64_t split_seed = 0;
  std::uint64_t init_seed = 0;
};

struct TrainedModel {
  nn::Mlp model;
  nn::TrainHistory history;
  EvalReport report;  // on the test split
  DatasetSplit split;
};

// Fits the input scaler on the training split, trains with RMSProp and
// categorical cross-entropy, and reports on the test split.
TrainedModel train_fault(const Dataset& ds, const ModelTrainConfig& cfg);

// As train_fault() with MAE loss. Targets are divided by the largest target
// of the dataset while training; that factor is folded into the output
// layer afterwards, so the saved model predicts cycles directly.
TrainedModel train_rul(const Dataset& ds, const ModelTrainConfig& cfg);

// Dataset CSV: header `di_dt,auc,target`; target is a class name or a
// remaining-cycle count.
void write_dataset_csv(std::ostream& out, const Dataset& ds);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);
// Throws FormatError with the 1-based line number. The target kind is taken
// from the first data row; every row must agree.
Dataset read_dataset_csv(std::istream& in, const std::string& name = "stream");
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace prema
