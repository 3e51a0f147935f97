#include "prema/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "prema/errors.hpp"

namespace prema {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Independent stream seed for (seed, a, b, c).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

ValveParams jittered(const ValveParams& base, double jitter,
                     std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(1.0 - jitter, 1.0 + jitter);
  ValveParams p = base;
  p.rise_tau *= u(rng);
  p.dip_time *= u(rng);
  p.dip_depth *= u(rng);
  p.dip_width *= u(rng);
  return p;
}

// Features of the single actuation in `trace`, or nothing when extraction
// failed for it.
std::optional<FeatureVector> features_of(const TransientTrace& trace,
                                         const ExtractionConfig& cfg) {
  const ExtractionResult r = extract_all(trace, cfg);
  if (r.features.size() != 1) return std::nullopt;
  const FeatureVector fv = to_feature_vector(r.features.front().features);
  if (!std::isfinite(fv.di_dt) || !std::isfinite(fv.auc)) return std::nullopt;
  return fv;
}

std::vector<nn::Sample> to_samples(const Dataset& ds, double rul_scale) {
  std::vector<nn::Sample> out;
  out.reserve(ds.rows.size());
  for (const DatasetRow& r : ds.rows) {
    nn::Sample s;
    s.x = {r.features.di_dt, r.features.auc};
    if (ds.kind == TargetKind::kFaultClass) {
      s.y = one_hot(r.label);
    } else {
      s.y = {r.rul_cycles / rul_scale};
    }
    out.push_back(std::move(s));
  }
  return out;
}

nn::FeatureScaler fit_scaler(const Dataset& ds) {
  std::vector<std::vector<double>> xs;
  xs.reserve(ds.rows.size());
  for (const DatasetRow& r : ds.rows) {
    xs.push_back({r.features.di_dt, r.features.auc});
  }
  return nn::FeatureScaler::fit(xs);
}

void check_kind(nn::ModelKind model, TargetKind data) {
  const bool ok = (model == nn::ModelKind::kClassifier) ==
                  (data == TargetKind::kFaultClass);
  if (!ok) throw ParameterError("model kind does not match dataset target kind");
}

}  // namespace

nn::Mlp build_fault_model(std::uint64_t seed) {
  const auto lrelu = nn::Activation::leaky_relu(0.01f);
  const std::vector<nn::LayerSpec> specs = {
      {2, 36, lrelu},
      {36, 24, lrelu},
      {24, 12, lrelu},
      {12, 4, nn::Activation::softmax()},
  };
  return nn::make_mlp(nn::ModelKind::kClassifier, specs, seed);
}

nn::Mlp build_rul_model(std::uint64_t seed) {
  const auto relu = nn::Activation::relu();
  const std::vector<nn::LayerSpec> specs = {
      {2, 64, relu},
      {64, 16, relu},
      {16, 4, relu},
      {4, 1, nn::Activation::linear()},
  };
  return nn::make_mlp(nn::ModelKind::kRegressor, specs, seed);
}

std::vector<double> one_hot(FaultClass c) {
  std::vector<double> v(kNumFaultClasses, 0.0);
  v[index_of(c)] = 1.0;
  return v;
}

void Dataset::validate() const {
  if (rows.empty()) throw ParameterError("dataset is empty");
  for (const DatasetRow& r : rows) {
    if (!std::isfinite(r.features.di_dt) || !std::isfinite(r.features.auc)) {
      throw ParameterError("non-finite feature in dataset row " + r.provenance);
    }
    if (kind == TargetKind::kRul &&
        (!std::isfinite(r.rul_cycles) || r.rul_cycles < 0)) {
      throw ParameterError("invalid RUL target in dataset row " + r.provenance);
    }
  }
}

std::array<std::size_t, kNumFaultClasses> Dataset::class_counts() const {
  std::array<std::size_t, kNumFaultClasses> counts{};
  for (const DatasetRow& r : rows) ++counts[index_of(r.label)];
  return counts;
}

DatasetSplit split_dataset(const Dataset& ds, const SplitFractions& f,
                           std::uint64_t seed) {
  ds.validate();
  for (double x : {f.train, f.val, f.test}) {
    if (!std::isfinite(x) || x < 0) {
      throw ParameterError("split fractions must be finite and >= 0");
    }
  }
  if (std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw ParameterError("split fractions must sum to 1");
  }

  // Groups of row indices cut independently: one per class, or everything.
  std::vector<std::vector<std::size_t>> groups;
  if (ds.kind == TargetKind::kFaultClass) {
    groups.resize(kNumFaultClasses);
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
      groups[index_of(ds.rows[i].label)].push_back(i);
    }
  } else {
    groups.emplace_back(ds.rows.size());
    std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
  }

  DatasetSplit out;
  out.train.kind = out.val.kind = out.test.kind = ds.kind;
  std::mt19937_64 rng(seed);
  for (std::vector<std::size_t>& g : groups) {
    std::shuffle(g.begin(), g.end(), rng);
    const double n = static_cast<double>(g.size());
    const auto n_train = std::min(
        g.size(), static_cast<std::size_t>(std::llround(n * f.train)));
    const auto n_val = std::min(
        g.size() - n_train, static_cast<std::size_t>(std::llround(n * f.val)));
    for (std::size_t k = 0; k < g.size(); ++k) {
      Dataset& dst = k < n_train ? out.train
                     : k < n_train + n_val ? out.val
                                           : out.test;
      dst.rows.push_back(ds.rows[g[k]]);
    }
  }
  if (out.train.rows.empty() || out.val.rows.empty() || out.test.rows.empty()) {
    throw ParameterError("dataset too small for the requested split: " +
                         std::to_string(out.train.size()) + "/" +
                         std::to_string(out.val.size()) + "/" +
                         std::to_string(out.test.size()));
  }
  return out;
}

Dataset gen_fault_dataset(const FaultDatasetConfig& cfg, std::uint64_t seed) {
  const std::size_t total =
      std::accumulate(cfg.counts.begin(), cfg.counts.end(), std::size_t{0});
  if (total == 0) throw ParameterError("fault dataset needs at least one row");
  if (!(cfg.jitter >= 0 && cfg.jitter < 1)) {
    throw ParameterError("jitter must lie in [0, 1)");
  }
  cfg.valve.validate();

  Dataset ds;
  ds.kind = TargetKind::kFaultClass;
  ds.rows.reserve(total);
  for (FaultClass c : kAllFaultClasses) {
    for (std::size_t r = 0; r < cfg.counts[index_of(c)]; ++r) {
      std::optional<FeatureVector> fv;
      std::uint64_t row_seed = 0;
      for (std::size_t attempt = 0; attempt <= cfg.max_retries && !fv;
           ++attempt) {
        row_seed = derive_seed(seed, index_of(c), r, attempt);
        std::mt19937_64 rng(row_seed);
        const ValveParams params = jittered(cfg.valve, cfg.jitter, rng);
        FaultCondition fault{c, cfg.valve.supply_voltage};
        if (c == FaultClass::kUnderVoltage) {
          std::uniform_int_distribution<std::size_t> pick(
              0, cfg.under_voltages.size() - 1);
          fault = FaultCondition::under_voltage(cfg.under_voltages[pick(rng)]);
        }
        SynthOptions opt;
        opt.noise_std = cfg.noise_std;
        opt.seed = rng();
        opt.adc = cfg.adc;
        fv = features_of(synth_transient(params, fault, {}, opt),
                         cfg.extraction);
      }
      if (!fv) {
        throw Error("feature extraction failed for a " +
                    std::string(to_string(c)) + " row after " +
                    std::to_string(cfg.max_retries) + " retries");
      }
      DatasetRow row;
      row.features = *fv;
      row.label = c;
      row.provenance = "seed:" + std::to_string(row_seed);
      ds.rows.push_back(std::move(row));
    }
  }
  return ds;
}

double thermal_stress_temperature(double base, std::uint64_t cycle) {
  if (cycle <= 1000) return base;
  return base + 10.0 * static_cast<double>(cycle - 1000) / 100.0;
}

Dataset gen_rul_dataset(const RulDatasetConfig& cfg, std::uint64_t seed) {
  if (cfg.n_valves < 1) throw ParameterError("n_valves must be >= 1");
  if (cfg.failure_cycle < 1) throw ParameterError("failure_cycle must be >= 1");
  if (cfg.sample_every < 1) throw ParameterError("sample_every must be >= 1");
  if (!(cfg.jitter >= 0 && cfg.jitter < 1)) {
    throw ParameterError("jitter must lie in [0, 1)");
  }
  cfg.valve.validate();

  Dataset ds;
  ds.kind = TargetKind::kRul;
  constexpr std::size_t kRetries = 10;
  for (std::size_t v = 0; v < cfg.n_valves; ++v) {
    std::mt19937_64 valve_rng(derive_seed(seed, v));
    const ValveParams valve = jittered(cfg.valve, cfg.jitter, valve_rng);
    for (std::uint64_t cycle = 0; cycle < cfg.failure_cycle;
         cycle += cfg.sample_every) {
      ValveParams p = valve;
      if (cfg.thermal_stress) {
        p.temperature = thermal_stress_temperature(valve.temperature, cycle);
      }
      const DegradationState state{cycle, cfg.failure_cycle};
      std::optional<FeatureVector> fv;
      std::uint64_t row_seed = 0;
      for (std::size_t attempt = 0; attempt <= kRetries && !fv; ++attempt) {
        row_seed = derive_seed(seed, v, cycle, attempt + 1);
        SynthOptions opt;
        opt.noise_std = cfg.noise_std;
        opt.seed = row_seed;
        opt.adc = cfg.adc;
        fv = features_of(synth_transient(p, FaultCondition::good(), state, opt),
                         cfg.extraction);
      }
      if (!fv) {
        throw Error("feature extraction failed at cycle " +
                    std::to_string(cycle) + " of valve " + std::to_string(v));
      }
      DatasetRow row;
      row.features = *fv;
      row.rul_cycles = static_cast<double>(cfg.failure_cycle - cycle);
      row.cycle = cycle;
      row.group = v;
      row.provenance = "seed:" + std::to_string(row_seed);
      ds.rows.push_back(std::move(row));
    }
  }
  return ds;
}

EvalReport evaluate(const Predictor& predict, TargetKind kind,
                    const Dataset& test) {
  if (test.rows.empty()) throw ParameterError("cannot evaluate on an empty set");
  if (test.kind != kind) {
    throw ParameterError("model kind does not match dataset target kind");
  }
  EvalReport rep;
  rep.kind = kind;
  rep.n = test.rows.size();

  if (kind == TargetKind::kRul) {
    double abs_err = 0.0;
    for (const DatasetRow& r : test.rows) {
      const std::vector<double> x = {r.features.di_dt, r.features.auc};
      const std::vector<double> p = predict(x);
      if (p.size() != 1) throw ShapeError("regressor must output one value");
      abs_err += std::abs(p[0] - r.rul_cycles);
    }
    rep.mae_cycles = abs_err / static_cast<double>(rep.n);
    return rep;
  }

  std::size_t correct = 0;
  for (const DatasetRow& r : test.rows) {
    const std::vector<double> x = {r.features.di_dt, r.features.auc};
    const std::vector<double> p = predict(x);
    if (p.size() != kNumFaultClasses) {
      throw ShapeError("classifier must output one probability per class");
    }
    const std::size_t truth = index_of(r.label);
    const auto best = static_cast<std::size_t>(
        std::max_element(p.begin(), p.end()) - p.begin());
    if (best == truth) ++correct;
    for (std::size_t k = 0; k < kNumFaultClasses; ++k) {
      rep.confusion[truth][k] += p[k];
    }
    ++rep.support[truth];
  }
  for (std::size_t t = 0; t < kNumFaultClasses; ++t) {
    if (rep.support[t] == 0) continue;
    for (double& v : rep.confusion[t]) v /= static_cast<double>(rep.support[t]);
  }
  rep.accuracy = static_cast<double>(correct) / static_cast<double>(rep.n);
  return rep;
}

EvalReport evaluate(const nn::Mlp& model, const Dataset& test) {
  const TargetKind kind = model.kind == nn::ModelKind::kClassifier
                              ? TargetKind::kFaultClass
                              : TargetKind::kRul;
  return evaluate(
      [&model](std::span<const double> x) { return nn::infer(model, x); },
      kind, test);
}

TrainedModel train_fault(const Dataset& ds, const ModelTrainConfig& cfg) {
  check_kind(nn::ModelKind::kClassifier, ds.kind);
  TrainedModel out;
  out.split = split_dataset(ds, cfg.split, cfg.split_seed);
  out.model = build_fault_model(cfg.init_seed);
  out.model.scaler = fit_scaler(out.split.train);

  nn::TrainConfig tc = cfg.train;
  tc.loss = nn::LossKind::kCategoricalCrossEntropy;
  const auto train_set = to_samples(out.split.train, 1.0);
  const auto val_set = to_samples(out.split.val, 1.0);
  out.history = nn::train(out.model, train_set, val_set, tc);
  out.report = evaluate(out.model, out.split.test);
  return out;
}

TrainedModel train_rul(const Dataset& ds, const ModelTrainConfig& cfg) {
  check_kind(nn::ModelKind::kRegressor, ds.kind);
  ds.validate();
  double scale = 0.0;
  for (const DatasetRow& r : ds.rows) scale = std::max(scale, r.rul_cycles);
  if (!(scale > 0)) throw ParameterError("RUL targets are all zero");

  TrainedModel out;
  out.split = split_dataset(ds, cfg.split, cfg.split_seed);
  out.model = build_rul_model(cfg.init_seed);
  out.model.scaler = fit_scaler(out.split.train);

  nn::TrainConfig tc = cfg.train;
  tc.loss = nn::LossKind::kMeanAbsoluteError;
  const auto train_set = to_samples(out.split.train, scale);
  const auto val_set = to_samples(out.split.val, scale);
  out.history = nn::train(out.model, train_set, val_set, tc);

  // Undo the target normalisation inside the linear output layer.
  nn::Layer& last = out.model.layers.back();
  for (double& w : last.weights) w *= scale;
  for (double& b : last.biases) b *= scale;
  nn::round_to_storage_precision(out.model);
  for (double& l : out.history.train_loss) l *= scale;
  for (double& l : out.history.val_loss) l *= scale;

  out.report = evaluate(out.model, out.split.test);
  return out;
}

}  // namespace prema
