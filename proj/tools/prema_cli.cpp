// prema: simulate, extract, train, evaluate and monitor from the command line.
//
// Exit codes: 0 success, 1 runtime/IO/format error, 2 usage error.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "prema/acquisition.hpp"
#include "prema/errors.hpp"
#include "prema/features.hpp"
#include "prema/models.hpp"
#include "prema/pipeline.hpp"
#include "prema/scenario.hpp"
#include "prema/tinynn.hpp"
#include "prema/trace_io.hpp"
#include "prema/waveform.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Wrong combination of otherwise valid flags.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kFaultNames = {"good", "spool_stuck",
                                              "spring_failure", "under_voltage"};

prema::FaultCondition fault_from(const std::string& name, double volts) {
  const auto c = prema::parse_fault_class(name);
  if (!c) throw UsageError("unknown fault '" + name + "'");
  if (*c == prema::FaultClass::kUnderVoltage) {
    return prema::FaultCondition::under_voltage(volts);
  }
  return {*c, 24.0};
}

// Output stream for `path`, or stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path == "-") return;
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw prema::Error("cannot open " + path + " for writing");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void close(const std::string& path) {
    if (file_.is_open()) {
      file_.close();
      if (!file_) throw prema::Error("write failed: " + path);
    }
  }

 private:
  std::ofstream file_;
};

json report_json(const prema::EvalReport& r) {
  json j;
  j["n"] = r.n;
  if (r.kind == prema::TargetKind::kFaultClass) {
    j["accuracy"] = r.accuracy;
    json conf = json::object();
    for (prema::FaultClass t : prema::kAllFaultClasses) {
      conf[std::string(prema::to_string(t))] = r.confusion[prema::index_of(t)];
    }
    j["confusion"] = conf;
    j["support"] = r.support;
  } else {
    j["mae_cycles"] = r.mae_cycles;
  }
  return j;
}

double us(double seconds) { return seconds * 1e6; }

// CSV readers report line numbers; name the file as well.
[[noreturn]] void rethrow_with_file(const std::string& path,
                                    const prema::FormatError& e) {
  throw prema::Error(path + ": line " + std::to_string(e.offset()) + ": " +
                     e.what());
}

prema::TransientTrace load_trace(const std::string& path) {
  try {
    return prema::read_trace_csv(fs::path(path));
  } catch (const prema::FormatError& e) {
    rethrow_with_file(path, e);
  }
}

prema::Dataset load_dataset(const std::string& path) {
  try {
    return prema::read_dataset_csv(fs::path(path));
  } catch (const prema::FormatError& e) {
    rethrow_with_file(path, e);
  }
}

json timing_json(const prema::TimingReport& t, prema::ClockMode clock,
                 bool with_wall) {
  json j;
  j["type"] = "timing_report";
  j["clock"] = clock == prema::ClockMode::kVirtual ? "virtual" : "realtime";
  j["k"] = t.k;
  j["fs"] = t.fs;
  j["f_op"] = t.f_op;
  j["b_fd_us"] = us(t.buffer_fill_duration);
  j["c_max"] = t.max_cycles;
  j["it_pc_us"] = us(t.inference_time_per_cycle);
  j["it_pb_us"] = us(t.inference_time_per_buffer);
  j["max_it_pb_us"] = us(t.max_inference_time_per_buffer);
  j["it_pb_below_b_fd"] = t.inference_keeps_up();
  if (with_wall) {
    j["wall_it_pc_us"] = us(t.wall_time_per_cycle);
    j["wall_it_pb_us"] = us(t.wall_time_per_buffer);
    j["max_wall_it_pb_us"] = us(t.max_wall_time_per_buffer);
    j["wall_it_pb_below_b_fd"] = t.wall_inference_keeps_up();
  }
  j["banks"] = t.banks;
  j["cycles"] = t.cycles;
  j["samples"] = t.samples;
  j["overrun_count"] = t.overrun_count;
  j["lossless"] = t.lossless;
  return j;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string fault = "good";
  double voltage = 12.0;
  std::size_t cycles = 1;
  double severity = 0.0;
  double noise = 0.5;
  std::uint64_t seed = 0;
  double fs = 1000.0;
  double f_op = 0.5;
  std::string out = "-";
};

int run_simulate(const SimulateArgs& a) {
  prema::ScenarioConfig cfg;
  cfg.fs = a.fs;
  cfg.adc.sample_rate = a.fs;
  cfg.f_op = a.f_op;
  cfg.actuations = a.cycles;
  cfg.noise_std = a.noise;
  cfg.seed = a.seed;
  cfg.fault = fault_from(a.fault, a.voltage);
  cfg.start.cycle = static_cast<std::uint64_t>(
      std::llround(a.severity * static_cast<double>(cfg.start.failure_cycle)));
  prema::Scenario s = prema::make_scenario(cfg);

  prema::TransientTrace trace;
  trace.sample_rate = a.fs;
  std::vector<prema::RawCode> codes;
  while (auto c = s.source()) codes.push_back(*c);
  trace.samples = prema::codes_to_current(codes, cfg.adc);

  Output out(a.out);
  prema::write_trace_csv(out.stream(), trace);
  out.close(a.out);
  return 0;
}

// --- extract ----------------------------------------------------------------

struct ExtractArgs {
  std::string in;
  std::string out = "-";
  bool full = false;
};

int run_extract(const ExtractArgs& a) {
  const prema::TransientTrace trace = load_trace(a.in);
  const prema::ExtractionResult r =
      prema::extract_all(trace, prema::ExtractionConfig{});

  Output out(a.out);
  std::ostream& os = out.stream();
  os.precision(17);
  os << "zero_index,di_dt,auc";
  if (a.full) os << ",ecv_lower_avg,ecv_upper_avg,delta_ecv,ecv10,ecv90,tl,tu";
  os << '\n';
  for (const prema::EdgeFeatures& e : r.features) {
    const prema::TransientFeatures& f = e.features;
    os << e.zero_index << ',' << f.di_dt << ',' << f.auc;
    if (a.full) {
      os << ',' << f.ecv_lower_avg << ',' << f.ecv_upper_avg << ','
         << f.delta_ecv << ',' << f.ecv10 << ',' << f.ecv90 << ',' << f.tl
         << ',' << f.tu;
    }
    os << '\n';
  }
  out.close(a.out);
  for (const prema::EdgeDiagnostic& d : r.diagnostics) {
    std::cerr << "edge at " << d.zero_index << ": " << prema::to_string(d.issue)
              << " (" << d.message << ")\n";
  }
  return 0;
}

// --- gen-dataset ------------------------------------------------------------

struct GenArgs {
  std::string task = "fault";
  std::vector<std::size_t> counts = {600, 200, 200, 400};
  std::size_t valves = 4;
  std::uint64_t failure_cycle = 1500;
  bool thermal_stress = false;
  double noise = 0.5;
  std::uint64_t seed = 0;
  std::string out = "-";
};

int run_gen(const GenArgs& a) {
  prema::Dataset ds;
  if (a.task == "fault") {
    if (a.counts.size() != prema::kNumFaultClasses) {
      throw UsageError("--counts needs 4 values");
    }
    prema::FaultDatasetConfig cfg;
    std::copy(a.counts.begin(), a.counts.end(), cfg.counts.begin());
    cfg.noise_std = a.noise;
    ds = prema::gen_fault_dataset(cfg, a.seed);
  } else {
    prema::RulDatasetConfig cfg;
    cfg.n_valves = a.valves;
    cfg.failure_cycle = a.failure_cycle;
    cfg.thermal_stress = a.thermal_stress;
    cfg.noise_std = a.noise;
    ds = prema::gen_rul_dataset(cfg, a.seed);
  }
  Output out(a.out);
  prema::write_dataset_csv(out.stream(), ds);
  out.close(a.out);
  return 0;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::string task = "fault";
  std::string data;
  std::size_t epochs = 50;
  std::size_t batch = 10;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::string out;
  std::string history;
};

int run_train(const TrainArgs& a) {
  const prema::Dataset ds = load_dataset(a.data);
  const bool want_fault = a.task == "fault";
  if (want_fault != (ds.kind == prema::TargetKind::kFaultClass)) {
    throw UsageError("--task " + a.task + " does not match the targets in " +
                     a.data);
  }
  // Every random choice derives from the one --seed.
  std::mt19937_64 rng(a.seed);
  prema::ModelTrainConfig cfg;
  cfg.split_seed = rng();
  cfg.init_seed = rng();
  cfg.train.seed = rng();
  cfg.train.epochs = a.epochs;
  cfg.train.batch_size = a.batch;
  cfg.train.learning_rate = a.lr;

  const prema::TrainedModel tm =
      want_fault ? prema::train_fault(ds, cfg) : prema::train_rul(ds, cfg);
  prema::nn::save(tm.model, a.out);

  const std::string history = a.history.empty() ? a.out + ".history.csv" : a.history;
  std::ofstream h(history, std::ios::binary | std::ios::trunc);
  if (!h) throw prema::Error("cannot open " + history + " for writing");
  h.precision(17);
  h << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < tm.history.train_loss.size(); ++e) {
    h << e + 1 << ',' << tm.history.train_loss[e] << ','
      << tm.history.val_loss[e] << '\n';
  }
  if (!h) throw prema::Error("write failed: " + history);

  json j = report_json(tm.report);
  j["task"] = a.task;
  j["model"] = a.out;
  j["train_rows"] = tm.split.train.size();
  j["val_rows"] = tm.split.val.size();
  j["test_rows"] = tm.split.test.size();
  std::cout << j.dump() << '\n';
  return 0;
}

// --- eval / infer -----------------------------------------------------------

struct EvalArgs {
  std::string model;
  std::string data;
};

int run_eval(const EvalArgs& a) {
  const prema::nn::Mlp m = prema::nn::restore(a.model);
  const prema::Dataset ds = load_dataset(a.data);
  const bool is_fault = m.kind == prema::nn::ModelKind::kClassifier;
  if (is_fault != (ds.kind == prema::TargetKind::kFaultClass)) {
    throw UsageError("model kind does not match the targets in " + a.data);
  }
  std::cout << report_json(prema::evaluate(m, ds)).dump() << '\n';
  return 0;
}

struct InferArgs {
  std::string model;
  std::optional<double> di_dt;
  std::optional<double> auc;
  std::string in;
};

json infer_json(const prema::nn::Mlp& m, double di_dt, double auc) {
  const std::vector<double> y = prema::nn::infer(m, std::vector<double>{di_dt, auc});
  json j;
  j["di_dt"] = di_dt;
  j["auc"] = auc;
  if (m.kind == prema::nn::ModelKind::kClassifier) {
    j["fault_probs"] = y;
    const auto best = std::max_element(y.begin(), y.end()) - y.begin();
    j["predicted_class"] = kFaultNames.at(static_cast<std::size_t>(best));
  } else {
    j["rul"] = y.at(0);
  }
  return j;
}

int run_infer(const InferArgs& a) {
  const prema::nn::Mlp m = prema::nn::restore(a.model);
  if (m.input_dim() != 2) throw prema::Error("model does not take (di_dt, auc)");
  if (a.in.empty()) {
    if (!a.di_dt || !a.auc) throw UsageError("give --di-dt and --auc, or --in");
    std::cout << infer_json(m, *a.di_dt, *a.auc).dump() << '\n';
    return 0;
  }
  // Feature CSV written by `extract`.
  std::ifstream in(a.in, std::ios::binary);
  if (!in) throw prema::Error("cannot open " + a.in);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line.rfind("zero_index,di_dt,auc", 0) != 0) {
    throw prema::FormatError("expected a feature CSV header", line_no);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string zi, d, u;
    std::getline(ss, zi, ',');
    std::getline(ss, d, ',');
    std::getline(ss, u, ',');
    try {
      std::size_t used = 0;
      const double di_dt = std::stod(d, &used);
      if (used != d.size()) throw std::invalid_argument(d);
      const double auc = std::stod(u, &used);
      if (used != u.size()) throw std::invalid_argument(u);
      json j = infer_json(m, di_dt, auc);
      j["zero_index"] = std::stoull(zi);
      std::cout << j.dump() << '\n';
    } catch (const std::logic_error&) {
      throw prema::FormatError("unparseable feature row", line_no);
    }
  }
  return 0;
}

// --- monitor ----------------------------------------------------------------

struct MonitorArgs {
  std::string fault_model;
  std::string rul_model;
  std::size_t k = 10000;
  double fs = 1000.0;
  double f_op = 0.5;
  std::string scenario = "degradation";
  std::string clock = "virtual";
  std::uint64_t seed = 0;
  std::size_t actuations = 5;
  double voltage = 12.0;
  double noise = 0.5;
  std::uint64_t failure_cycle = 1500;
  std::uint64_t stride = 5;
  double rul_threshold = 100.0;
  double fault_threshold = 0.5;
  bool wall = false;
  std::string out = "-";
};

prema::ClockMode clock_from(const std::string& s) {
  return s == "realtime" ? prema::ClockMode::kRealtime : prema::ClockMode::kVirtual;
}

prema::SampleSource scenario_source(const MonitorArgs& a) {
  const prema::AdcConfig adc{3.3, 12, 12.22, a.fs};
  if (fs::exists(a.scenario)) {
    const prema::TransientTrace trace = load_trace(a.scenario);
    if (std::abs(trace.sample_rate - a.fs) > 1e-9 * a.fs) {
      throw prema::Error("trace is sampled at " + std::to_string(trace.sample_rate) +
                         " Hz but --fs is " + std::to_string(a.fs));
    }
    return prema::trace_source(trace, adc);
  }
  if (a.scenario == "flat") {
    const auto n = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(a.actuations) * a.fs / a.f_op));
    return prema::flat_scenario(n, adc).source;
  }
  prema::ScenarioConfig cfg;
  if (a.scenario == "degradation") {
    cfg = prema::degradation_scenario(a.failure_cycle, a.stride, a.seed);
  } else {
    cfg.fault = fault_from(a.scenario, a.voltage);
    cfg.actuations = a.actuations;
    cfg.seed = a.seed;
  }
  cfg.fs = a.fs;
  cfg.adc = adc;
  cfg.f_op = a.f_op;
  cfg.noise_std = a.noise;
  return prema::make_scenario(cfg).source;
}

json event_json(const prema::MonitorEvent& e) {
  json j;
  j["type"] = "event";
  j["buffer_seq"] = e.buffer_seq;
  j["zero_index"] = e.zero_index;
  j["fault_probs"] = e.fault_probs;
  j["predicted_class"] = std::string(prema::to_string(e.predicted_class));
  j["rul"] = e.rul;
  j["alarm"] = e.alarm;
  j["it_pc_us"] = us(e.it_pc);
  j["timestamp_us"] = us(e.timestamp);
  return j;
}

json diagnostic_json(const prema::MonitorDiagnostic& d) {
  json j;
  j["type"] = "diagnostic";
  j["buffer_seq"] = d.buffer_seq;
  j["zero_index"] = d.zero_index ? json(*d.zero_index) : json(nullptr);
  j["issue"] = d.issue;
  j["message"] = d.message;
  j["timestamp_us"] = us(d.timestamp);
  return j;
}

int run_monitor_cmd(const MonitorArgs& a) {
  const prema::nn::Mlp fault = prema::nn::restore(a.fault_model);
  const prema::nn::Mlp rul = prema::nn::restore(a.rul_model);

  prema::MonitorConfig cfg;
  cfg.k = a.k;
  cfg.fs = a.fs;
  cfg.f_op = a.f_op;
  cfg.rul_alarm_threshold = a.rul_threshold;
  cfg.fault_alarm_threshold = a.fault_threshold;
  cfg.clock = clock_from(a.clock);
  cfg.adc.sample_rate = a.fs;

  Output out(a.out);
  std::ostream& os = out.stream();
  prema::MonitorSinks sinks;
  sinks.on_event = [&](const prema::MonitorEvent& e) {
    os << event_json(e).dump() << '\n';
  };
  sinks.on_diagnostic = [&](const prema::MonitorDiagnostic& d) {
    os << diagnostic_json(d).dump() << '\n';
  };
  const prema::MonitorResult r =
      prema::run_monitor(scenario_source(a), fault, rul, cfg, sinks);
  // Realtime reports are wall-clock already.
  const bool extra_wall = a.wall && cfg.clock == prema::ClockMode::kVirtual;
  os << timing_json(r.timing, cfg.clock, extra_wall).dump() << '\n';
  out.close(a.out);
  return 0;
}

// --- timing -----------------------------------------------------------------

struct TimingArgs {
  std::optional<std::size_t> k;
  double fs = 1000.0;
  std::optional<double> f_op;
};

int run_timing(const TimingArgs& a) {
  std::vector<prema::BufferConfiguration> rows;
  if (a.k || a.f_op) {
    if (!a.k || !a.f_op) throw UsageError("give both --k and --fop, or neither");
    rows.push_back({*a.k, *a.f_op});
  } else {
    rows.assign(prema::kReferenceConfigurations.begin(),
                prema::kReferenceConfigurations.end());
  }
  for (const prema::BufferConfiguration& r : rows) {
    json j;
    j["k"] = r.k;
    j["fs"] = a.fs;
    j["f_op"] = r.f_op;
    j["b_fd_us"] = us(prema::buffer_fill_duration(r.k, a.fs));
    j["c_max"] = prema::max_cycles(r.k, r.f_op, a.fs);
    std::cout << j.dump() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solenoid-valve predictive maintenance toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Write a synthetic drive-current trace CSV");
  c_sim->add_option("--fault", sim.fault)->check(CLI::IsMember(kFaultNames));
  c_sim->add_option("--voltage", sim.voltage, "Applied voltage for under_voltage")
      ->check(CLI::Range(8.0, 23.999));
  c_sim->add_option("--cycles", sim.cycles, "Number of actuations")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  c_sim->add_option("--severity", sim.severity, "Wear, 0 (new) to 1 (failed)")
      ->check(CLI::Range(0.0, 1.0));
  c_sim->add_option("--noise", sim.noise, "Noise std in mA")->check(CLI::NonNegativeNumber);
  c_sim->add_option("--seed", sim.seed);
  c_sim->add_option("--fs", sim.fs, "Sampling rate in Hz")->check(CLI::PositiveNumber);
  c_sim->add_option("--fop", sim.f_op, "Actuations per second")->check(CLI::PositiveNumber);
  c_sim->add_option("--out", sim.out, "Output CSV, - for stdout");

  ExtractArgs ext;
  auto* c_ext = app.add_subcommand("extract", "Extract transient features from a trace CSV");
  c_ext->add_option("--in", ext.in)->required();
  c_ext->add_option("--out", ext.out, "Output CSV, - for stdout");
  c_ext->add_flag("--full", ext.full, "Include every intermediate feature");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen-dataset", "Generate a synthetic training dataset");
  c_gen->add_option("--task", gen.task)->check(CLI::IsMember({"fault", "rul"}));
  c_gen->add_option("--counts", gen.counts, "Rows per class: good spool_stuck spring_failure under_voltage")
      ->delimiter(',')
      ->expected(4);
  c_gen->add_option("--valves", gen.valves)->check(CLI::PositiveNumber);
  c_gen->add_option("--failure-cycle", gen.failure_cycle)->check(CLI::PositiveNumber);
  c_gen->add_flag("--thermal-stress", gen.thermal_stress);
  c_gen->add_option("--noise", gen.noise)->check(CLI::NonNegativeNumber);
  c_gen->add_option("--seed", gen.seed);
  c_gen->add_option("--out", gen.out);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a fault or RUL model");
  c_train->add_option("--task", tr.task)->check(CLI::IsMember({"fault", "rul"}));
  c_train->add_option("--data", tr.data)->required();
  c_train->add_option("--epochs", tr.epochs)->check(CLI::PositiveNumber);
  c_train->add_option("--batch", tr.batch)->check(CLI::PositiveNumber);
  c_train->add_option("--lr", tr.lr)->check(CLI::PositiveNumber);
  c_train->add_option("--seed", tr.seed);
  c_train->add_option("--out", tr.out)->required();
  c_train->add_option("--history", tr.history, "History CSV (default <out>.history.csv)");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a model on a dataset CSV");
  c_eval->add_option("--model", ev.model)->required();
  c_eval->add_option("--data", ev.data)->required();

  InferArgs inf;
  auto* c_infer = app.add_subcommand("infer", "Run a model on feature values");
  c_infer->add_option("--model", inf.model)->required();
  c_infer->add_option("--di-dt", inf.di_dt);
  c_infer->add_option("--auc", inf.auc);
  c_infer->add_option("--in", inf.in, "Feature CSV from `extract`");

  MonitorArgs mon;
  auto* c_mon = app.add_subcommand("monitor", "Stream a source through acquisition and inference");
  c_mon->add_option("--fault-model", mon.fault_model)->required();
  c_mon->add_option("--rul-model", mon.rul_model)->required();
  c_mon->add_option("--k", mon.k, "Ping-pong bank size in samples")->check(CLI::PositiveNumber);
  c_mon->add_option("--fs", mon.fs)->check(CLI::PositiveNumber);
  c_mon->add_option("--fop", mon.f_op)->check(CLI::PositiveNumber);
  c_mon->add_option("--scenario", mon.scenario,
                    "Trace CSV, or one of degradation, flat, good, spool_stuck, "
                    "spring_failure, under_voltage");
  c_mon->add_option("--clock", mon.clock)->check(CLI::IsMember({"virtual", "realtime"}));
  c_mon->add_option("--seed", mon.seed);
  c_mon->add_option("--actuations", mon.actuations)->check(CLI::PositiveNumber);
  c_mon->add_option("--voltage", mon.voltage)->check(CLI::Range(8.0, 23.999));
  c_mon->add_option("--noise", mon.noise)->check(CLI::NonNegativeNumber);
  c_mon->add_option("--failure-cycle", mon.failure_cycle)->check(CLI::PositiveNumber);
  c_mon->add_option("--stride", mon.stride, "Valve cycles between monitored actuations")
      ->check(CLI::PositiveNumber);
  c_mon->add_option("--rul-threshold", mon.rul_threshold)->check(CLI::PositiveNumber);
  c_mon->add_option("--fault-threshold", mon.fault_threshold)->check(CLI::PositiveNumber);
  c_mon->add_flag("--wall-timing", mon.wall, "Add host wall-clock timings to the report");
  c_mon->add_option("--out", mon.out);

  TimingArgs tim;
  auto* c_tim = app.add_subcommand("timing", "Buffer fill duration and cycles per bank");
  c_tim->add_option("--k", tim.k)->check(CLI::PositiveNumber);
  c_tim->add_option("--fs", tim.fs)->check(CLI::PositiveNumber);
  c_tim->add_option("--fop", tim.f_op)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_sim) return run_simulate(sim);
    if (*c_ext) return run_extract(ext);
    if (*c_gen) return run_gen(gen);
    if (*c_train) return run_train(tr);
    if (*c_eval) return run_eval(ev);
    if (*c_infer) return run_infer(inf);
    if (*c_mon) return run_monitor_cmd(mon);
    if (*c_tim) return run_timing(tim);
  } catch (const UsageError& e) {
    std::cerr << "prema: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "prema: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
