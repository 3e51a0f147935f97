#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "prema/waveform.hpp"

namespace prema {

// B_fd = K / fs, in seconds.
double buffer_fill_duration(std::size_t k, double fs);

// C_max = K * f_op / fs. Fractional values are meaningful (e.g. 2.5 cycles).
double max_cycles(std::size_t k, double f_op, double fs);

class PingPongBuffer;

// Read-only view of a filled bank, owned by the consumer until release() or
// destruction. The producer will not write into the bank while it is held
// unless it is forced to by an overrun, in which case stale() turns true.
class FullBank {
 public:
  FullBank() = default;
  FullBank(const FullBank&) = delete;
  FullBank& operator=(const FullBank&) = delete;
  FullBank(FullBank&& other) noexcept;
  FullBank& operator=(FullBank&& other) noexcept;
  ~FullBank();

  bool valid() const { return owner_ != nullptr; }
  int bank() const { return bank_; }
  std::uint64_t sequence() const { return sequence_; }
  // Global index of the first sample in this bank.
  std::uint64_t first_sample() const { return first_sample_; }
  std::size_t size() const { return size_; }

  RawCode operator[](std::size_t i) const;
  std::vector<RawCode> snapshot() const;

  // True once the producer has overwritten this bank after an overrun.
  bool stale() const;

  void release();

 private:
  friend class PingPongBuffer;
  FullBank(PingPongBuffer* owner, int bank, std::uint64_t generation,
           std::uint64_t sequence, std::uint64_t first_sample, std::size_t size)
      : owner_(owner),
        bank_(bank),
        generation_(generation),
        sequence_(sequence),
        first_sample_(first_sample),
        size_(size) {}

  PingPongBuffer* owner_ = nullptr;
  int bank_ = 0;
  std::uint64_t generation_ = 0;
  std::uint64_t sequence_ = 0;
  std::uint64_t first_sample_ = 0;
  std::size_t size_ = 0;
};

// Two fixed banks of K raw codes. One producer context calls push_sample();
// each filled bank is handed out exactly once as a FullBank, which may be
// moved to one consumer context. Switching banks and counting overruns are
// atomic with respect to those two contexts.
//
// Overrun policy: if the bank that is about to become active is still held,
// the producer writes into it anyway and overrun_count() increments once.
class PingPongBuffer {
 public:
  explicit PingPongBuffer(std::size_t k);
  PingPongBuffer(const PingPongBuffer&) = delete;
  PingPongBuffer& operator=(const PingPongBuffer&) = delete;

  std::size_t capacity() const { return k_; }
  int active_bank() const { return active_; }
  std::size_t write_pos() const { return write_pos_; }
  std::uint64_t overrun_count() const {
    return overruns_.load(std::memory_order_acquire);
  }
  bool held(int bank) const {
    return holder_[bank].load(std::memory_order_acquire) != 0;
  }

  std::optional<FullBank> push_sample(RawCode code);

  // Hands out the partially filled active bank and ends the stream: no bank
  // switch happens, and push_sample() throws afterwards. Returns nothing (and
  // changes nothing) when the active bank is empty.
  std::optional<FullBank> flush();

 private:
  friend class FullBank;

  FullBank hand_off(std::size_t size, bool switch_banks);
  void release(int bank, std::uint64_t generation);

  std::size_t k_;
  std::array<std::unique_ptr<RawCode[]>, 2> banks_;
  // Fill epoch of each bank; bumped whenever the producer starts writing it.
  std::array<std::atomic<std::uint64_t>, 2> generation_{};
  // Epoch of the outstanding handle for each bank, 0 when not held.
  std::array<std::atomic<std::uint64_t>, 2> holder_{};
  std::atomic<std::uint64_t> overruns_{0};
  int active_ = 0;
  std::size_t write_pos_ = 0;
  std::uint64_t sequence_ = 0;
  std::uint64_t samples_pushed_ = 0;
  bool closed_ = false;
};

enum class ClockMode {
  kVirtual,   // logical time; deterministic, no sleeping
  kRealtime,  // producer paced by the wall clock
};

struct TimingReport {
  std::size_t k = 0;
  double fs = 0.0;
  double f_op = 0.0;
  double buffer_fill_duration = 0.0;  // s
  double max_cycles = 0.0;
  double inference_time_per_cycle = 0.0;   // s, mean over processed cycles
  double inference_time_per_buffer = 0.0;  // s, mean over delivered banks
  double max_inference_time_per_buffer = 0.0;
  // Wall-clock measurements. In realtime mode they equal the fields above; in
  // virtual mode they record how long the host actually took.
  double wall_time_per_cycle = 0.0;
  double wall_time_per_buffer = 0.0;
  double max_wall_time_per_buffer = 0.0;
  std::uint64_t banks = 0;
  std::uint64_t cycles = 0;
  std::uint64_t samples = 0;
  std::uint64_t overrun_count = 0;
  bool lossless = true;

  // IT_pb < B_fd for the worst bank.
  bool inference_keeps_up() const {
    return max_inference_time_per_buffer < buffer_fill_duration;
  }
  bool wall_inference_keeps_up() const {
    return max_wall_time_per_buffer < buffer_fill_duration;
  }
};

// What the consumer reports back for one bank. In virtual mode `seconds` is
// the consumer's logical processing time; in realtime mode the wall-clock
// duration of the callback is used instead.
struct BankWork {
  std::size_t cycles = 0;
  double seconds = 0.0;
  // Portion of the work attributable to per-cycle processing (feature
  // extraction plus inference); basis of IT_pc.
  double cycle_seconds = 0.0;
  // Filled in by run_acquisition() from the host clock.
  double wall_seconds = 0.0;
  // Host-clock counterpart of cycle_seconds, reported by the consumer.
  double wall_cycle_seconds = 0.0;
};

using SampleSource = std::function<std::optional<RawCode>()>;
// `start_time` is when the consumer picked the bank up, in seconds since the
// start of acquisition (logical time in virtual mode).
using BankConsumer =
    std::function<BankWork(const FullBank&, double start_time)>;

struct AcquisitionConfig {
  std::size_t k = 1000;
  double fs = 1000.0;
  double f_op = 0.0;  // only used for C_max in the report; 0 leaves it 0
  ClockMode clock = ClockMode::kVirtual;
  bool flush_partial = true;  // deliver a trailing partial bank
};

// Builds a TimingReport from per-bank measurements. Throws ParameterError
// when `work` is empty.
TimingReport summarize_timing(std::size_t k, double fs, double f_op,
                              const std::vector<BankWork>& work,
                              std::uint64_t overruns, std::uint64_t samples);

// Drives `source` through a PingPongBuffer at cfg.fs, delivering every full
// bank to `consumer` from a single consumer context. Data loss is counted,
// never silent: TimingReport::lossless is false iff an overrun occurred.
TimingReport run_acquisition(const SampleSource& source,
                             const AcquisitionConfig& cfg,
                             const BankConsumer& consumer);

// Adapts a vector of codes into a SampleSource.
SampleSource vector_source(std::vector<RawCode> codes);

}  // namespace prema
