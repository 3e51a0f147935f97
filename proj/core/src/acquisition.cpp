#include "prema/acquisition.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <limits>
#include <mutex>
#include <thread>
#include <utility>

#include "prema/errors.hpp"

namespace prema {

double buffer_fill_duration(std::size_t k, double fs) {
  if (k == 0) throw ParameterError("buffer size K must be > 0");
  if (!(fs > 0) || !std::isfinite(fs)) {
    throw ParameterError("sampling frequency must be > 0");
  }
  return static_cast<double>(k) / fs;
}

double max_cycles(std::size_t k, double f_op, double fs) {
  if (k == 0) throw ParameterError("buffer size K must be > 0");
  if (!(f_op > 0) || !std::isfinite(f_op)) {
    throw ParameterError("operating frequency must be > 0");
  }
  if (!(fs > 0) || !std::isfinite(fs)) {
    throw ParameterError("sampling frequency must be > 0");
  }
  return static_cast<double>(k) * f_op / fs;
}

// --- FullBank ---------------------------------------------------------------

FullBank::FullBank(FullBank&& other) noexcept
    : owner_(std::exchange(other.owner_, nullptr)),
      bank_(other.bank_),
      generation_(other.generation_),
      sequence_(other.sequence_),
      first_sample_(other.first_sample_),
      size_(other.size_) {}

FullBank& FullBank::operator=(FullBank&& other) noexcept {
  if (this != &other) {
    release();
    owner_ = std::exchange(other.owner_, nullptr);
    bank_ = other.bank_;
    generation_ = other.generation_;
    sequence_ = other.sequence_;
    first_sample_ = other.first_sample_;
    size_ = other.size_;
  }
  return *this;
}

FullBank::~FullBank() { release(); }

RawCode FullBank::operator[](std::size_t i) const {
  if (owner_ == nullptr) throw Error("access through a released bank handle");
  if (i >= size_) throw RangeError("bank index out of range");
  return std::atomic_ref<RawCode>(owner_->banks_[bank_][i])
      .load(std::memory_order_relaxed);
}

std::vector<RawCode> FullBank::snapshot() const {
  if (owner_ == nullptr) throw Error("access through a released bank handle");
  std::vector<RawCode> out(size_);
  RawCode* data = owner_->banks_[bank_].get();
  for (std::size_t i = 0; i < size_; ++i) {
    out[i] = std::atomic_ref<RawCode>(data[i]).load(std::memory_order_relaxed);
  }
  return out;
}

bool FullBank::stale() const {
  if (owner_ == nullptr) return false;
  // Pairs with the release fence the producer issues before overwriting.
  std::atomic_thread_fence(std::memory_order_acquire);
  return owner_->generation_[bank_].load(std::memory_order_relaxed) !=
         generation_;
}

void FullBank::release() {
  if (owner_ == nullptr) return;
  owner_->release(bank_, generation_);
  owner_ = nullptr;
}

// --- PingPongBuffer ---------------------------------------------------------

PingPongBuffer::PingPongBuffer(std::size_t k) : k_(k) {
  if (k == 0) throw ParameterError("buffer size K must be > 0");
  banks_[0] = std::make_unique<RawCode[]>(k);
  banks_[1] = std::make_unique<RawCode[]>(k);
  generation_[0].store(1, std::memory_order_relaxed);
}

std::optional<FullBank> PingPongBuffer::push_sample(RawCode code) {
  if (closed_) throw Error("push_sample() after flush()");
  std::atomic_ref<RawCode>(banks_[active_][write_pos_])
      .store(code, std::memory_order_relaxed);
  ++write_pos_;
  ++samples_pushed_;
  if (write_pos_ < k_) return std::nullopt;
  return hand_off(k_, true);
}

std::optional<FullBank> PingPongBuffer::flush() {
  if (write_pos_ == 0) return std::nullopt;
  closed_ = true;
  return hand_off(write_pos_, false);
}

FullBank PingPongBuffer::hand_off(std::size_t size, bool switch_banks) {
  const int filled = active_;
  const std::uint64_t gen = generation_[filled].load(std::memory_order_relaxed);
  holder_[filled].store(gen, std::memory_order_release);
  FullBank handle(this, filled, gen, sequence_++, samples_pushed_ - size, size);
  if (!switch_banks) return handle;

  const int next = 1 - filled;
  if (holder_[next].load(std::memory_order_acquire) != 0) {
    overruns_.fetch_add(1, std::memory_order_acq_rel);
  }
  generation_[next].fetch_add(1, std::memory_order_relaxed);
  std::atomic_thread_fence(std::memory_order_release);
  active_ = next;
  write_pos_ = 0;
  return handle;
}

void PingPongBuffer::release(int bank, std::uint64_t generation) {
  // A stale handle must not clear the hold of a newer hand-off of this bank.
  std::uint64_t expected = generation;
  holder_[bank].compare_exchange_strong(expected, 0, std::memory_order_acq_rel);
}

// --- run_acquisition --------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

TimingReport build_report(const AcquisitionConfig& cfg,
                          const std::vector<BankWork>& work,
                          std::uint64_t overruns, std::uint64_t samples,
                          bool wall_is_primary) {
  TimingReport r;
  r.k = cfg.k;
  r.fs = cfg.fs;
  r.f_op = cfg.f_op;
  r.buffer_fill_duration = buffer_fill_duration(cfg.k, cfg.fs);
  r.max_cycles = cfg.f_op > 0 ? max_cycles(cfg.k, cfg.f_op, cfg.fs) : 0.0;
  r.samples = samples;
  r.overrun_count = overruns;
  r.lossless = overruns == 0;
  r.banks = work.size();

  double total = 0, total_cycle = 0, wall_total = 0, wall_cycle = 0;
  for (const BankWork& w : work) {
    const double seconds = wall_is_primary ? w.wall_seconds : w.seconds;
    const double cycle_seconds =
        wall_is_primary ? w.wall_cycle_seconds : w.cycle_seconds;
    r.cycles += w.cycles;
    total += seconds;
    total_cycle += cycle_seconds;
    wall_total += w.wall_seconds;
    wall_cycle += w.wall_cycle_seconds;
    r.max_inference_time_per_buffer =
        std::max(r.max_inference_time_per_buffer, seconds);
    r.max_wall_time_per_buffer =
        std::max(r.max_wall_time_per_buffer, w.wall_seconds);
  }
  if (!work.empty()) {
    const double n = static_cast<double>(work.size());
    r.inference_time_per_buffer = total / n;
    r.wall_time_per_buffer = wall_total / n;
  }
  if (r.cycles > 0) {
    const double c = static_cast<double>(r.cycles);
    r.inference_time_per_cycle = total_cycle / c;
    r.wall_time_per_cycle = wall_cycle / c;
  }
  return r;
}

void validate(const AcquisitionConfig& cfg) {
  buffer_fill_duration(cfg.k, cfg.fs);
  if (cfg.f_op < 0 || !std::isfinite(cfg.f_op)) {
    throw ParameterError("operating frequency must be >= 0");
  }
}

// Logical-time simulation: sample n is pushed at n / fs, and the single
// consumer holds each bank from max(ready, previous release) for the number
// of seconds it reports.
TimingReport run_virtual(const SampleSource& source,
                         const AcquisitionConfig& cfg,
                         const BankConsumer& consumer) {
  PingPongBuffer buffer(cfg.k);
  struct Pending {
    FullBank bank;
    double ready;
  };
  std::deque<Pending> queue;
  FullBank in_service;
  double busy_until = 0.0;
  std::vector<BankWork> work;
  std::uint64_t n = 0;

  // Runs every consumer event that happens at or before `now`.
  auto advance = [&](double now) {
    while (true) {
      if (in_service.valid()) {
        if (busy_until > now) return;
        in_service.release();
      }
      if (queue.empty()) return;
      const double start = std::max(queue.front().ready, busy_until);
      if (start > now) return;
      in_service = std::move(queue.front().bank);
      queue.pop_front();
      const auto t0 = Clock::now();
      BankWork w = consumer(in_service, start);
      w.wall_seconds = seconds_since(t0);
      busy_until = start + std::max(0.0, w.seconds);
      work.push_back(w);
    }
  };

  while (auto code = source()) {
    const double now = static_cast<double>(n) / cfg.fs;
    advance(now);
    if (auto full = buffer.push_sample(*code)) {
      queue.push_back({std::move(*full), now});
    }
    ++n;
  }
  if (cfg.flush_partial) {
    const double now = n == 0 ? 0.0 : static_cast<double>(n - 1) / cfg.fs;
    if (auto partial = buffer.flush()) {
      queue.push_back({std::move(*partial), now});
    }
  }
  advance(std::numeric_limits<double>::infinity());
  return build_report(cfg, work, buffer.overrun_count(), n, false);
}

TimingReport run_realtime(const SampleSource& source,
                          const AcquisitionConfig& cfg,
                          const BankConsumer& consumer) {
  PingPongBuffer buffer(cfg.k);
  std::mutex mu;
  std::condition_variable cv;
  std::deque<FullBank> queue;
  bool done = false;
  std::vector<BankWork> work;
  const auto t0 = Clock::now();

  std::thread consumer_thread([&] {
    while (true) {
      FullBank bank;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return done || !queue.empty(); });
        if (queue.empty()) return;
        bank = std::move(queue.front());
        queue.pop_front();
      }
      const double start = seconds_since(t0);
      const auto begin = Clock::now();
      BankWork w = consumer(bank, start);
      w.wall_seconds = seconds_since(begin);
      bank.release();
      work.push_back(w);  // only this thread touches `work` until join
    }
  });

  auto post = [&](FullBank bank) {
    {
      std::lock_guard lock(mu);
      queue.push_back(std::move(bank));
    }
    cv.notify_one();
  };

  std::uint64_t n = 0;
  const auto period = std::chrono::duration<double>(1.0 / cfg.fs);
  while (auto code = source()) {
    const auto due =
        t0 + std::chrono::duration_cast<Clock::duration>(period * static_cast<double>(n));
    // Sleeping per sample is too coarse above a few kHz; catch up in bursts.
    if (due - Clock::now() > std::chrono::microseconds(500)) {
      std::this_thread::sleep_until(due);
    }
    if (auto full = buffer.push_sample(*code)) post(std::move(*full));
    ++n;
  }
  if (cfg.flush_partial) {
    if (auto partial = buffer.flush()) post(std::move(*partial));
  }
  {
    std::lock_guard lock(mu);
    done = true;
  }
  cv.notify_one();
  consumer_thread.join();
  return build_report(cfg, work, buffer.overrun_count(), n, true);
}

}  // namespace

TimingReport summarize_timing(std::size_t k, double fs, double f_op,
                              const std::vector<BankWork>& work,
                              std::uint64_t overruns, std::uint64_t samples) {
  if (work.empty()) {
    throw ParameterError("timing report needs at least one processed buffer");
  }
  AcquisitionConfig cfg;
  cfg.k = k;
  cfg.fs = fs;
  cfg.f_op = f_op;
  validate(cfg);
  return build_report(cfg, work, overruns, samples, false);
}

TimingReport run_acquisition(const SampleSource& source,
                             const AcquisitionConfig& cfg,
                             const BankConsumer& consumer) {
  validate(cfg);
  if (cfg.clock == ClockMode::kVirtual) return run_virtual(source, cfg, consumer);
  return run_realtime(source, cfg, consumer);
}

SampleSource vector_source(std::vector<RawCode> codes) {
  auto data = std::make_shared<std::vector<RawCode>>(std::move(codes));
  auto pos = std::make_shared<std::size_t>(0);
  return [data, pos]() -> std::optional<RawCode> {
    if (*pos >= data->size()) return std::nullopt;
    return (*data)[(*pos)++];
  };
}

}  // namespace prema
