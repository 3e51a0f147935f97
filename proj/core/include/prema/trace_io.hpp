#pragma once

#include <filesystem>
#include <iosfwd>

#include "prema/waveform.hpp"

namespace prema {

// Trace CSV: header `t_ms,current_mA`, one row per sample, `t_ms` strictly
// increasing at 1000 / sample_rate spacing. Values are written in shortest
// round-trip form, so a write/read cycle reproduces the samples exactly.
void write_trace_csv(std::ostream& out, const TransientTrace& trace);
void write_trace_csv(const std::filesystem::path& path,
                     const TransientTrace& trace);

// Throws FormatError carrying the 1-based line number on malformed input.
// The sample rate is recovered from the row spacing; a single-row file is
// assumed to be at 1 kHz.
TransientTrace read_trace_csv(std::istream& in);
TransientTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace prema
