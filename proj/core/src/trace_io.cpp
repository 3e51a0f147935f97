#include "prema/trace_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "csv_util.hpp"
#include "prema/errors.hpp"

namespace prema {
namespace {

constexpr std::string_view kHeader = "t_ms,current_mA";

}  // namespace

void write_trace_csv(std::ostream& out, const TransientTrace& trace) {
  trace.validate();
  const double dt_ms = 1000.0 / trace.sample_rate;
  out << kHeader << '\n';
  for (std::size_t n = 0; n < trace.samples.size(); ++n) {
    out << detail::format_double(static_cast<double>(n) * dt_ms) << ','
        << detail::format_double(trace.samples[n]) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path,
                     const TransientTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_trace_csv(out, trace);
  if (!out) throw Error("write failed: " + path.string());
}

TransientTrace read_trace_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw FormatError("empty trace file", line_no);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw FormatError("expected header '" + std::string(kHeader) + "'", line_no);
  }

  std::vector<double> times;
  TransientTrace trace;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") {
      // A blank final line is tolerated; anything after it is not.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw FormatError("blank line inside trace", line_no);
    }
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 2) {
      throw FormatError("expected 2 fields, got " + std::to_string(fields.size()),
                        line_no);
    }
    const auto t = detail::parse_double(fields[0]);
    const auto i = detail::parse_double(fields[1]);
    if (!t || !i || !std::isfinite(*t) || !std::isfinite(*i)) {
      throw FormatError("unparseable number", line_no);
    }
    if (!times.empty() && *t <= times.back()) {
      throw FormatError("t_ms must be strictly increasing", line_no);
    }
    times.push_back(*t);
    trace.samples.push_back(*i);
  }
  if (trace.samples.empty()) throw FormatError("trace has no rows", line_no);

  if (times.size() >= 2) {
    // The first step sets the spacing; the first row that breaks it is named.
    const double first = times[1] - times[0];
    for (std::size_t n = 2; n < times.size(); ++n) {
      const double step = times[n] - times[n - 1];
      if (std::abs(step - first) > 1e-6 * std::max(1.0, first)) {
        throw FormatError("non-uniform t_ms spacing", n + 2);
      }
    }
    const double dt = (times.back() - times.front()) /
                      static_cast<double>(times.size() - 1);
    trace.sample_rate = 1000.0 / dt;
    // Snap rates that are integral up to formatting error.
    const double rounded = std::round(trace.sample_rate);
    if (std::abs(trace.sample_rate - rounded) < 1e-6 * rounded) {
      trace.sample_rate = rounded;
    }
  }
  return trace;
}

TransientTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_trace_csv(in);
}

}  // namespace prema
