#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "csv_util.hpp"
#include "prema/errors.hpp"
#include "prema/models.hpp"

namespace prema {
namespace {

constexpr std::string_view kHeader = "di_dt,auc,target";

}  // namespace

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  out << kHeader << '\n';
  for (const DatasetRow& r : ds.rows) {
    out << detail::format_double(r.features.di_dt) << ','
        << detail::format_double(r.features.auc) << ',';
    if (ds.kind == TargetKind::kFaultClass) {
      out << to_string(r.label);
    } else {
      out << detail::format_double(r.rul_cycles);
    }
    out << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_dataset_csv(out, ds);
  if (!out) throw Error("write failed: " + path.string());
}

Dataset read_dataset_csv(std::istream& in, const std::string& name) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw FormatError("empty dataset file", line_no);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw FormatError("expected header '" + std::string(kHeader) + "'", line_no);
  }

  Dataset ds;
  bool kind_known = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") {
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw FormatError("blank line inside dataset", line_no);
    }
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 3) {
      throw FormatError("expected 3 fields, got " + std::to_string(fields.size()),
                        line_no);
    }
    const auto di_dt = detail::parse_double(fields[0]);
    const auto auc = detail::parse_double(fields[1]);
    if (!di_dt || !auc || !std::isfinite(*di_dt) || !std::isfinite(*auc)) {
      throw FormatError("unparseable feature value", line_no);
    }

    DatasetRow row;
    row.features = {*di_dt, *auc};
    row.provenance = name + ":" + std::to_string(line_no);
    TargetKind kind;
    if (const auto label = parse_fault_class(fields[2])) {
      kind = TargetKind::kFaultClass;
      row.label = *label;
    } else if (const auto rul = detail::parse_double(fields[2])) {
      if (!std::isfinite(*rul) || *rul < 0 || *rul != std::floor(*rul)) {
        throw FormatError("RUL target must be a non-negative integer", line_no);
      }
      kind = TargetKind::kRul;
      row.rul_cycles = *rul;
    } else {
      throw FormatError("unknown target '" + std::string(fields[2]) + "'",
                        line_no);
    }
    if (!kind_known) {
      ds.kind = kind;
      kind_known = true;
    } else if (kind != ds.kind) {
      throw FormatError("mixed class and RUL targets", line_no);
    }
    ds.rows.push_back(std::move(row));
  }
  if (ds.rows.empty()) throw FormatError("dataset has no rows", line_no);
  return ds;
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_dataset_csv(in, path.filename().string());
}

}  // namespace prema
