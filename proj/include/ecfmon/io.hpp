#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecfmon/detector.hpp"

namespace ecfmon {

// CSV input: header row with a required `value` column and an optional `date`
// column. Dates are carried through untouched; extra columns are ignored.
// Any unparseable or non-finite value is a hard error naming the line, so
// downstream code never sees a partial series.

struct CsvData {
  std::vector<double> values;
  std::vector<std::string> dates;  // empty when the file has no date column
  bool has_date = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline CsvData ingest_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  // header
  std::optional<std::size_t> value_col;
  std::optional<std::size_t> date_col;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split_csv_line(line);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == "value") value_col = i;
      if (cols[i] == "date") date_col = i;
    }
    if (!value_col) {
      throw std::runtime_error(
          "csv: header must contain a 'value' column (line " +
          std::to_string(line_no) + ")");
    }
    break;
  }
  if (!value_col) throw std::runtime_error("csv: empty input");

  CsvData data;
  data.has_date = date_col.has_value();
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split_csv_line(line);
    if (*value_col >= cols.size()) {
      throw std::runtime_error("csv line " + std::to_string(line_no) +
                               ": missing value field");
    }
    const std::string& cell = cols[*value_col];
    double v = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw std::runtime_error("csv line " + std::to_string(line_no) +
                               ": cannot parse value '" + cell + "'");
    }
    if (!std::isfinite(v)) {
      throw std::runtime_error("csv line " + std::to_string(line_no) +
                               ": non-finite value '" + cell + "'");
    }
    data.values.push_back(v);
    if (data.has_date) {
      data.dates.push_back(*date_col < cols.size() ? cols[*date_col] : "");
    }
  }
  if (data.values.empty()) {
    throw std::runtime_error("csv: no data rows");
  }
  return data;
}

inline CsvData ingest_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  return ingest_csv(in);
}

// Number of leading rows with date <= cutoff (ISO dates compare
// lexicographically). The file must carry a date column.
inline std::size_t train_len_for_date(const CsvData& data,
                                      const std::string& cutoff) {
  if (!data.has_date) {
    throw std::runtime_error(
        "train-end-date given but the input has no 'date' column");
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < data.dates.size(); ++i) {
    if (data.dates[i] <= cutoff) n = i + 1;
  }
  if (n == 0) {
    throw std::runtime_error("train-end-date precedes every input row");
  }
  return n;
}

// Monitor report, table or json-lines. The json-lines stream is one
// {"t", "delta"} object per monitoring step followed by a summary object;
// all values reproduce bit for bit for a fixed seed, so the byte stream is
// the determinism contract.

struct MonitorReport {
  StoppingResult stopping;
  std::optional<double> p_B;  // bootstrap route only
  std::uint64_t seed = 0;
  nlohmann::ordered_json config;
};

inline void write_monitor_jsonl(std::ostream& os, const MonitorReport& r) {
  for (std::size_t i = 0; i < r.stopping.trajectory.size(); ++i) {
    nlohmann::ordered_json line;
    line["t"] = i + 1;
    line["delta"] = r.stopping.trajectory[i];
    os << line.dump() << "\n";
  }
  nlohmann::ordered_json summary;
  if (r.stopping.detected()) {
    summary["tau"] = r.stopping.tau;
  } else {
    summary["tau"] = nullptr;
  }
  if (r.stopping.p_value) {
    summary["p_value"] = *r.stopping.p_value;
  } else {
    summary["p_value"] = nullptr;
  }
  summary["c_alpha"] = r.stopping.critical_value;
  if (r.p_B) {
    summary["p_B"] = *r.p_B;
  } else {
    summary["p_B"] = nullptr;
  }
  summary["seed"] = r.seed;
  summary["config"] = r.config;
  os << summary.dump() << "\n";
}

inline void write_monitor_table(std::ostream& os, const MonitorReport& r) {
  os << "     t        delta\n";
  char buf[64];
  for (std::size_t i = 0; i < r.stopping.trajectory.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%6zu  %11.6g\n", i + 1,
                  r.stopping.trajectory[i]);
    os << buf;
  }
  if (r.stopping.detected()) {
    os << "tau: " << r.stopping.tau << "\n";
  } else {
    os << "tau: inf\n";
  }
  if (r.stopping.p_value) {
    std::snprintf(buf, sizeof(buf), "p_value: %.6g\n", *r.stopping.p_value);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "c_alpha: %.10g\n",
                r.stopping.critical_value);
  os << buf;
  if (r.p_B) {
    std::snprintf(buf, sizeof(buf), "p_B: %.10g\n", *r.p_B);
    os << buf;
  }
  os << "seed: " << r.seed << "\n";
}

}  // namespace ecfmon
