#pragma once

// Flat tabular records and their CSV / newline-delimited JSON encodings.
// Both encodings carry the same keys in the same order; numbers use the
// shortest representation that round-trips.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "nlbit/analysis.hpp"

namespace nlbit {

using FieldValue = std::variant<std::string, double, std::uint64_t, bool>;
using Record = std::vector<std::pair<std::string, FieldValue>>;

enum class OutputFormat { Json, Csv };

/// Header of simulate and sweep output.
inline const std::vector<std::string>& correlation_columns() {
  static const std::vector<std::string> cols{"protocol", "theta",     "n", "seed",      "p_unequal",
                                             "prediction", "std_error", "z", "bits_comm", "nl_boxes"};
  return cols;
}

namespace detail {

inline std::string csv_cell(const FieldValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) return x;
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else return fmt::format("{}", x);
      },
      v);
}

inline nlohmann::ordered_json json_value(const FieldValue& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(x)>;
        // JSON has no infinities; they are written as strings.
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(x)) return fmt::format("{}", x);
        }
        return x;
      },
      v);
}

}  // namespace detail

inline void write_csv(std::ostream& os, const std::vector<Record>& records) {
  if (records.empty()) return;
  for (std::size_t i = 0; i < records.front().size(); ++i) os << (i ? "," : "") << records.front()[i].first;
  os << '\n';
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < rec.size(); ++i) os << (i ? "," : "") << detail::csv_cell(rec[i].second);
    os << '\n';
  }
}

inline void write_ndjson(std::ostream& os, const std::vector<Record>& records) {
  for (const auto& rec : records) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [key, value] : rec) j[key] = detail::json_value(value);
    os << j.dump() << '\n';
  }
}

inline void write_records(std::ostream& os, const std::vector<Record>& records, OutputFormat format) {
  if (format == OutputFormat::Csv)
    write_csv(os, records);
  else
    write_ndjson(os, records);
}

/// Per-run transcript count as an integer when every run agrees.
inline FieldValue per_run(std::uint64_t total, std::uint64_t runs) {
  if (runs != 0 && total % runs == 0) return total / runs;
  return static_cast<double>(total) / static_cast<double>(runs);
}

inline Record correlation_record(ProtocolId protocol, double theta, std::uint64_t seed, const Tally& tally,
                                 double prediction) {
  const auto est = CorrelationEstimate::from_counts(tally.unequal, tally.runs);
  return {{"protocol", std::string(protocol_name(protocol))},
          {"theta", theta},
          {"n", tally.runs},
          {"seed", seed},
          {"p_unequal", est.p_unequal},
          {"prediction", prediction},
          {"std_error", est.std_error},
          {"z", z_score(est, prediction)},
          {"bits_comm", per_run(tally.bits_a_to_b + tally.bits_b_to_a, tally.runs)},
          {"nl_boxes", per_run(tally.nl_boxes, tally.runs)}};
}

inline std::vector<Record> sweep_records(ProtocolId protocol, std::uint64_t seed, const std::vector<SweepRow>& rows) {
  std::vector<Record> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(correlation_record(protocol, row.theta, seed, row.tally, row.prediction));
  return out;
}

}  // namespace nlbit
