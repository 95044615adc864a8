#ifndef CHAINFLOW_REPORT_HPP
#define CHAINFLOW_REPORT_HPP

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainflow/error.hpp"
#include "chainflow/hash.hpp"

namespace chainflow {

struct StepMetrics {
  std::uint32_t step = 0;
  std::uint64_t height = 0;  // honest-majority chain length
  std::uint64_t blocks_accepted = 0;
  std::uint64_t blocks_rejected = 0;
  std::uint32_t available_nodes = 0;
  std::uint64_t integrity_violations = 0;
  bool operator==(const StepMetrics&) const = default;
};

struct SimReport {
  std::uint64_t blocks_accepted = 0;
  std::uint64_t blocks_rejected = 0;
  std::uint64_t fork_count = 0;
  std::uint64_t integrity_violations = 0;
  std::uint64_t confidentiality_breaches = 0;
  double attack_cost = 0.0;
  std::uint64_t chain_length = 0;
  std::string head_hash;
  std::uint64_t payments_made = 0;
  std::uint64_t payments_settled = 0;
  std::uint64_t disputes = 0;
  std::uint64_t rejected_transactions = 0;
  std::map<std::string, double> availability;
  nlohmann::json attacks = nlohmann::json::object();  // only attacks that engaged
  std::vector<StepMetrics> steps;
  nlohmann::json events = nlohmann::json::array();

  bool has_violations() const { return integrity_violations > 0 || confidentiality_breaches > 0; }
};

inline nlohmann::json report_to_json(const SimReport& r) {
  auto steps = nlohmann::json::array();
  for (const auto& s : r.steps)
    steps.push_back({{"step", s.step},
                     {"height", s.height},
                     {"blocks_accepted", s.blocks_accepted},
                     {"blocks_rejected", s.blocks_rejected},
                     {"available_nodes", s.available_nodes},
                     {"integrity_violations", s.integrity_violations}});
  return {{"blocks_accepted", r.blocks_accepted},
          {"blocks_rejected", r.blocks_rejected},
          {"fork_count", r.fork_count},
          {"integrity_violations", r.integrity_violations},
          {"confidentiality_breaches", r.confidentiality_breaches},
          {"attack_cost", r.attack_cost},
          {"chain_length", r.chain_length},
          {"head_hash", r.head_hash},
          {"payments", {{"made", r.payments_made}, {"settled", r.payments_settled}}},
          {"disputes", r.disputes},
          {"rejected_transactions", r.rejected_transactions},
          {"availability", r.availability},
          {"attacks", r.attacks},
          {"steps", steps},
          {"events", r.events}};
}

/// Canonical text form: keys sorted, two-space indent, trailing newline.
inline std::string report_text(const SimReport& r) { return report_to_json(r).dump(2) + "\n"; }

inline std::string report_hash(const SimReport& r) {
  auto text = report_text(r);
  return sha256(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size())).hex();
}

/// Per-step metrics of a report document as CSV.
inline std::string steps_csv(const nlohmann::json& report) {
  if (!report.is_object() || !report.contains("steps") || !report.at("steps").is_array())
    throw Error(ErrorCode::SchemaViolation, "report has no steps array");
  static const char* const cols[] = {"step", "height", "blocks_accepted", "blocks_rejected", "available_nodes",
                                     "integrity_violations"};
  std::ostringstream out;
  for (std::size_t i = 0; i < std::size(cols); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& s : report.at("steps")) {
    for (std::size_t i = 0; i < std::size(cols); ++i) {
      if (!s.contains(cols[i])) throw Error(ErrorCode::SchemaViolation, std::string("step lacks '") + cols[i] + "'");
      out << (i ? "," : "") << s.at(cols[i]).dump();
    }
    out << "\n";
  }
  return out.str();
}

/// Headline metrics of a report document, dropping the per-step detail.
inline nlohmann::json report_summary(const nlohmann::json& report) {
  if (!report.is_object()) throw Error(ErrorCode::SchemaViolation, "report must be a JSON object");
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [k, v] : report.items())
    if (k != "steps" && k != "events") out[k] = v;
  for (const char* required : {"blocks_accepted", "integrity_violations", "confidentiality_breaches"})
    if (!out.contains(required)) throw Error(ErrorCode::SchemaViolation, std::string("report lacks '") + required + "'");
  return out;
}

}  // namespace chainflow

#endif  // CHAINFLOW_REPORT_HPP
