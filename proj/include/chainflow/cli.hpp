#ifndef CHAINFLOW_CLI_HPP
#define CHAINFLOW_CLI_HPP

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainflow/chain_file.hpp"
#include "chainflow/error.hpp"
#include "chainflow/report.hpp"
#include "chainflow/scenario.hpp"
#include "chainflow/simulation.hpp"
#include "chainflow/supply_chain.hpp"

namespace chainflow::cli {

enum ExitCode : int { Ok = 0, OperationalError = 1, Violations = 2 };

struct RunOptions {
  std::filesystem::path scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::string> sweep;  // param=a..b[:step]
};

struct Sweep {
  std::string param;  // dotted path into the scenario document, e.g. attacks.0.controlled_fraction
  std::vector<nlohmann::json> values;
};

/// "param=a..b" or "param=a..b:step". Integer bounds and step give integer
/// values; anything else sweeps doubles. The upper bound is inclusive.
inline Sweep parse_sweep(const std::string& spec) {
  auto eq = spec.find('=');
  auto dots = spec.find("..", eq == std::string::npos ? 0 : eq);
  if (eq == std::string::npos || eq == 0 || dots == std::string::npos)
    throw Error(ErrorCode::InvalidArgument, "sweep must look like param=a..b[:step]");
  Sweep s;
  s.param = spec.substr(0, eq);
  auto lo_text = spec.substr(eq + 1, dots - eq - 1);
  auto rest = spec.substr(dots + 2);
  std::string hi_text = rest, step_text = "1";
  if (auto colon = rest.find(':'); colon != std::string::npos) {
    hi_text = rest.substr(0, colon);
    step_text = rest.substr(colon + 1);
  }
  auto is_int = [](const std::string& t) {
    return !t.empty() && t.find_first_not_of("-0123456789") == std::string::npos;
  };
  auto number = [](const std::string& t) {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != t.size()) throw Error(ErrorCode::InvalidArgument, "sweep bound '" + t + "' is not a number");
    return v;
  };
  double lo = number(lo_text), hi = number(hi_text), step = number(step_text);
  if (!(step > 0)) throw Error(ErrorCode::InvalidArgument, "sweep step must be positive");
  if (hi < lo) throw Error(ErrorCode::InvalidArgument, "sweep upper bound below lower bound");
  bool integral = is_int(lo_text) && is_int(hi_text) && is_int(step_text);
  auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 10000) throw Error(ErrorCode::InvalidArgument, "sweep has more than 10000 points");
  for (std::size_t i = 0; i < count; ++i) {
    if (integral) s.values.emplace_back(static_cast<std::int64_t>(std::llround(lo)) +
                                        static_cast<std::int64_t>(i) * static_cast<std::int64_t>(std::llround(step)));
    else s.values.emplace_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
  }
  return s;
}

inline void set_path(nlohmann::json& doc, const std::string& dotted, const nlohmann::json& value) {
  nlohmann::json* node = &doc;
  std::stringstream ss(dotted);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw Error(ErrorCode::InvalidArgument, "empty sweep parameter");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    bool last = i + 1 == parts.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(p);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "sweep path segment '" + p + "' must index an array");
      }
      if (idx >= node->size()) throw Error(ErrorCode::InvalidArgument, "sweep path index " + p + " out of range");
      node = &(*node)[idx];
    } else if (node->is_object()) {
      if (!last && !node->contains(p)) throw Error(ErrorCode::InvalidArgument, "sweep path '" + dotted + "' not found");
      node = &(*node)[p];
    } else {
      throw Error(ErrorCode::InvalidArgument, "sweep path '" + dotted + "' not found");
    }
  }
  *node = value;
}

/// --out, then CHAINFLOW_OUT, then the scenario's "out", then ./out.
inline std::filesystem::path output_dir(const RunOptions& opts, const ScenarioConfig& cfg) {
  if (opts.out_dir) return *opts.out_dir;
  if (const char* env = std::getenv("CHAINFLOW_OUT"); env && *env) return env;
  if (cfg.out_dir) return *cfg.out_dir;
  return "out";
}

namespace detail {

inline std::string read_text(const std::filesystem::path& p) {
  auto bytes = read_file(p);
  return std::string(bytes.begin(), bytes.end());
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  write_file(p, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline nlohmann::json error_json(const std::string& what) { return {{"error", what}}; }

struct RunResult {
  nlohmann::json summary;
  bool violations = false;
};

inline RunResult run_one(const ScenarioConfig& cfg, const std::filesystem::path& dir, const std::string& stem) {
  auto outcome = chainflow::run(cfg);
  auto report_path = dir / (stem + ".report.json");
  auto chain_path = dir / (stem + ".chain.cfs");
  auto text = report_text(outcome.report);
  write_text(report_path, text);
  write_chain_file(chain_path, outcome.chain);
  for (const auto& a : cfg.actors) write_text(dir / (stem + ".keys") / (a.name + ".key"), outcome.keys.at(a.name).private_key.hex() + "\n");
  const auto& r = outcome.report;
  return {{{"scenario", cfg.name},
           {"seed", cfg.seed},
           {"report", report_path.string()},
           {"chain", chain_path.string()},
           {"report_sha256", report_hash(r)},
           {"blocks_accepted", r.blocks_accepted},
           {"blocks_rejected", r.blocks_rejected},
           {"integrity_violations", r.integrity_violations},
           {"confidentiality_breaches", r.confidentiality_breaches}},
          r.has_violations()};
}

inline std::string sweep_label(const nlohmann::json& v) {
  if (v.is_number_integer()) return v.dump();
  std::ostringstream s;
  s << v.get<double>();
  return s.str();
}

}  // namespace detail

/// Exit 0 on a clean run, 2 if any run recorded a violation, 1 on schema or
/// IO errors.
inline int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    auto text = detail::read_text(opts.scenario_path);
    auto base_cfg = parse_scenario(text);
    auto doc = nlohmann::json::parse(text);
    if (opts.seed) doc["seed"] = *opts.seed;
    auto dir = output_dir(opts, base_cfg);

    std::vector<std::pair<ScenarioConfig, std::string>> runs;
    if (opts.sweep) {
      auto sweep = parse_sweep(*opts.sweep);
      for (const auto& v : sweep.values) {
        auto variant = doc;
        set_path(variant, sweep.param, v);
        auto cfg = scenario_from_json(variant);
        runs.emplace_back(std::move(cfg), base_cfg.name + "__" + sweep.param + "=" + detail::sweep_label(v));
      }
    } else {
      runs.emplace_back(scenario_from_json(doc), base_cfg.name);
    }

    nlohmann::json summaries = nlohmann::json::array();
    bool violations = false;
    for (const auto& [cfg, stem] : runs) {
      auto result = detail::run_one(cfg, dir, stem);
      violations = violations || result.violations;
      err << stem << ": " << result.summary["blocks_accepted"] << " blocks accepted, "
          << result.summary["integrity_violations"] << " integrity violations, "
          << result.summary["confidentiality_breaches"] << " confidentiality breaches\n";
      summaries.push_back(std::move(result.summary));
    }
    int code = violations ? Violations : Ok;
    out << nlohmann::json{{"runs", summaries}, {"exit_code", code}}.dump(2) << "\n";
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    out << detail::error_json(e.what()).dump() << "\n";
    return OperationalError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    out << detail::error_json(e.what()).dump() << "\n";
    return OperationalError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    out << detail::error_json(e.what()).dump() << "\n";
    return OperationalError;
  }
}

inline nlohmann::json verification_json(const VerificationReport& report) {
  nlohmann::json j{{"valid", report.ok()}, {"blocks", report.blocks.size()}};
  if (auto f = report.first_failure())
    j["first_failure"] = {{"index", f->index}, {"cause", std::string(to_string(f->cause))}, {"detail", f->detail}};
  return j;
}

/// Exit 0 iff every block verifies, 2 on a verification failure, 1 when the
/// file cannot be read or framed.
inline int cmd_verify(const std::filesystem::path& chain_path, std::ostream& out, std::ostream& err) {
  DecodedChainFile file;
  try {
    file = decode_chain_file(read_file(chain_path));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    out << detail::error_json(e.what()).dump() << "\n";
    return OperationalError;
  }
  auto report = verify_chain_file(file);
  out << verification_json(report).dump(2) << "\n";
  if (auto f = report.first_failure()) {
    err << "verification failed at block " << f->index << ": " << to_string(f->cause) << " (" << f->detail << ")\n";
    return Violations;
  }
  err << "chain valid: " << report.blocks.size() << " blocks\n";
  return Ok;
}

/// Refuses to trace a chain that does not verify (exit 2).
inline int cmd_trace(const std::filesystem::path& chain_path, const std::string& barcode,
                     const std::optional<std::filesystem::path>& key_path, std::ostream& out, std::ostream& err) {
  DecodedChainFile file;
  std::optional<PrivateKey> key;
  try {
    file = decode_chain_file(read_file(chain_path));
    if (key_path) {
      auto text = detail::read_text(*key_path);
      auto first = text.find_first_not_of(" \t\r\n");
      auto last = text.find_last_not_of(" \t\r\n");
      key = PrivateKey::from_hex(first == std::string::npos ? "" : text.substr(first, last - first + 1));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    out << detail::error_json(e.what()).dump() << "\n";
    return OperationalError;
  }
  auto report = verify_chain_file(file);
  if (auto f = report.first_failure()) {
    err << "refusing to trace: block " << f->index << " fails verification (" << to_string(f->cause) << ")\n";
    auto j = verification_json(report);
    j["error"] = "chain does not verify";
    out << j.dump(2) << "\n";
    return Violations;
  }
  std::vector<Block> blocks;
  for (auto& b : file.blocks) blocks.push_back(std::move(*b));
  auto trail = trace(Chain::from_blocks(std::move(blocks)), barcode);
  out << trail_to_json(trail, key ? &*key : nullptr).dump(2) << "\n";
  err << barcode << ": " << trail.entries.size() << " events\n";
  return Ok;
}

/// Summary JSON on stdout, or the per-step CSV with `csv`.
inline int cmd_report(const std::filesystem::path& report_path, bool csv, std::ostream& out, std::ostream& err) {
  try {
    auto text = detail::read_text(report_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::SchemaViolation, std::string("report is not JSON: ") + e.what());
    }
    if (csv) {
      out << steps_csv(doc);
    } else {
      auto summary = report_summary(doc);
      out << summary.dump(2) << "\n";
      err << "blocks accepted " << summary["blocks_accepted"] << ", integrity violations "
          << summary["integrity_violations"] << ", confidentiality breaches " << summary["confidentiality_breaches"]
          << "\n";
    }
    return Ok;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return OperationalError;
  }
}

}  // namespace chainflow::cli

#endif  // CHAINFLOW_CLI_HPP
