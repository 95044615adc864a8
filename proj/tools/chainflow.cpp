// chainflow: run supply-chain ledger scenarios, verify and trace chain files.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "chainflow/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"chainflow - permissioned supply-chain ledger simulator"};
  app.require_subcommand(1);

  chainflow::cli::RunOptions run_opts;
  std::string scenario, out_dir, sweep;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run a scenario and write its report and chain");
  run->add_option("scenario", scenario, "Scenario JSON file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides CHAINFLOW_OUT)");
  auto* sweep_opt = run->add_option("--sweep", sweep, "Parameter sweep: param=a..b[:step]");

  std::string chain_path;
  auto* verify = app.add_subcommand("verify", "Verify a chain file");
  verify->add_option("chain", chain_path, "Chain file (.cfs)")->required();

  std::string trace_chain, barcode, key_path;
  auto* trace = app.add_subcommand("trace", "Print the provenance trail of a barcode");
  trace->add_option("chain", trace_chain, "Chain file (.cfs)")->required();
  trace->add_option("barcode", barcode, "Barcode to trace")->required();
  auto* key_opt = trace->add_option("--key", key_path, "Private key file that may open sealed fields");

  std::string report_path;
  bool csv = false;
  auto* report = app.add_subcommand("report", "Summarise a report file");
  report->add_option("report", report_path, "Report JSON file")->required();
  report->add_flag("--csv", csv, "Emit per-step metrics as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : chainflow::cli::OperationalError;
  }

  if (*run) {
    run_opts.scenario_path = scenario;
    if (*seed_opt) run_opts.seed = seed;
    if (*out_opt) run_opts.out_dir = out_dir;
    if (*sweep_opt) run_opts.sweep = sweep;
    return chainflow::cli::cmd_run(run_opts, std::cout, std::cerr);
  }
  if (*verify) return chainflow::cli::cmd_verify(chain_path, std::cout, std::cerr);
  if (*trace) {
    std::optional<std::filesystem::path> key;
    if (*key_opt) key = key_path;
    return chainflow::cli::cmd_trace(trace_chain, barcode, key, std::cout, std::cerr);
  }
  return chainflow::cli::cmd_report(report_path, csv, std::cout, std::cerr);
}
