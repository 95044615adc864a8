// Runs the baseline scenario in memory and prints the provenance trail of
// the finished product, once redacted and once opened with the producer key.

#include <filesystem>
#include <iostream>

#include "chainflow/chainflow.hpp"

static std::string text_of(const std::filesystem::path& p) {
  auto bytes = chainflow::read_file(p);
  return std::string(bytes.begin(), bytes.end());
}

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path("scenarios");
  auto cfg = chainflow::parse_scenario(text_of(dir / "baseline.json"));
  auto outcome = chainflow::run(cfg);

  const auto& order = cfg.orders.front();
  auto trail = chainflow::trace(outcome.chain, "PKG-" + order.order_number);
  std::cout << chainflow::trail_to_json(trail).dump(2) << "\n";

  const auto& producer = outcome.keys.at(order.producer);
  auto opened = chainflow::trail_to_json(trail, &producer.private_key);
  std::cout << "sealed note for " << order.producer << ": " << opened["trail"][0]["sealed"]["plaintext"] << "\n";
  return trail.entries.size() == chainflow::stage_count ? 0 : 1;
}
