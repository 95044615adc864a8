// Sweeps the number of fake identities under both registry modes and shows
// when a Sybil bloc can push a block through.

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
  auto doc = nlohmann::json::parse(text_of(dir / "sybil_user_centric.json"));
  doc["topology"]["validators"] = 12;
  doc["steps"] = 6;

  std::cout << "mode          fakes  fault_accepted\n";
  for (const char* mode : {"centralized", "user_centric"}) {
    for (unsigned fakes : {4u, 12u, 20u}) {
      auto variant = doc;
      variant["registry_mode"] = mode;
      variant["attacks"][0]["fake_identity_count"] = fakes;
      auto report = chainflow::run(chainflow::scenario_from_json(variant)).report;
      bool accepted = report.attacks.contains("sybil") && report.attacks["sybil"].value("fault_block_accepted", false);
      std::cout << mode << std::string(14 - std::string(mode).size(), ' ') << fakes << (fakes < 10 ? "      " : "     ")
                << (accepted ? "yes" : "no") << "\n";
    }
  }
  return 0;
}
