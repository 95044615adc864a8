#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainflow/chainflow.hpp"

namespace testing {

using namespace chainflow;

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline const nlohmann::json& golden() {
  static const nlohmann::json g = nlohmann::json::parse(slurp(std::filesystem::path(CHAINFLOW_FIXTURE_DIR) / "golden.json"));
  return g;
}

inline std::filesystem::path scenario_path(const std::string& name) {
  return std::filesystem::path(CHAINFLOW_SCENARIO_DIR) / (name + ".json");
}

inline nlohmann::json scenario_doc(const std::string& name) { return nlohmann::json::parse(slurp(scenario_path(name))); }

inline ScenarioConfig scenario(const std::string& name) { return parse_scenario(slurp(scenario_path(name))); }

/// Small permissioned network: an issuer plus `validators` enrolled nodes
/// that all vote on every block.
struct TestNet {
  IdentityKeys issuer = generate_identity(Role::Node, 900);
  std::vector<IdentityKeys> validators;
  std::vector<IdentityKeys> actors;
  std::vector<std::string> actor_names;
  Chain chain;

  static Chain genesis_chain(const IdentityKeys& issuer, const std::vector<IdentityKeys>& members,
                             const std::vector<std::string>& names, unsigned difficulty, HashAlgo algo,
                             RegistryMode mode, VoteBase base) {
    GenesisMarker marker{"chainflow-test", algo, static_cast<std::uint8_t>(difficulty), mode, base,
                         {issuer.identity.public_key}};
    std::vector<SignedTransaction> txs;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const auto& m = members[i];
      auto cred = mode == RegistryMode::Centralized ? issue_credential(m.identity, names[i], issuer.private_key)
                                                    : self_attest(m, names[i]);
      txs.push_back(sign_transaction(Enrollment{names[i], m.identity.public_key, m.identity.role, cred}, std::nullopt, m));
    }
    return Chain(make_genesis(marker, std::move(txs)));
  }

  explicit TestNet(std::size_t n_validators = 4, unsigned difficulty = 4, HashAlgo algo = HashAlgo::Sha256,
                   std::vector<std::pair<std::string, Role>> actor_specs = {},
                   RegistryMode mode = RegistryMode::Centralized, VoteBase base = VoteBase::RegisteredOnly)
      : chain(make(n_validators, difficulty, algo, actor_specs, mode, base)) {}

  const IdentityKeys& actor(const std::string& name) const {
    for (std::size_t i = 0; i < actor_names.size(); ++i)
      if (actor_names[i] == name) return actors[i];
    throw std::runtime_error("no actor " + name);
  }

  /// Mines, collects every validator's vote and appends.
  Block commit_block(std::vector<SignedTransaction> txs, std::uint64_t mining_seed = 0) {
    auto ts = chain.head().header.timestamp + 1000;
    auto b = build_block(chain, std::move(txs), validators.front().identity.id, ts, mining_seed + chain.size());
    b.quorum_population = registered_voters(chain);
    auto h = hash_header(b.header, chain.algo());
    for (const auto& v : validators) b.votes.push_back(make_vote(v, h, b.quorum_population, chain.params().vote_base));
    for (const auto& a : actors)
      if (is_voting_role(a.identity.role)) b.votes.push_back(make_vote(a, h, b.quorum_population, chain.params().vote_base));
    chain = append_block(chain, b, VoteQuorum{chain.params().vote_base, b.quorum_population});
    return b;
  }

  Chain commit(const Chain& c, std::vector<SignedTransaction> txs) {
    chain = c;
    commit_block(std::move(txs));
    return chain;
  }

 private:
  Chain make(std::size_t n, unsigned difficulty, HashAlgo algo, const std::vector<std::pair<std::string, Role>>& specs,
             RegistryMode mode, VoteBase base) {
    std::vector<IdentityKeys> members;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
      validators.push_back(generate_identity(Role::Node, 1 + i, algo));
      members.push_back(validators.back());
      names.push_back("node-" + std::to_string(i));
    }
    for (std::size_t i = 0; i < specs.size(); ++i) {
      actors.push_back(generate_identity(specs[i].second, 500 + i, algo));
      actor_names.push_back(specs[i].first);
      members.push_back(actors.back());
      names.push_back(specs[i].first);
    }
    return genesis_chain(issuer, members, names, difficulty, algo, mode, base);
  }
};

inline Order sample_order(const std::string& number = "PO-7") {
  Order o;
  o.order_number = number;
  o.sku = "WIDGET";
  o.spec = "grade-A";
  o.quantity = 100;
  o.invoice_number = "INV-" + number;
  o.supplier = "supplier";
  o.producer = "producer";
  o.warehouse = "warehouse";
  o.retailer = "retailer";
  o.raw_material_price = 500;
  o.wholesale_price = 1200;
  o.retail_price = 2000;
  return o;
}

inline std::vector<std::pair<std::string, Role>> supply_actors() {
  return {{"supplier", Role::Supplier}, {"producer", Role::Producer}, {"warehouse", Role::Warehouse},
          {"retailer", Role::Retailer}};
}

}  // namespace testing
