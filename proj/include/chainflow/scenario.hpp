#ifndef CHAINFLOW_SCENARIO_HPP
#define CHAINFLOW_SCENARIO_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainflow/contracts.hpp"
#include "chainflow/error.hpp"
#include "chainflow/events.hpp"
#include "chainflow/hash.hpp"
#include "chainflow/identity.hpp"
#include "chainflow/network.hpp"

namespace chainflow {

struct ActorSpec {
  std::string name;
  Role role = Role::Node;
};

struct ScheduledEvent {
  std::string actor;
  Event event;
  std::optional<std::string> seal_for;  // recipient actor of the sealed note
  std::string sealed_note;
};

struct Outage {
  std::string node;
  std::uint32_t from_step = 0;
  std::uint32_t to_step = 0;  // exclusive
};

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 0;
  HashAlgo hash_algo = HashAlgo::Sha256;
  unsigned difficulty = 8;
  RegistryMode registry_mode = RegistryMode::Centralized;
  VoteBase vote_base = VoteBase::RegisteredOnly;
  std::uint32_t validators = 8;
  std::uint32_t degree = 3;
  std::optional<std::uint64_t> topology_seed;
  std::int64_t step_ms = 1000;
  std::uint32_t steps = 24;
  std::vector<ActorSpec> actors;
  std::vector<Order> orders;
  std::optional<std::vector<ScheduledEvent>> schedule;  // absent: happy path for every order
  std::vector<AttackProfile> attacks;
  bool authorized_peers = false;
  double availability_threshold = 0.5;
  std::optional<std::string> leak_private_key_of;
  std::vector<ContractRule> custom_rules;
  std::vector<Outage> outages;
  std::optional<std::string> out_dir;

  const ActorSpec* actor(const std::string& n) const {
    for (const auto& a : actors)
      if (a.name == n) return &a;
    return nullptr;
  }
};

namespace detail {

template <typename T>
T json_number(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw Error(ErrorCode::SchemaViolation, std::string("field '") + key + "' must be a number");
    return v.get<T>();
  } else {
    if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0))
      throw Error(ErrorCode::SchemaViolation, std::string("field '") + key + "' must be a non-negative integer");
    return v.get<T>();
  }
}

inline AttackProfile attack_from_json(const nlohmann::json& j, std::uint64_t scenario_seed, std::size_t index) {
  AttackProfile p;
  auto type = req_string(j, "type");
  p.start_step = json_number<std::uint32_t>(j, "start_step", 0);
  p.seed = json_number<std::uint64_t>(j, "seed", substream_seed(scenario_seed, "attack/" + std::to_string(index)));
  if (type == "sybil") {
    p.variant = SybilAttack{static_cast<std::uint32_t>(req_uint(j, "fake_identity_count"))};
  } else if (type == "eclipse") {
    if (!require(j, "adversarial_neighbor_fraction").is_number())
      throw Error(ErrorCode::SchemaViolation, "adversarial_neighbor_fraction must be a number");
    p.variant = EclipseAttack{req_string(j, "victim"), j.at("adversarial_neighbor_fraction").get<double>()};
  } else if (type == "majority") {
    if (!require(j, "controlled_fraction").is_number())
      throw Error(ErrorCode::SchemaViolation, "controlled_fraction must be a number");
    p.variant = MajorityAttack{j.at("controlled_fraction").get<double>(), json_number<std::uint32_t>(j, "duration_steps", 1),
                               json_number<double>(j, "power_rate_per_node_step", 1.0)};
  } else {
    throw Error(ErrorCode::SchemaViolation, "unknown attack type '" + type + "'");
  }
  p.validate();
  return p;
}

}  // namespace detail

/// Parses and validates a scenario document. Every identity referenced by an
/// order, schedule entry or attack must be declared.
inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "scenario must be a JSON object");
  static const std::set<std::string> known = {
      "name",    "seed",      "hash_algo",   "difficulty",   "registry_mode", "vote_base",
      "topology", "step_ms",  "steps",       "actors",       "orders",        "schedule",
      "attacks", "mitigations", "availability_threshold", "leak_private_key_of", "custom_rules",
      "outages", "out"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw Error(ErrorCode::SchemaViolation, "unknown scenario field '" + k + "'");

  ScenarioConfig c;
  c.name = req_string(j, "name");
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos)
    throw Error(ErrorCode::SchemaViolation, "scenario name must be a non-empty file-name-safe string");
  c.seed = req_uint(j, "seed");
  if (j.contains("hash_algo")) {
    auto name = req_string(j, "hash_algo");
    auto algo = parse_hash_algo(name);
    if (!algo) throw Error(ErrorCode::UnsupportedAlgo, "unknown hash algorithm '" + name + "'");
    require_hash_algo(*algo);
    c.hash_algo = *algo;
  }
  c.difficulty = json_number<unsigned>(j, "difficulty", 8);
  if (c.difficulty > max_difficulty)
    throw Error(ErrorCode::SchemaViolation, "difficulty above " + std::to_string(max_difficulty));
  if (j.contains("registry_mode")) {
    auto m = req_string(j, "registry_mode");
    if (m == "centralized") c.registry_mode = RegistryMode::Centralized;
    else if (m == "user_centric") c.registry_mode = RegistryMode::UserCentric;
    else throw Error(ErrorCode::SchemaViolation, "registry_mode must be centralized or user_centric");
  }
  if (j.contains("vote_base")) {
    auto b = req_string(j, "vote_base");
    if (b == "registered_only") c.vote_base = VoteBase::RegisteredOnly;
    else if (b == "all_observed") c.vote_base = VoteBase::AllObserved;
    else throw Error(ErrorCode::SchemaViolation, "vote_base must be registered_only or all_observed");
  }
  if (j.contains("topology")) {
    const auto& t = j.at("topology");
    if (!t.is_object()) throw Error(ErrorCode::SchemaViolation, "topology must be an object");
    c.validators = json_number<std::uint32_t>(t, "validators", c.validators);
    c.degree = json_number<std::uint32_t>(t, "degree", c.degree);
    if (t.contains("seed")) c.topology_seed = req_uint(t, "seed");
  }
  c.step_ms = json_number<std::int64_t>(j, "step_ms", c.step_ms);
  if (c.step_ms <= 0) throw Error(ErrorCode::SchemaViolation, "step_ms must be positive");
  c.steps = json_number<std::uint32_t>(j, "steps", c.steps);
  if (c.steps == 0) throw Error(ErrorCode::SchemaViolation, "steps must be positive");

  std::set<std::string> names;
  for (const auto& a : require(j, "actors")) {
    ActorSpec spec{req_string(a, "name"), Role::Node};
    auto role = parse_role(req_string(a, "role"));
    if (!role || *role == Role::Attacker || *role == Role::Node)
      throw Error(ErrorCode::SchemaViolation, "actor '" + spec.name + "' needs a supply-chain role");
    spec.role = *role;
    if (spec.name.empty() || spec.name.rfind("node-", 0) == 0)
      throw Error(ErrorCode::SchemaViolation, "actor name '" + spec.name + "' is reserved or empty");
    if (!names.insert(spec.name).second) throw Error(ErrorCode::SchemaViolation, "duplicate actor '" + spec.name + "'");
    c.actors.push_back(spec);
  }

  auto expect_actor = [&](const std::string& who, std::optional<Role> role, const std::string& context) {
    const auto* a = c.actor(who);
    if (!a) throw Error(ErrorCode::SchemaViolation, context + " references undefined actor '" + who + "'");
    if (role && a->role != *role)
      throw Error(ErrorCode::SchemaViolation, context + ": actor '" + who + "' is not a " + std::string(to_string(*role)));
  };

  std::set<std::string> order_numbers;
  for (const auto& o : require(j, "orders")) {
    auto order = order_from_json(o);
    if (!order_numbers.insert(order.order_number).second)
      throw Error(ErrorCode::SchemaViolation, "duplicate order '" + order.order_number + "'");
    expect_actor(order.supplier, Role::Supplier, "order " + order.order_number);
    expect_actor(order.producer, Role::Producer, "order " + order.order_number);
    expect_actor(order.warehouse, Role::Warehouse, "order " + order.order_number);
    expect_actor(order.retailer, Role::Retailer, "order " + order.order_number);
    c.orders.push_back(std::move(order));
  }
  if (c.orders.empty()) throw Error(ErrorCode::SchemaViolation, "scenario needs at least one order");

  if (j.contains("schedule")) {
    std::vector<ScheduledEvent> schedule;
    for (const auto& s : j.at("schedule")) {
      ScheduledEvent ev{req_string(s, "actor"), stage_event_from_json(require(s, "event")), std::nullopt, {}};
      expect_actor(ev.actor, std::nullopt, "schedule");
      if (s.contains("seal_for")) {
        ev.seal_for = req_string(s, "seal_for");
        expect_actor(*ev.seal_for, std::nullopt, "schedule seal_for");
        ev.sealed_note = req_string(s, "sealed_note");
      }
      schedule.push_back(std::move(ev));
    }
    c.schedule = std::move(schedule);
  }

  if (j.contains("attacks")) {
    std::size_t i = 0;
    for (const auto& a : j.at("attacks")) c.attacks.push_back(attack_from_json(a, c.seed, i++));
  }
  if (j.contains("mitigations")) {
    const auto& m = j.at("mitigations");
    if (!m.is_object()) throw Error(ErrorCode::SchemaViolation, "mitigations must be an object");
    for (const auto& [k, v] : m.items())
      if (k != "authorized_peers") throw Error(ErrorCode::SchemaViolation, "unknown mitigation '" + k + "'");
    if (m.contains("authorized_peers")) c.authorized_peers = req_bool(m, "authorized_peers");
  }
  c.availability_threshold = json_number<double>(j, "availability_threshold", 0.5);
  if (!(c.availability_threshold >= 0.0 && c.availability_threshold <= 1.0))
    throw Error(ErrorCode::SchemaViolation, "availability_threshold must lie in [0,1]");
  if (j.contains("leak_private_key_of")) {
    c.leak_private_key_of = req_string(j, "leak_private_key_of");
    expect_actor(*c.leak_private_key_of, std::nullopt, "leak_private_key_of");
  }
  if (j.contains("custom_rules"))
    for (const auto& r : j.at("custom_rules")) {
      auto rule = rule_from_json(r);
      if (!order_numbers.count(rule.order_number))
        throw Error(ErrorCode::SchemaViolation, "rule '" + rule.id + "' names unknown order '" + rule.order_number + "'");
      c.custom_rules.push_back(std::move(rule));
    }
  if (j.contains("outages"))
    for (const auto& o : j.at("outages")) {
      Outage out{req_string(o, "node"), static_cast<std::uint32_t>(req_uint(o, "from_step")),
                 static_cast<std::uint32_t>(req_uint(o, "to_step"))};
      c.outages.push_back(std::move(out));
    }
  if (j.contains("out")) c.out_dir = req_string(j, "out");

  std::size_t node_count = c.actors.size() + c.validators;
  if (node_count < 2) throw Error(ErrorCode::SchemaViolation, "network needs at least two nodes");
  if (c.degree == 0 || c.degree >= node_count)
    throw Error(ErrorCode::SchemaViolation, "topology degree must lie in [1, node count)");
  auto node_exists = [&](const std::string& n) {
    if (c.actor(n)) return true;
    if (n.rfind("node-", 0) != 0) return false;
    try {
      std::size_t pos = 0;
      auto idx = std::stoul(n.substr(5), &pos);
      return pos == n.size() - 5 && idx < c.validators;
    } catch (const std::exception&) {
      return false;
    }
  };
  for (const auto& a : c.attacks)
    if (const auto* e = std::get_if<EclipseAttack>(&a.variant))
      if (!node_exists(e->victim)) throw Error(ErrorCode::SchemaViolation, "eclipse victim '" + e->victim + "' is not a node");
  for (const auto& o : c.outages)
    if (!node_exists(o.node)) throw Error(ErrorCode::SchemaViolation, "outage names unknown node '" + o.node + "'");
  return c;
}

/// Parses scenario text; JSON syntax errors carry line and column.
inline ScenarioConfig parse_scenario(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::SchemaViolation,
                "malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, e.what());
  }
}

}  // namespace chainflow

#endif  // CHAINFLOW_SCENARIO_HPP
