#ifndef CHAINFLOW_SIMULATION_HPP
#define CHAINFLOW_SIMULATION_HPP

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainflow/contracts.hpp"
#include "chainflow/identity.hpp"
#include "chainflow/ledger.hpp"
#include "chainflow/network.hpp"
#include "chainflow/report.hpp"
#include "chainflow/rng.hpp"
#include "chainflow/scenario.hpp"
#include "chainflow/supply_chain.hpp"

namespace chainflow {

/// Seven signed stage events that carry one order from supplier to retail
/// receipt. Barcodes chain RAW -> PROD -> PKG so the last one traces back to
/// the raw lot. The raw shipment carries a note sealed for the producer.
inline std::vector<ScheduledEvent> happy_path(const Order& o, std::int64_t day) {
  const auto& n = o.order_number;
  auto qty = o.quantity;
  return {
      {o.supplier, RawMaterialShipment{"COO-" + n, "BATCH-" + n, n, day, "RAW-" + n}, o.producer,
       "unit cost " + std::to_string(o.raw_material_price)},
      {o.producer, ProducerReceipt{n, qty, true, o.spec}, std::nullopt, {}},
      {o.producer, ProductionRecord{n, "PRD-" + n, "PROD-" + n, "RAW-" + n}, std::nullopt, {}},
      {o.producer, WarehouseShipment{n, "SHP-" + n, "PROD-" + n}, std::nullopt, {}},
      {o.warehouse, WarehouseReceipt{n, o.producer, o.invoice_number, "SHP-" + n, qty, true}, std::nullopt, {}},
      {o.warehouse, RetailShipment{n, "received PROD-" + n, day + 2, "PKG-" + n, "PROD-" + n}, std::nullopt, {}},
      {o.retailer, RetailReceipt{n, day + 3, "CUST-" + n}, std::nullopt, {}},
  };
}

struct SimOutcome {
  SimReport report;
  Chain chain;                                 // honest-majority chain at the end
  std::map<std::string, IdentityKeys> keys;    // actors and validators by name
};

namespace detail {

struct Proposal {
  std::string actor;
  SignedTransaction tx;
};

class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), seed_(seed), mining_rng_(seed, "mining"), genesis_chain_(make_genesis_block()) {}

  SimOutcome run() {
    setup_network();
    queue_schedule();
    for (std::uint32_t step = 0; step < cfg_.steps; ++step) run_step(step);
    return finish();
  }

 private:
  using ChainPtr = std::shared_ptr<const Chain>;

  struct Node {
    std::string name;
    IdentityKeys keys;
    ChainPtr chain;
    bool adversarial = false;  // controlled validator or eclipse adversary
    bool up = true;
    bool in_report = true;     // eclipse adversaries are not part of the network under study
  };

  struct MajorityState {
    const AttackProfile* profile = nullptr;
    std::vector<std::size_t> controlled;
    std::size_t snapshot_size = 0;
    std::vector<HashDigest> snapshot;
    std::uint32_t steps_active = 0;
    bool fault_proposed = false;
    bool fault_accepted = false;
    std::uint64_t rewrite_attempts = 0;
    std::uint64_t rewrites_accepted = 0;
    std::string rewrite_failure;
    double cost = 0.0;
    bool engaged = false;
  };

  struct SybilState {
    const AttackProfile* profile = nullptr;
    std::vector<IdentityKeys> fakes;
    std::size_t entry = 0;
    bool observed = false;
    bool registered = false;
    bool registration_proposed = false;
    bool fault_proposed = false;
    bool fault_accepted = false;
    std::uint64_t registrations_refused = 0;
    bool engaged = false;
  };

  struct EclipseState {
    const AttackProfile* profile = nullptr;
    std::size_t victim = 0;
    std::vector<std::size_t> adversaries;
    std::uint64_t forged_fed = 0;
    std::uint64_t wasted_work = 0;
    std::uint64_t honest_after_start = 0;
    bool active = false;
  };

  // -- setup ---------------------------------------------------------------

  IdentityKeys keys_for(const std::string& name, Role role) const {
    return generate_identity(role, substream_seed(seed_, "identity/" + name), cfg_.hash_algo);
  }

  Chain make_genesis_block() {
    require_hash_algo(cfg_.hash_algo);
    issuer_ = generate_identity(Role::Node, substream_seed(seed_, "issuer"), cfg_.hash_algo);
    for (const auto& a : cfg_.actors) node_specs_.push_back({a.name, a.role});
    for (std::uint32_t i = 0; i < cfg_.validators; ++i) node_specs_.push_back({"node-" + std::to_string(i), Role::Node});

    GenesisMarker marker{"chainflow", cfg_.hash_algo, static_cast<std::uint8_t>(cfg_.difficulty), cfg_.registry_mode,
                         cfg_.vote_base, {}};
    if (cfg_.registry_mode == RegistryMode::Centralized) marker.issuer_keys.push_back(issuer_->identity.public_key);

    std::vector<SignedTransaction> txs;
    for (const auto& [name, role] : node_specs_) {
      auto k = keys_for(name, role);
      Credential cred = cfg_.registry_mode == RegistryMode::Centralized ? issue_credential(k.identity, name, issuer_->private_key)
                                                                         : self_attest(k, name);
      txs.push_back(sign_transaction(Enrollment{name, k.identity.public_key, role, cred}, std::nullopt, k));
      keys_.emplace(name, k);
    }
    for (const auto& o : cfg_.orders) txs.push_back(sign_transaction(OrderOpened{o}, std::nullopt, keys_.at(o.producer)));
    for (const auto& o : cfg_.orders)
      for (auto rule : builtin_rules(o)) txs.push_back(deployment_transaction(std::move(rule), 0, keys_.at(o.producer)));
    for (const auto& rule : cfg_.custom_rules) {
      const auto& order = *std::find_if(cfg_.orders.begin(), cfg_.orders.end(),
                                        [&](const Order& o) { return o.order_number == rule.order_number; });
      txs.push_back(deployment_transaction(rule, 0, keys_.at(order.producer)));
    }
    return Chain(make_genesis(std::move(marker), std::move(txs)));
  }

  void setup_network() {
    auto genesis = std::make_shared<const Chain>(genesis_chain_);
    for (const auto& [name, role] : node_specs_) nodes_.push_back(Node{name, keys_.at(name), genesis});
    topology_ = build_topology(nodes_.size(), cfg_.degree, cfg_.topology_seed.value_or(substream_seed(seed_, "topology")));
    Rng clock(seed_, "clock");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      auto span = static_cast<std::uint64_t>(cfg_.step_ms / 2 + 1);
      skew_.push_back(static_cast<std::int64_t>(clock.below(span)) - cfg_.step_ms / 4);
    }
    for (const auto& a : cfg_.attacks) {
      if (std::holds_alternative<MajorityAttack>(a.variant) && !majority_.profile) majority_.profile = &a;
      if (std::holds_alternative<SybilAttack>(a.variant) && !sybil_.profile) sybil_.profile = &a;
      if (std::holds_alternative<EclipseAttack>(a.variant) && !eclipse_.profile) eclipse_.profile = &a;
    }
    remember_adopted(*genesis);
  }

  void queue_schedule() {
    std::vector<ScheduledEvent> events;
    if (cfg_.schedule) {
      events = *cfg_.schedule;
    } else {
      std::int64_t day = 20000;
      for (const auto& o : cfg_.orders) {
        auto path = happy_path(o, day);
        events.insert(events.end(), path.begin(), path.end());
        day += 10;
      }
    }
    std::uint64_t idx = 0;
    for (auto& ev : events) {
      std::optional<SealedPayload> sealed;
      if (ev.seal_for) {
        ByteWriter w;
        w.str("seal-entropy").u64(seed_).u64(idx);
        auto entropy = sha256(w.bytes());
        Bytes note(ev.sealed_note.begin(), ev.sealed_note.end());
        sealed = seal(note, keys_.at(*ev.seal_for).identity, entropy.view());
      }
      queue_.push_back({ev.actor, sign_transaction(ev.event, std::move(sealed), keys_.at(ev.actor))});
      ++idx;
    }
  }

  // -- ledger views --------------------------------------------------------

  std::shared_ptr<const LedgerState> state_of(const Chain& chain) {
    std::vector<HashDigest> hashes;
    hashes.reserve(chain.size());
    for (const auto& b : chain.blocks()) hashes.push_back(hash_header(b.header, chain.algo()));
    std::size_t i = chain.size();
    std::shared_ptr<const LedgerState> base;
    while (i > 0) {
      auto it = states_.find(hashes[i - 1]);
      if (it != states_.end()) {
        base = it->second;
        break;
      }
      --i;
    }
    auto state = base ? *base : LedgerState{};
    for (; i < chain.size(); ++i) {
      state = apply_block(std::move(state), chain.at(i));
      base = std::make_shared<const LedgerState>(state);
      states_.emplace(hashes[i], base);
    }
    return base;
  }

  bool chain_valid(const Chain& chain) {
    auto h = chain.head_hash();
    if (auto it = validity_.find(h); it != validity_.end()) return it->second;
    bool ok = verify_chain(chain, &cache_).ok();
    validity_.emplace(h, ok);
    return ok;
  }

  /// Problem an honest validator has with `block` on top of `chain`.
  std::optional<std::string> endorsement_problem(const Chain& chain, const Block& block) {
    auto h = hash_header(block.header, chain.algo());
    if (auto it = endorse_.find(h); it != endorse_.end()) return it->second;
    std::optional<std::string> problem;
    auto verdict = check_candidate(chain, block, &cache_);
    if (!verdict.ok()) problem = std::string(to_string(verdict.cause)) + ": " + verdict.detail;
    else problem = semantic_problem(*state_of(chain), block);
    endorse_.emplace(h, problem);
    return problem;
  }

  std::set<IdentityId> registered_voting_ids(const Chain& chain) {
    std::set<IdentityId> out;
    for (const auto& [id, role] : enrollment_view(chain).roles)
      if (is_voting_role(role)) out.insert(id);
    return out;
  }

  std::uint32_t quorum_population(const Chain& chain) {
    auto n = registered_voters(chain);
    if (cfg_.vote_base == VoteBase::AllObserved) {
      auto registered = registered_voting_ids(chain);
      if (sybil_.observed)
        for (const auto& f : sybil_.fakes)
          if (!registered.count(f.identity.id)) ++n;
      for (auto a : eclipse_.adversaries)
        if (!registered.count(nodes_[a].keys.identity.id)) ++n;
    }
    return n;
  }

  /// Head most common among up honest nodes; ties to the longer chain, then
  /// the lower head hash.
  ChainPtr majority_chain() const {
    std::map<HashDigest, std::pair<std::size_t, ChainPtr>> tally;
    for (const auto& n : nodes_) {
      if (n.adversarial || !n.in_report || !n.up) continue;
      auto& slot = tally[n.chain->head_hash()];
      ++slot.first;
      slot.second = n.chain;
    }
    if (tally.empty()) return nodes_.front().chain;
    ChainPtr best;
    std::size_t best_count = 0;
    for (const auto& [h, entry] : tally) {
      const auto& [count, chain] = entry;
      if (!best || count > best_count || (count == best_count && chain->size() > best->size())) {
        best = chain;
        best_count = count;
      }
    }
    return best;
  }

  void remember_adopted(const Chain& chain) {
    for (const auto& b : chain.blocks()) adopted_blocks_.insert(hash_header(b.header, chain.algo()));
  }

  /// Fork choice: longest quorum-valid chain, ties to the lower head hash.
  bool offer(std::size_t node, const ChainPtr& candidate) {
    auto& n = nodes_[node];
    if (candidate->head_hash() == n.chain->head_hash()) return false;
    bool better = candidate->size() > n.chain->size() ||
                  (candidate->size() == n.chain->size() && candidate->head_hash() < n.chain->head_hash());
    if (!better || !chain_valid(*candidate)) return false;
    n.chain = candidate;
    if (!n.adversarial) remember_adopted(*candidate);
    return true;
  }

  // -- proposals -----------------------------------------------------------

  std::int64_t block_timestamp(std::uint32_t step, const Chain& base) const {
    std::vector<std::int64_t> clocks;
    for (std::size_t i = 0; i < skew_.size(); ++i)
      if (nodes_[i].up) clocks.push_back(static_cast<std::int64_t>(step + 1) * cfg_.step_ms + skew_[i]);
    return decentralized_timestamp(std::move(clocks), base.head().header.timestamp);
  }

  RelayPolicy relay_policy() const {
    return [this](std::size_t from, std::size_t to) {
      if (!eclipse_.active || to != eclipse_.victim) return true;
      return !nodes_[from].adversarial;
    };
  }

  struct ProposalOutcome {
    bool accepted = false;
    std::optional<std::string> problem;  // honest objection, if any
    ChainPtr chain;
  };

  /// Mines `txs` on `base`, floods the candidate from `origin`, gathers votes
  /// and, on quorum, floods the extended chain. `extra_votes` come from
  /// identities outside the node list (sybil fakes).
  ProposalOutcome propose(std::uint32_t step, std::size_t origin, const ChainPtr& base,
                          std::vector<SignedTransaction> txs, const IdentityId& proposer, const std::string& label,
                          const std::set<std::size_t>& bloc, const std::vector<IdentityKeys>& extra_votes,
                          bool honest_origin) {
    ProposalOutcome out;
    Block block;
    try {
      block = build_block(*base, std::move(txs), proposer, block_timestamp(step, *base), mining_rng_.next());
    } catch (const Error& e) {
      ++report_.blocks_rejected;
      log(step, "block_rejected", {{"proposal", label}, {"reason", e.what()}});
      return out;
    }
    auto header_hash = hash_header(block.header, base->algo());
    auto population = quorum_population(*base);
    block.quorum_population = population;
    out.problem = endorsement_problem(*base, block);

    auto deliveries = broadcast(topology_, origin, up_flags(), relay_policy());
    std::vector<std::size_t> reached{origin};
    for (const auto& d : deliveries) reached.push_back(d.node);

    std::vector<Vote> offered;
    for (auto v : reached) {
      const auto& n = nodes_[v];
      if (honest_origin && eclipse_.active && v == eclipse_.victim) ++eclipse_.honest_after_start;
      bool yes;
      if (bloc.count(v)) yes = true;
      else if (!n.in_report) yes = false;
      else yes = n.chain->head_hash() == base->head_hash() && !out.problem;
      if (yes) offered.push_back(make_vote(n.keys, header_hash, population, cfg_.vote_base));
    }
    for (const auto& f : extra_votes) offered.push_back(make_vote(f, header_hash, population, cfg_.vote_base));

    std::set<IdentityId> eligible;
    if (cfg_.vote_base == VoteBase::RegisteredOnly) eligible = registered_voting_ids(*base);
    auto collected = collect_votes(block, base->algo(), offered, VoteQuorum{cfg_.vote_base, population},
                                   cfg_.vote_base == VoteBase::RegisteredOnly ? &eligible : nullptr, &cache_);
    if (!collected.accepted) {
      ++report_.blocks_rejected;
      nlohmann::json detail{{"proposal", label},
                            {"votes", collected.votes.size()},
                            {"required", collected.required},
                            {"population", population}};
      if (out.problem) detail["objection"] = *out.problem;
      log(step, "block_rejected", detail);
      return out;
    }
    block.votes = std::move(collected.votes);
    out.chain = std::make_shared<const Chain>(base->with_block(std::move(block)));
    out.accepted = true;
    ++report_.blocks_accepted;
    nlohmann::json detail{{"proposal", label}, {"index", base->size()}, {"votes", out.chain->head().votes.size()}};
    if (out.problem) {
      ++report_.integrity_violations;
      detail["objection"] = *out.problem;
      log(step, "integrity_violation", {{"index", base->size()}, {"reason", *out.problem}});
    }
    log(step, "block_accepted", detail);
    for (auto v : reached) offer(v, out.chain);
    return out;
  }

  std::vector<bool> up_flags() const {
    std::vector<bool> up;
    for (const auto& n : nodes_) up.push_back(n.up);
    return up;
  }

  std::size_t node_index(const std::string& name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].name == name) return i;
    throw Error(ErrorCode::InvalidArgument, "no node named '" + name + "'");
  }

  void queue_payments(std::uint32_t step, const Chain& chain) {
    auto state = state_of(chain);
    std::deque<Proposal> front;
    for (const auto& p : state->payments) {
      if (p.settled) continue;
      auto key = std::make_pair(p.order_number, static_cast<int>(p.stage));
      if (!payments_queued_.insert(key).second) continue;
      auto it = keys_.find(p.from);
      if (it == keys_.end()) {
        log(step, "payment_unissuable", {{"from", p.from}, {"order_number", p.order_number}});
        continue;
      }
      Payment pay{p.from, p.to, static_cast<std::uint64_t>(p.amount), p.order_number, p.stage};
      try {
        front.push_back({p.from, build_event(it->second, pay)});
      } catch (const Error& e) {
        log(step, "payment_unissuable", {{"from", p.from}, {"order_number", p.order_number}, {"reason", e.what()}});
      }
    }
    queue_.insert(queue_.begin(), front.begin(), front.end());
  }

  void honest_proposal(std::uint32_t step) {
    if (queue_.empty()) return;
    auto origin = node_index(queue_.front().actor);
    if (!nodes_[origin].up) {
      log(step, "proposer_down", {{"actor", queue_.front().actor}});
      return;
    }
    auto proposal = queue_.front();
    queue_.pop_front();
    auto base = nodes_[origin].chain;
    auto label = proposal.actor + ":" + std::string(to_string(kind_of(proposal.tx.event)));
    auto outcome = propose(step, origin, base, {proposal.tx}, nodes_[origin].keys.identity.id, label, {}, {}, true);
    if (outcome.accepted) queue_payments(step, *outcome.chain);
  }

  // -- attacks -------------------------------------------------------------

  SignedTransaction forged_payment(const IdentityKeys& signer) const {
    const auto& o = cfg_.orders.front();
    Payment pay{o.retailer, "attacker", o.retail_price + 1, o.order_number, Stage::RetailReceipt};
    return sign_transaction(pay, std::nullopt, signer);
  }

  static void tamper(SignedTransaction& tx) {
    std::visit(
        [](auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, Payment>) e.to = "attacker";
          else if constexpr (std::is_same_v<T, Enrollment>) e.name += "'";
          else if constexpr (std::is_same_v<T, GenesisMarker>) e.label += "'";
          else if constexpr (std::is_same_v<T, OrderOpened>) e.order.quantity += 1;
          else if constexpr (std::is_same_v<T, ContractDeployment>) e.rule.id += "'";
          else e.order_number += "'";
        },
        tx.event);
  }

  /// Re-mines and re-votes with the bloc everything from `from_index` on, as
  /// a controlling majority could.
  Chain rebuild_fork(const Chain& honest, std::size_t from_index, Block altered) {
    std::vector<Block> blocks(honest.blocks().begin(), honest.blocks().begin() + static_cast<std::ptrdiff_t>(from_index));
    auto algo = honest.algo();
    for (std::size_t i = from_index; i < honest.size(); ++i) {
      Block b = i == from_index ? std::move(altered) : honest.at(i);
      b.header.prev_hash = hash_header(blocks.back().header, algo);
      b.header.payload_hash = payload_hash(b.transactions, algo);
      b.header.nonce = 0;
      try {
        b.header.nonce = mine(b.header, honest.difficulty(), mining_rng_.next(), algo).nonce;
      } catch (const Error&) {
      }
      auto h = hash_header(b.header, algo);
      b.votes.clear();
      for (auto c : majority_.controlled)
        b.votes.push_back(make_vote(nodes_[c].keys, h, b.quorum_population, cfg_.vote_base));
      std::sort(b.votes.begin(), b.votes.end(), [](const Vote& x, const Vote& y) { return x.voter < y.voter; });
      blocks.push_back(std::move(b));
    }
    return Chain::from_blocks(std::move(blocks));
  }

  void attempt_rewrite(std::uint32_t step) {
    auto honest = majority_chain();
    std::optional<std::size_t> target;
    for (std::size_t i = std::min(majority_.snapshot_size, honest->size()); i-- > 1;) {
      target = i;
      break;
    }
    if (!target) target = 0;
    Block altered = honest->at(*target);
    std::size_t tx_index = altered.transactions.size() > 1 && *target == 0 ? 1 : 0;
    tamper(altered.transactions[tx_index]);
    ++majority_.rewrite_attempts;
    nlohmann::json detail{{"target_index", *target}};
    if (*target == 0) {
      // Genesis cannot be re-mined into a different chain with the same identity; submit as is.
      altered.header.payload_hash = payload_hash(altered.transactions, honest->algo());
      std::vector<Block> blocks{altered};
      for (std::size_t i = 1; i < honest->size(); ++i) blocks.push_back(honest->at(i));
      auto fork = std::make_shared<const Chain>(Chain::from_blocks(std::move(blocks)));
      judge_rewrite(step, fork, detail);
      return;
    }
    auto fork = std::make_shared<const Chain>(rebuild_fork(*honest, *target, std::move(altered)));
    judge_rewrite(step, fork, detail);
  }

  void judge_rewrite(std::uint32_t step, const ChainPtr& fork, nlohmann::json detail) {
    auto verdict = verify_chain(*fork, &cache_).first_failure();
    std::uint64_t adopted = 0;
    auto origin = majority_.controlled.empty() ? 0 : majority_.controlled.front();
    for (const auto& d : broadcast(topology_, origin, up_flags(), relay_policy()))
      if (!nodes_[d.node].adversarial && offer(d.node, fork)) ++adopted;
    if (adopted > 0) ++majority_.rewrites_accepted;
    if (verdict) {
      detail["cause"] = std::string(to_string(verdict->cause));
      detail["failed_block"] = verdict->index;
      majority_.rewrite_failure = std::string(to_string(verdict->cause));
    }
    detail["adopted_by"] = adopted;
    log(step, adopted ? "rewrite_accepted" : "rewrite_rejected", detail);
  }

  bool majority_step(std::uint32_t step) {
    const auto* p = majority_.profile;
    if (!p || step < p->start_step) return false;
    const auto& m = std::get<MajorityAttack>(p->variant);
    if (step == p->start_step) {
      auto honest = majority_chain();
      auto population = registered_voters(*honest);
      std::vector<std::size_t> validators;
      for (std::size_t i = cfg_.actors.size(); i < cfg_.actors.size() + cfg_.validators; ++i) validators.push_back(i);
      Rng rng(p->seed, "majority");
      rng.shuffle(validators);
      auto want = fraction_count(m.controlled_fraction, population);
      auto take = std::min<std::uint64_t>(want, validators.size());
      if (take == 0) return false;
      majority_.engaged = true;
      majority_.controlled.assign(validators.begin(), validators.begin() + static_cast<std::ptrdiff_t>(take));
      std::sort(majority_.controlled.begin(), majority_.controlled.end());
      for (auto c : majority_.controlled) nodes_[c].adversarial = true;
      majority_.snapshot_size = honest->size();
      for (const auto& b : honest->blocks()) majority_.snapshot.push_back(hash_header(b.header, honest->algo()));
      nlohmann::json detail{{"controlled", take}, {"population", population}};
      if (take < want) detail["capped_from"] = want;
      log(step, "majority_start", detail);
    }
    if (!majority_.engaged) return false;
    if (step < p->start_step + m.duration_steps) ++majority_.steps_active;
    if (majority_.fault_proposed) return false;
    majority_.fault_proposed = true;
    auto leader = majority_.controlled.front();
    auto base = majority_chain();
    std::set<std::size_t> bloc(majority_.controlled.begin(), majority_.controlled.end());
    auto outcome = propose(step, leader, base, {forged_payment(nodes_[leader].keys)}, nodes_[leader].keys.identity.id,
                           "majority:fault", bloc, {}, false);
    majority_.fault_accepted = outcome.accepted;
    attempt_rewrite(step);
    return true;
  }

  bool sybil_step(std::uint32_t step) {
    const auto* p = sybil_.profile;
    if (!p || step < p->start_step) return false;
    const auto& s = std::get<SybilAttack>(p->variant);
    if (step == p->start_step) {
      if (s.fake_identity_count == 0) return false;
      for (std::uint32_t i = 0; i < s.fake_identity_count; ++i)
        sybil_.fakes.push_back(generate_identity(Role::Node, substream_seed(p->seed, "fake/" + std::to_string(i)),
                                                 cfg_.hash_algo));
      Rng rng(p->seed, "sybil");
      sybil_.entry = static_cast<std::size_t>(rng.below(nodes_.size()));
      sybil_.observed = true;
      if (cfg_.registry_mode == RegistryMode::Centralized) {
        // Self-issued credentials are refused by the registry before any block is proposed.
        auto registry = IdentityRegistry::with_mode(cfg_.registry_mode, genesis_chain_.params().issuers, cfg_.hash_algo);
        for (std::uint32_t i = 0; i < sybil_.fakes.size(); ++i) {
          const auto& f = sybil_.fakes[i];
          try {
            registry = registry.register_identity(f.identity, "fake-" + std::to_string(i), self_attest(f, "fake-" + std::to_string(i)));
          } catch (const Error&) {
            ++sybil_.registrations_refused;
          }
        }
      }
    }
    if (sybil_.fakes.empty() || sybil_.fault_proposed) return false;
    bool eligible = cfg_.vote_base == VoteBase::AllObserved || sybil_.registered;
    auto base = majority_chain();
    if (!eligible) {
      if (cfg_.registry_mode != RegistryMode::UserCentric || sybil_.registration_proposed) return false;
      sybil_.engaged = true;
      sybil_.registration_proposed = true;
      std::vector<SignedTransaction> txs;
      for (std::uint32_t i = 0; i < sybil_.fakes.size(); ++i) {
        const auto& f = sybil_.fakes[i];
        auto name = "fake-" + std::to_string(i);
        txs.push_back(sign_transaction(Enrollment{name, f.identity.public_key, Role::Node, self_attest(f, name)},
                                       std::nullopt, f));
      }
      auto outcome = propose(step, sybil_.entry, base, std::move(txs), sybil_.fakes.front().identity.id,
                             "sybil:enroll", {}, {}, false);
      sybil_.registered = outcome.accepted;
      return true;
    }
    sybil_.engaged = true;
    sybil_.fault_proposed = true;
    auto outcome = propose(step, sybil_.entry, base, {forged_payment(sybil_.fakes.front())},
                           sybil_.fakes.front().identity.id, "sybil:fault", {}, sybil_.fakes, false);
    sybil_.fault_accepted = outcome.accepted;
    return true;
  }

  void eclipse_step(std::uint32_t step) {
    const auto* p = eclipse_.profile;
    if (!p || step < p->start_step) return;
    const auto& e = std::get<EclipseAttack>(p->variant);
    if (step == p->start_step) {
      eclipse_.victim = node_index(e.victim);
      auto neighbors = topology_.neighbors(eclipse_.victim);
      auto k = fraction_count(e.adversarial_neighbor_fraction, neighbors.size());
      if (k == 0) return;
      if (cfg_.authorized_peers) return;  // unregistered peers are refused as neighbours
      Rng rng(p->seed, "eclipse");
      rng.shuffle(neighbors);
      auto victim_chain = nodes_[eclipse_.victim].chain;
      for (std::size_t i = 0; i < k; ++i) {
        auto name = "adv-" + std::to_string(i);
        auto keys = generate_identity(Role::Attacker, substream_seed(p->seed, name), cfg_.hash_algo);
        Node adv{name, keys, victim_chain, true, true, false};
        nodes_.push_back(adv);
        auto a = topology_.add_node();
        topology_.remove_edge(eclipse_.victim, neighbors[i]);
        topology_.add_edge(eclipse_.victim, a);
        topology_.add_edge(a, neighbors[i]);
        eclipse_.adversaries.push_back(a);
      }
      eclipse_.active = true;
      log(step, "eclipse_start", {{"victim", e.victim}, {"adversaries", k}, {"victim_degree", neighbors.size()}});
    }
    if (!eclipse_.active || !nodes_[eclipse_.victim].up) return;
    // Feed the victim a fork it cannot get quorum for.
    const auto& adv = nodes_[eclipse_.adversaries.front()];
    auto base = nodes_[eclipse_.victim].chain;
    Block forged;
    try {
      forged = build_block(*base, {forged_payment(adv.keys)}, adv.keys.identity.id, block_timestamp(step, *base),
                           mining_rng_.next());
    } catch (const Error&) {
      return;
    }
    forged.quorum_population = quorum_population(*base);
    ++eclipse_.forged_fed;
    ++eclipse_.wasted_work;
    offer(eclipse_.victim, std::make_shared<const Chain>(base->with_block(std::move(forged))));
  }

  // -- per-step bookkeeping ------------------------------------------------

  void apply_outages(std::uint32_t step) {
    for (std::size_t i = 0; i < node_specs_.size(); ++i) nodes_[i].up = true;
    for (const auto& o : cfg_.outages)
      if (step >= o.from_step && step < o.to_step) nodes_[node_index(o.node)].up = false;
  }

  /// Nodes that fell behind (outage, partial eclipse) fetch longer chains
  /// from their neighbours.
  void sync_recovered() {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!nodes_[i].up || nodes_[i].adversarial) continue;
      for (auto nb : topology_.neighbors(i)) {
        if (!nodes_[nb].up) continue;
        if (eclipse_.active && i == eclipse_.victim && nodes_[nb].adversarial) continue;
        if (nodes_[nb].chain->size() > nodes_[i].chain->size()) offer(i, nodes_[nb].chain);
      }
    }
  }

  void check_confidentiality() {
    std::vector<const PrivateKey*> keys;
    bool adversary_present = false;
    for (const auto& n : nodes_)
      if (n.adversarial) {
        adversary_present = true;
        keys.push_back(&n.keys.private_key);
      }
    if (sybil_.engaged) {
      adversary_present = true;
      for (const auto& f : sybil_.fakes) keys.push_back(&f.private_key);
    }
    if (!adversary_present) return;
    std::optional<PrivateKey> leaked;
    if (cfg_.leak_private_key_of) leaked = keys_.at(*cfg_.leak_private_key_of).private_key;
    if (leaked) keys.push_back(&*leaked);
    for (const auto& n : nodes_) {
      if (!n.adversarial) continue;
      scan_sealed(*n.chain, keys);
    }
    if (sybil_.engaged) scan_sealed(*nodes_[sybil_.entry].chain, keys);
  }

  void scan_sealed(const Chain& chain, const std::vector<const PrivateKey*>& keys) {
    for (const auto& b : chain.blocks()) {
      auto h = hash_header(b.header, chain.algo());
      for (std::size_t t = 0; t < b.transactions.size(); ++t) {
        const auto& tx = b.transactions[t];
        if (!tx.sealed) continue;
        auto key = std::make_pair(h, t);
        if (breached_.count(key)) continue;
        for (const auto* k : keys) {
          try {
            (void)unseal(*tx.sealed, *k);
            breached_.insert(key);
            ++report_.confidentiality_breaches;
            break;
          } catch (const Error&) {
          }
        }
      }
    }
  }

  void run_step(std::uint32_t step) {
    apply_outages(step);
    sync_recovered();
    bool attacker_acted = majority_step(step);
    if (!attacker_acted) attacker_acted = sybil_step(step);
    if (!attacker_acted) honest_proposal(step);
    eclipse_step(step);
    sync_recovered();
    check_confidentiality();

    auto majority = majority_chain();
    StepMetrics m;
    m.step = step;
    m.height = majority->size();
    m.blocks_accepted = report_.blocks_accepted;
    m.blocks_rejected = report_.blocks_rejected;
    m.integrity_violations = report_.integrity_violations;
    for (std::size_t i = 0; i < node_specs_.size(); ++i) {
      bool ok = nodes_[i].up && nodes_[i].chain->head_hash() == majority->head_hash();
      if (ok) {
        ++available_steps_[i];
        ++m.available_nodes;
      }
    }
    report_.steps.push_back(m);
  }

  void log(std::uint32_t step, const std::string& type, nlohmann::json detail) {
    detail["step"] = step;
    detail["type"] = type;
    report_.events.push_back(std::move(detail));
  }

  SimOutcome finish() {
    auto majority = majority_chain();
    auto state = state_of(*majority);
    report_.chain_length = majority->size();
    report_.head_hash = majority->head_hash().hex();
    report_.payments_made = state->payments.size();
    for (const auto& p : state->payments) report_.payments_settled += p.settled ? 1 : 0;
    report_.disputes = state->disputes.size();
    report_.rejected_transactions = state->rejected.size();
    std::set<HashDigest> on_majority;
    for (const auto& b : majority->blocks()) on_majority.insert(hash_header(b.header, majority->algo()));
    for (const auto& h : adopted_blocks_)
      if (!on_majority.count(h)) ++report_.fork_count;
    for (std::size_t i = 0; i < node_specs_.size(); ++i)
      report_.availability[nodes_[i].name] =
          static_cast<double>(available_steps_[i]) / static_cast<double>(cfg_.steps);

    if (majority_.engaged) {
      const auto& m = std::get<MajorityAttack>(majority_.profile->variant);
      majority_.cost = attack_cost(majority_.steps_active, majority_.controlled.size(), m.power_rate_per_node_step);
      report_.attack_cost += majority_.cost;
      std::uint64_t altered = 0;
      for (std::size_t i = 0; i < majority_.snapshot_size; ++i)
        if (i >= majority->size() || hash_header(majority->at(i).header, majority->algo()) != majority_.snapshot[i])
          ++altered;
      report_.attacks["majority"] = {{"controlled_nodes", majority_.controlled.size()},
                                     {"fault_block_accepted", majority_.fault_accepted},
                                     {"rewrite_attempts", majority_.rewrite_attempts},
                                     {"rewrites_accepted", majority_.rewrites_accepted},
                                     {"rewrite_failure", majority_.rewrite_failure},
                                     {"existing_blocks_altered", altered},
                                     {"steps_active", majority_.steps_active},
                                     {"cost", majority_.cost}};
    }
    if (sybil_.engaged) {
      std::uint64_t registered = 0;
      auto ids = registered_voting_ids(*majority);
      for (const auto& f : sybil_.fakes) registered += ids.count(f.identity.id);
      report_.attacks["sybil"] = {{"fake_identities", sybil_.fakes.size()},
                                  {"registered_fakes", registered},
                                  {"registrations_refused", sybil_.registrations_refused},
                                  {"fault_block_accepted", sybil_.fault_accepted}};
    }
    if (eclipse_.active) {
      report_.attacks["eclipse"] = {{"victim", nodes_[eclipse_.victim].name},
                                    {"adversaries", eclipse_.adversaries.size()},
                                    {"forged_blocks_fed", eclipse_.forged_fed},
                                    {"victim_wasted_work", eclipse_.wasted_work},
                                    {"victim_honest_blocks_after_start", eclipse_.honest_after_start},
                                    {"victim_availability", report_.availability.at(nodes_[eclipse_.victim].name)},
                                    {"below_threshold", report_.availability.at(nodes_[eclipse_.victim].name) <
                                                            cfg_.availability_threshold}};
    }
    return SimOutcome{std::move(report_), *majority, keys_};
  }

  const ScenarioConfig& cfg_;
  std::uint64_t seed_;
  Rng mining_rng_;
  std::optional<IdentityKeys> issuer_;
  std::vector<std::pair<std::string, Role>> node_specs_;
  std::map<std::string, IdentityKeys> keys_;
  Chain genesis_chain_;
  std::vector<Node> nodes_;
  Topology topology_;
  std::vector<std::int64_t> skew_;
  std::deque<Proposal> queue_;
  std::set<std::pair<std::string, int>> payments_queued_;
  std::map<HashDigest, std::shared_ptr<const LedgerState>> states_;
  std::map<HashDigest, bool> validity_;
  std::map<HashDigest, std::optional<std::string>> endorse_;
  std::set<HashDigest> adopted_blocks_;
  std::set<std::pair<HashDigest, std::size_t>> breached_;
  std::map<std::size_t, std::uint64_t> available_steps_;
  VerifyCache cache_;
  MajorityState majority_;
  SybilState sybil_;
  EclipseState eclipse_;
  SimReport report_;
};

}  // namespace detail

/// Runs a scenario to completion. Pure in (scenario, seed).
inline SimOutcome run(const ScenarioConfig& scenario, std::optional<std::uint64_t> seed_override = std::nullopt) {
  detail::Simulation sim(scenario, seed_override.value_or(scenario.seed));
  return sim.run();
}

}  // namespace chainflow

#endif  // CHAINFLOW_SIMULATION_HPP
