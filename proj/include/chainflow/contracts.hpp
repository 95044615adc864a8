#ifndef CHAINFLOW_CONTRACTS_HPP
#define CHAINFLOW_CONTRACTS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainflow/error.hpp"
#include "chainflow/events.hpp"
#include "chainflow/identity.hpp"
#include "chainflow/ledger.hpp"
#include "chainflow/supply_chain.hpp"

namespace chainflow {

// ---------------------------------------------------------------------------
// Actions

struct PayAction {
  std::string from;
  std::string to;
  std::int64_t amount = 0;
  std::string order_number;
  Stage stage = Stage::ProducerReceipt;
  bool operator==(const PayAction&) const = default;
};
struct UpdateInventoryAction {
  std::string location;
  std::string sku;
  std::int64_t delta = 0;
  bool operator==(const UpdateInventoryAction&) const = default;
};
struct RaiseDisputeAction {
  std::string reason;
  bool operator==(const RaiseDisputeAction&) const = default;
};
struct AdvanceAction {
  Stage stage = Stage::ProducerReceipt;
  bool operator==(const AdvanceAction&) const = default;
};

using Action = std::variant<PayAction, UpdateInventoryAction, RaiseDisputeAction, AdvanceAction>;

// ---------------------------------------------------------------------------
// Ledger state: a materialised view obtained by folding the chain.

struct PaymentRecord {
  std::string from;
  std::string to;
  std::int64_t amount = 0;
  std::string order_number;
  Stage stage = Stage::ProducerReceipt;
  std::uint64_t block_index = 0;
  bool settled = false;  // matching Payment transaction seen on-chain
  bool operator==(const PaymentRecord&) const = default;
};

struct DisputeRecord {
  std::string order_number;
  Stage stage = Stage::ProducerReceipt;
  std::string reason;
  std::uint64_t block_index = 0;
  bool operator==(const DisputeRecord&) const = default;
};

struct Rejection {
  std::uint64_t block_index = 0;
  std::uint64_t tx_index = 0;
  std::string reason;
  bool operator==(const Rejection&) const = default;
};

struct DirectoryEntry {
  std::string name;
  Role role = Role::Node;
  bool operator==(const DirectoryEntry&) const = default;
};

struct LedgerState {
  ChainParams params;
  std::map<IdentityId, DirectoryEntry> directory;
  std::map<std::string, Order> orders;
  std::map<std::string, OrderProgress> progress;
  std::map<std::string, std::map<std::string, Value>> facts;  // per order: "<Stage>.<field>" -> value
  std::map<std::string, std::set<Stage>> confirmed;           // stages advanced by a contract
  std::map<std::string, ContractRule> contracts;
  std::map<std::string, std::map<std::string, std::int64_t>> inventory;  // location -> sku -> units
  std::map<std::string, std::int64_t> balances;
  std::vector<PaymentRecord> payments;
  std::vector<DisputeRecord> disputes;
  std::vector<Rejection> rejected;
  std::vector<std::string> rejected_actions;

  const DirectoryEntry* who(const IdentityId& id) const {
    auto it = directory.find(id);
    return it == directory.end() ? nullptr : &it->second;
  }

  const PaymentRecord* payment_for(const std::string& order, Stage stage) const {
    for (const auto& p : payments)
      if (p.order_number == order && p.stage == stage) return &p;
    return nullptr;
  }

  std::vector<PaymentRecord> unsettled_payments() const {
    std::vector<PaymentRecord> out;
    for (const auto& p : payments)
      if (!p.settled) out.push_back(p);
    return out;
  }

  bool operator==(const LedgerState&) const = default;
};

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline std::optional<Value> resolve(const Operand& op, const Event& event, const Order& order,
                                    const LedgerState& state) {
  switch (op.source) {
    case OperandSource::Literal: return op.literal;
    case OperandSource::Event: return event_field(event, op.name);
    case OperandSource::Order: return order_field(order, op.name);
    case OperandSource::State: {
      auto f = state.facts.find(order.order_number);
      if (f == state.facts.end()) return std::nullopt;
      auto it = f->second.find(op.name);
      if (it == f->second.end()) return std::nullopt;
      return it->second;
    }
  }
  return std::nullopt;
}

inline bool compare(const Value& a, CompareOp op, const Value& b) {
  if (a.index() != b.index()) return false;
  switch (op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return a != b;
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
  }
  return false;
}

}  // namespace detail

/// Pure. Empty result means the rule does not fire; a failed check yields a
/// single dispute and nothing else.
inline std::vector<Action> evaluate(const ContractRule& rule, const Event& event, const LedgerState& state) {
  if (kind_of(event) != rule.trigger) return {};
  auto order_number = order_number_of(event);
  if (!order_number || *order_number != rule.order_number) return {};
  auto order_it = state.orders.find(rule.order_number);
  if (order_it == state.orders.end()) return {};
  const Order& order = order_it->second;

  for (const auto& check : rule.checks) {
    auto lhs = detail::resolve(check.lhs, event, order, state);
    auto rhs = detail::resolve(check.rhs, event, order, state);
    if (!lhs || !rhs || !detail::compare(*lhs, check.op, *rhs)) return {RaiseDisputeAction{check.dispute_reason}};
  }

  std::vector<Action> out;
  auto as_string = [](const std::optional<Value>& v) -> std::optional<std::string> {
    if (v && std::holds_alternative<std::string>(*v)) return std::get<std::string>(*v);
    return std::nullopt;
  };
  auto as_int = [](const std::optional<Value>& v) -> std::optional<std::int64_t> {
    if (v && std::holds_alternative<std::int64_t>(*v)) return std::get<std::int64_t>(*v);
    return std::nullopt;
  };
  for (const auto& tmpl : rule.actions) {
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, PayTemplate>) {
            auto from = as_string(detail::resolve(t.from, event, order, state));
            auto to = as_string(detail::resolve(t.to, event, order, state));
            auto amount = as_int(detail::resolve(t.amount, event, order, state));
            if (from && to && amount && *amount > 0)
              out.emplace_back(PayAction{*from, *to, *amount, rule.order_number, t.stage});
          } else if constexpr (std::is_same_v<T, InventoryTemplate>) {
            auto loc = as_string(detail::resolve(t.location, event, order, state));
            auto sku = as_string(detail::resolve(t.sku, event, order, state));
            auto delta = as_int(detail::resolve(t.delta, event, order, state));
            if (loc && sku && delta) out.emplace_back(UpdateInventoryAction{*loc, *sku, *delta});
          } else if constexpr (std::is_same_v<T, DisputeTemplate>) {
            out.emplace_back(RaiseDisputeAction{t.reason});
          } else {
            out.emplace_back(AdvanceAction{t.stage});
          }
        },
        tmpl);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in rules

namespace detail {

inline void require_complete(const Order& o) {
  if (o.order_number.empty() || o.sku.empty() || o.spec.empty() || o.quantity == 0 || o.invoice_number.empty() ||
      o.supplier.empty() || o.producer.empty() || o.warehouse.empty() || o.retailer.empty())
    throw Error(ErrorCode::IncompleteOrder, "order '" + o.order_number + "' is missing required fields");
}

inline std::string fact(Stage s, std::string_view field) { return std::string(to_string(s)) + "." + std::string(field); }

}  // namespace detail

/// Producer receipt: quantity, quality and spec must match the order, then
/// the producer pays the supplier.
inline ContractRule builtin_receipt_check(const Order& order) {
  detail::require_complete(order);
  ContractRule r;
  r.id = "receipt-check/" + order.order_number;
  r.order_number = order.order_number;
  r.trigger = EventKind::ProducerReceipt;
  r.checks.push_back({Operand::event("received_quantity"), CompareOp::Eq, Operand::order("quantity"), "quantity mismatch"});
  if (order.quality_required)
    r.checks.push_back({Operand::event("quality_pass"), CompareOp::Eq, Operand::lit(true), "quality failure"});
  r.checks.push_back({Operand::event("spec_observed"), CompareOp::Eq, Operand::order("spec"), "spec mismatch"});
  r.actions.emplace_back(PayTemplate{Operand::order("producer"), Operand::order("supplier"),
                                     Operand::order("raw_material_price"), Stage::ProducerReceipt});
  r.actions.emplace_back(AdvanceTemplate{Stage::ProducerReceipt});
  return r;
}

/// Warehouse receipt: supplier, order, invoice and shipment must match and
/// quality/quantity hold; inventory is credited and the producer is paid.
inline ContractRule builtin_warehouse_match(const Order& order) {
  detail::require_complete(order);
  ContractRule r;
  r.id = "warehouse-match/" + order.order_number;
  r.order_number = order.order_number;
  r.trigger = EventKind::WarehouseReceipt;
  r.checks.push_back({Operand::event("supplier"), CompareOp::Eq, Operand::order("producer"), "supplier mismatch"});
  r.checks.push_back({Operand::event("invoice_number"), CompareOp::Eq, Operand::order("invoice_number"), "invoice mismatch"});
  r.checks.push_back({Operand::event("shipment_number"), CompareOp::Eq,
                      Operand::state(detail::fact(Stage::WarehouseShipment, "shipment_number")), "shipment mismatch"});
  r.checks.push_back({Operand::event("quantity"), CompareOp::Eq, Operand::order("quantity"), "quantity mismatch"});
  if (order.quality_required)
    r.checks.push_back({Operand::event("quality_pass"), CompareOp::Eq, Operand::lit(true), "quality failure"});
  r.actions.emplace_back(InventoryTemplate{Operand::order("warehouse"), Operand::order("sku"), Operand::order("quantity")});
  r.actions.emplace_back(PayTemplate{Operand::order("warehouse"), Operand::order("producer"),
                                     Operand::order("wholesale_price"), Stage::WarehouseReceipt});
  return r;
}

/// Retail receipt: received after it was shipped and for a named customer;
/// the retailer pays the warehouse and its stock is credited.
inline ContractRule builtin_retail_receipt(const Order& order) {
  detail::require_complete(order);
  ContractRule r;
  r.id = "retail-receipt/" + order.order_number;
  r.order_number = order.order_number;
  r.trigger = EventKind::RetailReceipt;
  r.checks.push_back({Operand::event("receive_date"), CompareOp::Ge,
                      Operand::state(detail::fact(Stage::RetailShipment, "shipment_date")), "receipt predates shipment"});
  r.checks.push_back({Operand::event("customer_id"), CompareOp::Ne, Operand::lit(std::string{}), "missing customer"});
  r.actions.emplace_back(PayTemplate{Operand::order("retailer"), Operand::order("warehouse"),
                                     Operand::order("retail_price"), Stage::RetailReceipt});
  r.actions.emplace_back(InventoryTemplate{Operand::order("retailer"), Operand::order("sku"), Operand::order("quantity")});
  return r;
}

inline std::vector<ContractRule> builtin_rules(const Order& order) {
  return {builtin_receipt_check(order), builtin_warehouse_match(order), builtin_retail_receipt(order)};
}

// ---------------------------------------------------------------------------
// Applying actions

struct ActionContext {
  std::string order_number;
  Stage stage = Stage::ProducerReceipt;
  std::uint64_t block_index = 0;
};

namespace detail {
inline void raise_dispute(LedgerState& s, const ActionContext& ctx, std::string reason) {
  s.disputes.push_back({ctx.order_number, ctx.stage, std::move(reason), ctx.block_index});
  s.progress[ctx.order_number].frozen = true;
}
}  // namespace detail

/// Pay is applied at most once per (order, stage); a repeat is recorded in
/// rejected_actions. Inventory may not go negative: such an update becomes a
/// dispute and leaves stock unchanged.
inline LedgerState apply_actions(LedgerState state, const std::vector<Action>& actions, const ActionContext& ctx) {
  for (const auto& action : actions) {
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, PayAction>) {
            if (a.amount <= 0) {
              state.rejected_actions.push_back("non-positive payment for " + a.order_number);
            } else if (state.payment_for(a.order_number, a.stage)) {
              state.rejected_actions.push_back("duplicate payment for " + a.order_number + "/" +
                                               std::string(to_string(a.stage)));
            } else {
              state.payments.push_back({a.from, a.to, a.amount, a.order_number, a.stage, ctx.block_index, false});
              state.balances[a.from] -= a.amount;
              state.balances[a.to] += a.amount;
            }
          } else if constexpr (std::is_same_v<T, UpdateInventoryAction>) {
            auto& level = state.inventory[a.location][a.sku];
            if (level + a.delta < 0) {
              if (level == 0) state.inventory[a.location].erase(a.sku);
              if (state.inventory[a.location].empty()) state.inventory.erase(a.location);
              detail::raise_dispute(state, ctx, "insufficient inventory");
            } else {
              level += a.delta;
            }
          } else if constexpr (std::is_same_v<T, RaiseDisputeAction>) {
            detail::raise_dispute(state, ctx, a.reason);
          } else {
            state.confirmed[ctx.order_number].insert(a.stage);
          }
        },
        action);
  }
  return state;
}

// ---------------------------------------------------------------------------
// Folding blocks into state

namespace detail {

inline void record_facts(LedgerState& s, const std::string& order, Stage stage, const Event& event) {
  auto& f = s.facts[order];
  static const char* const fields[] = {"certificate_of_origin", "batch_data",      "shipment_date",   "barcode",
                                       "received_quantity",     "quality_pass",    "spec_observed",   "production_number",
                                       "consumed_batch",        "shipment_number", "supplier",        "invoice_number",
                                       "quantity",              "product_received_data", "packaging_barcode",
                                       "product_barcode",       "receive_date",    "customer_id"};
  for (const char* name : fields)
    if (auto v = event_field(event, name)) f[fact(stage, name)] = *v;
}

/// Returns a rejection reason, or nullopt when the transaction applied.
inline std::optional<std::string> apply_transaction(LedgerState& s, const SignedTransaction& tx,
                                                    std::uint64_t block_index) {
  if (const auto* g = std::get_if<GenesisMarker>(&tx.event)) {
    if (block_index != 0) return "genesis marker outside genesis";
    s.params = ChainParams{g->algo, g->difficulty, g->registry_mode, g->vote_base, g->issuer_keys};
    return std::nullopt;
  }
  if (!transaction_signature_valid(tx, s.params.algo)) return "bad signature";

  if (const auto* e = std::get_if<Enrollment>(&tx.event)) {
    Identity ident{derive_identity_id(e->public_key, s.params.algo), e->public_key, e->role};
    if (ident.id != tx.author) return "enrollment not authored by enrollee";
    if (!enrollment_credential_valid(*e, s.params)) return "bad credential";
    if (s.directory.count(ident.id)) return "duplicate identity";
    for (const auto& [id, d] : s.directory)
      if (d.name == e->name) return "duplicate identity name";
    s.directory.emplace(ident.id, DirectoryEntry{e->name, e->role});
    return std::nullopt;
  }

  const auto* author = s.who(tx.author);
  if (!author) return "author not registered";

  if (const auto* o = std::get_if<OrderOpened>(&tx.event)) {
    try {
      require_complete(o->order);
    } catch (const Error& err) {
      return std::string(err.what());
    }
    if (s.orders.count(o->order.order_number)) return "duplicate order";
    s.orders.emplace(o->order.order_number, o->order);
    s.progress.emplace(o->order.order_number, OrderProgress{});
    return std::nullopt;
  }
  if (const auto* d = std::get_if<ContractDeployment>(&tx.event)) {
    if (s.contracts.count(d->rule.id)) return "DuplicateContract: " + d->rule.id;
    if (d->rule.deployed_in != block_index) return "deployment block index mismatch";
    s.contracts.emplace(d->rule.id, d->rule);
    return std::nullopt;
  }
  if (const auto* p = std::get_if<Payment>(&tx.event)) {
    if (author->name != p->from) return "payment not authored by payer";
    for (auto& rec : s.payments) {
      if (rec.order_number == p->order_number && rec.stage == p->stage && rec.from == p->from && rec.to == p->to &&
          rec.amount == static_cast<std::int64_t>(p->amount)) {
        if (rec.settled) return "payment already settled";
        rec.settled = true;
        return std::nullopt;
      }
    }
    return "payment does not match any contract obligation";
  }

  auto kind = kind_of(tx.event);
  auto stage = stage_of(kind);
  if (!stage) return "unsupported transaction";
  try {
    validate_event_schema(tx.event);
  } catch (const Error& err) {
    return std::string(err.what());
  }
  if (author->role != required_role(kind)) return "RoleMismatch";
  auto order_number = *order_number_of(tx.event);
  auto order_it = s.orders.find(order_number);
  if (order_it == s.orders.end()) return "unknown order " + order_number;
  if (responsible_party(order_it->second, *stage) != author->name) return "author is not the responsible party";
  try {
    require_next_stage(s.progress[order_number], kind);
  } catch (const Error& err) {
    return std::string(err.what());
  }
  s.progress[order_number].completed = *stage;
  record_facts(s, order_number, *stage, tx.event);

  ActionContext ctx{order_number, *stage, block_index};
  for (const auto& [id, rule] : s.contracts) {
    auto actions = evaluate(rule, tx.event, s);
    if (!actions.empty()) s = apply_actions(std::move(s), actions, ctx);
  }
  return std::nullopt;
}

}  // namespace detail

/// Applies every transaction of an accepted block in order. Invalid
/// transactions are skipped and listed in `rejected`; the block itself is
/// already part of the chain.
inline LedgerState apply_block(LedgerState state, const Block& block) {
  for (std::size_t t = 0; t < block.transactions.size(); ++t) {
    if (auto why = detail::apply_transaction(state, block.transactions[t], block.header.index))
      state.rejected.push_back({block.header.index, t, *why});
  }
  return state;
}

/// Whether an honest validator would endorse `block` on top of `state`.
inline std::optional<std::string> semantic_problem(const LedgerState& state, const Block& block) {
  auto before = state.rejected.size();
  auto after = apply_block(state, block);
  if (after.rejected.size() == before) return std::nullopt;
  return after.rejected[before].reason;
}

inline LedgerState fold_chain(const Chain& chain) {
  LedgerState state;
  for (const auto& b : chain.blocks()) state = apply_block(std::move(state), b);
  return state;
}

/// Canonical bytes of the state, for replay comparisons.
inline Bytes encode_state(const LedgerState& s) {
  ByteWriter w;
  auto value = [&](const Value& v) {
    w.u8(static_cast<std::uint8_t>(v.index()));
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, std::int64_t>) w.i64(x);
          else if constexpr (std::is_same_v<T, std::string>) w.str(x);
          else w.boolean(x);
        },
        v);
  };
  w.u8(static_cast<std::uint8_t>(s.params.algo)).u8(static_cast<std::uint8_t>(s.params.difficulty));
  w.u32(static_cast<std::uint32_t>(s.directory.size()));
  for (const auto& [id, d] : s.directory) w.fixed(id.bytes()).str(d.name).u8(static_cast<std::uint8_t>(d.role));
  w.u32(static_cast<std::uint32_t>(s.orders.size()));
  for (const auto& [num, o] : s.orders) detail::encode_order(w, o);
  w.u32(static_cast<std::uint32_t>(s.progress.size()));
  for (const auto& [num, p] : s.progress) {
    w.str(num).boolean(p.completed.has_value());
    if (p.completed) w.u8(static_cast<std::uint8_t>(*p.completed));
    w.boolean(p.frozen);
  }
  w.u32(static_cast<std::uint32_t>(s.facts.size()));
  for (const auto& [num, f] : s.facts) {
    w.str(num).u32(static_cast<std::uint32_t>(f.size()));
    for (const auto& [k, v] : f) {
      w.str(k);
      value(v);
    }
  }
  w.u32(static_cast<std::uint32_t>(s.confirmed.size()));
  for (const auto& [num, stages] : s.confirmed) {
    w.str(num).u32(static_cast<std::uint32_t>(stages.size()));
    for (auto st : stages) w.u8(static_cast<std::uint8_t>(st));
  }
  w.u32(static_cast<std::uint32_t>(s.contracts.size()));
  for (const auto& [id, rule] : s.contracts) detail::encode_rule(w, rule);
  w.u32(static_cast<std::uint32_t>(s.inventory.size()));
  for (const auto& [loc, skus] : s.inventory) {
    w.str(loc).u32(static_cast<std::uint32_t>(skus.size()));
    for (const auto& [sku, n] : skus) w.str(sku).i64(n);
  }
  w.u32(static_cast<std::uint32_t>(s.balances.size()));
  for (const auto& [who, n] : s.balances) w.str(who).i64(n);
  w.u32(static_cast<std::uint32_t>(s.payments.size()));
  for (const auto& p : s.payments)
    w.str(p.from).str(p.to).i64(p.amount).str(p.order_number).u8(static_cast<std::uint8_t>(p.stage)).u64(p.block_index).boolean(p.settled);
  w.u32(static_cast<std::uint32_t>(s.disputes.size()));
  for (const auto& d : s.disputes)
    w.str(d.order_number).u8(static_cast<std::uint8_t>(d.stage)).str(d.reason).u64(d.block_index);
  w.u32(static_cast<std::uint32_t>(s.rejected.size()));
  for (const auto& r : s.rejected) w.u64(r.block_index).u64(r.tx_index).str(r.reason);
  w.u32(static_cast<std::uint32_t>(s.rejected_actions.size()));
  for (const auto& r : s.rejected_actions) w.str(r);
  return std::move(w).bytes();
}

// ---------------------------------------------------------------------------
// Deployment

inline SignedTransaction deployment_transaction(ContractRule rule, std::uint64_t block_index,
                                                const IdentityKeys& author) {
  rule.deployed_in = block_index;
  return sign_transaction(ContractDeployment{std::move(rule)}, std::nullopt, author);
}

/// Appends a block carrying the deployment. `commit(chain, txs)` is
/// responsible for mining, collecting votes and appending; it returns the
/// extended chain.
template <typename Commit>
Chain deploy(const Chain& chain, ContractRule rule, const IdentityKeys& author, Commit&& commit) {
  auto state = fold_chain(chain);
  if (!state.who(author.identity.id))
    throw Error(ErrorCode::BadCredential, "deploying identity is not registered");
  if (state.contracts.count(rule.id)) throw Error(ErrorCode::DuplicateContract, "contract '" + rule.id + "' exists");
  std::vector<SignedTransaction> txs{deployment_transaction(std::move(rule), chain.size(), author)};
  return commit(chain, std::move(txs));
}

// ---------------------------------------------------------------------------
// Declarative rules from JSON

namespace detail {

inline Operand operand_from_json(const nlohmann::json& j) {
  if (j.is_object() && j.contains("event")) return Operand::event(j.at("event").get<std::string>());
  if (j.is_object() && j.contains("order")) return Operand::order(j.at("order").get<std::string>());
  if (j.is_object() && j.contains("state")) return Operand::state(j.at("state").get<std::string>());
  if (j.is_string()) return Operand::lit(j.get<std::string>());
  if (j.is_boolean()) return Operand::lit(j.get<bool>());
  if (j.is_number_integer()) return Operand::lit(j.get<std::int64_t>());
  throw Error(ErrorCode::SchemaViolation, "operand must be a literal or {event|order|state: name}");
}

inline CompareOp compare_op_from_string(const std::string& s) {
  static const std::pair<const char*, CompareOp> ops[] = {{"==", CompareOp::Eq}, {"!=", CompareOp::Ne},
                                                          {"<", CompareOp::Lt},  {"<=", CompareOp::Le},
                                                          {">", CompareOp::Gt},  {">=", CompareOp::Ge}};
  for (const auto& [name, op] : ops)
    if (s == name) return op;
  throw Error(ErrorCode::SchemaViolation, "unknown comparison operator '" + s + "'");
}

inline void check_operand_field(const Operand& op, EventKind trigger) {
  static const Order probe_order{};
  if (op.source == OperandSource::Order && !order_field(probe_order, op.name))
    throw Error(ErrorCode::SchemaViolation, "unknown order field '" + op.name + "'");
  if (op.source == OperandSource::Event) {
    // Instantiate a default event of the trigger kind to probe its fields.
    Event probe = [&]() -> Event {
      switch (trigger) {
        case EventKind::RawMaterialShipment: return RawMaterialShipment{};
        case EventKind::ProducerReceipt: return ProducerReceipt{};
        case EventKind::ProductionRecord: return ProductionRecord{};
        case EventKind::WarehouseShipment: return WarehouseShipment{};
        case EventKind::WarehouseReceipt: return WarehouseReceipt{};
        case EventKind::RetailShipment: return RetailShipment{};
        case EventKind::RetailReceipt: return RetailReceipt{};
        default: return Payment{};
      }
    }();
    if (!event_field(probe, op.name))
      throw Error(ErrorCode::SchemaViolation, "event " + std::string(to_string(trigger)) + " has no field '" + op.name + "'");
  }
}

}  // namespace detail

/// {"id", "order_number", "trigger", "all": [{"lhs","op","rhs","dispute"}],
///  "actions": [{"pay": {...}} | {"inventory": {...}} | {"dispute": "..."} | {"advance": "Stage"}]}
inline ContractRule rule_from_json(const nlohmann::json& j) {
  using detail::req_string;
  ContractRule r;
  r.id = req_string(j, "id");
  r.order_number = req_string(j, "order_number");
  auto trig = parse_event_kind(req_string(j, "trigger"));
  if (!trig || !stage_of(*trig)) throw Error(ErrorCode::SchemaViolation, "rule trigger must be a stage event kind");
  r.trigger = *trig;
  for (const auto& c : j.value("all", nlohmann::json::array())) {
    Check check{detail::operand_from_json(detail::require(c, "lhs")), detail::compare_op_from_string(req_string(c, "op")),
                detail::operand_from_json(detail::require(c, "rhs")), req_string(c, "dispute")};
    detail::check_operand_field(check.lhs, r.trigger);
    detail::check_operand_field(check.rhs, r.trigger);
    r.checks.push_back(std::move(check));
  }
  for (const auto& a : j.value("actions", nlohmann::json::array())) {
    if (a.contains("pay")) {
      const auto& p = a.at("pay");
      auto stage = parse_stage(req_string(p, "stage"));
      if (!stage) throw Error(ErrorCode::SchemaViolation, "unknown stage in pay action");
      r.actions.emplace_back(PayTemplate{detail::operand_from_json(detail::require(p, "from")),
                                         detail::operand_from_json(detail::require(p, "to")),
                                         detail::operand_from_json(detail::require(p, "amount")), *stage});
    } else if (a.contains("inventory")) {
      const auto& p = a.at("inventory");
      r.actions.emplace_back(InventoryTemplate{detail::operand_from_json(detail::require(p, "location")),
                                               detail::operand_from_json(detail::require(p, "sku")),
                                               detail::operand_from_json(detail::require(p, "delta"))});
    } else if (a.contains("dispute")) {
      r.actions.emplace_back(DisputeTemplate{a.at("dispute").get<std::string>()});
    } else if (a.contains("advance")) {
      auto stage = parse_stage(a.at("advance").get<std::string>());
      if (!stage) throw Error(ErrorCode::SchemaViolation, "unknown stage in advance action");
      r.actions.emplace_back(AdvanceTemplate{*stage});
    } else {
      throw Error(ErrorCode::SchemaViolation, "action must be one of pay, inventory, dispute, advance");
    }
  }
  return r;
}

inline nlohmann::json action_to_json(const Action& action) {
  return std::visit(
      [](const auto& a) -> nlohmann::json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PayAction>)
          return {{"pay", {{"from", a.from}, {"to", a.to}, {"amount", a.amount}, {"order_number", a.order_number},
                           {"stage", std::string(to_string(a.stage))}}}};
        else if constexpr (std::is_same_v<T, UpdateInventoryAction>)
          return {{"inventory", {{"location", a.location}, {"sku", a.sku}, {"delta", a.delta}}}};
        else if constexpr (std::is_same_v<T, RaiseDisputeAction>)
          return {{"dispute", a.reason}};
        else
          return {{"advance", std::string(to_string(a.stage))}};
      },
      action);
}

}  // namespace chainflow

#endif  // CHAINFLOW_CONTRACTS_HPP
