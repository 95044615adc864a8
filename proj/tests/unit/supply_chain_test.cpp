#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace chainflow;
using testing::TestNet;

namespace {

bool has_code(const std::function<void()>& f, ErrorCode code) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

/// A network with the four supply actors, one or more opened orders and the
/// built-in contracts deployed.
struct Flow {
  TestNet net{2, 2, HashAlgo::Sha256, testing::supply_actors()};
  std::vector<Order> orders;

  explicit Flow(std::vector<Order> os = {testing::sample_order()}) : orders(std::move(os)) {
    std::vector<SignedTransaction> txs;
    for (const auto& o : orders) {
      txs.push_back(sign_transaction(OrderOpened{o}, std::nullopt, net.actor("producer")));
      for (auto& rule : builtin_rules(o)) txs.push_back(deployment_transaction(rule, net.chain.size(), net.actor("producer")));
    }
    net.commit_block(std::move(txs));
  }

  std::optional<SealedPayload> seal_for_producer(const std::string& note) const {
    return seal(to_bytes(note), net.actor("producer").identity, to_bytes("entropy"));
  }

  void emit(const ScheduledEvent& e) {
    std::optional<SealedPayload> sealed;
    if (e.seal_for) sealed = seal(to_bytes(e.sealed_note), net.actor(*e.seal_for).identity, to_bytes("entropy"));
    net.commit_block({build_event(net.actor(e.actor), e.event, sealed)});
  }

  void emit_raw(const std::string& actor, Event event) {
    net.commit_block({sign_transaction(std::move(event), std::nullopt, net.actor(actor))});
  }

  LedgerState state() const { return fold_chain(net.chain); }
};

std::vector<EventKind> stage_kinds() {
  std::vector<EventKind> out;
  for (std::uint8_t s = 0; s < stage_count; ++s) out.push_back(kind_of(static_cast<Stage>(s)));
  return out;
}

}  // namespace

TEST_CASE("stage machine admits exactly the next stage", "[supply_chain]") {
  OrderProgress p;
  for (std::uint8_t s = 0; s < stage_count; ++s) {
    auto next = stage_machine(p);
    REQUIRE(next.size() == 1);
    CHECK(next[0] == kind_of(static_cast<Stage>(s)));
    for (auto k : stage_kinds())
      if (k != next[0]) CHECK(has_code([&] { require_next_stage(p, k); }, ErrorCode::OutOfOrderEvent));
    p.completed = static_cast<Stage>(s);
  }
  CHECK(p.finished());
  CHECK(stage_machine(p).empty());
  OrderProgress frozen{Stage::ProducerReceipt, true};
  CHECK(stage_machine(frozen).empty());
  CHECK(has_code([&] { require_next_stage(frozen, EventKind::ProductionRecord); }, ErrorCode::OutOfOrderEvent));
}

TEST_CASE("build_event enforces roles and schema", "[supply_chain]") {
  auto supplier = generate_identity(Role::Supplier, 1);
  auto producer = generate_identity(Role::Producer, 2);
  auto customer = generate_identity(Role::Customer, 3);
  CHECK(has_code([&] { build_event(supplier, ProducerReceipt{"PO", 1, true, "x"}); }, ErrorCode::RoleMismatch));
  CHECK(has_code([&] { build_event(supplier, Payment{"a", "b", 1, "PO", Stage::ProducerReceipt}); }, ErrorCode::RoleMismatch));
  CHECK(has_code([&] { build_event(customer, RetailReceipt{"PO", 1, "c"}); }, ErrorCode::RoleMismatch));
  CHECK(has_code([&] { build_event(supplier, RawMaterialShipment{"COO", "B", "PO", 1, ""}); }, ErrorCode::SchemaViolation));
  CHECK(has_code([&] { build_event(producer, Payment{"a", "b", 0, "PO", Stage::ProducerReceipt}); }, ErrorCode::SchemaViolation));
  CHECK(has_code([&] { build_event(producer, OrderOpened{}); }, ErrorCode::SchemaViolation));
  auto tx = build_event(supplier, RawMaterialShipment{"COO", "B", "PO", 1, "RAW"});
  CHECK(transaction_signature_valid(tx));

  nlohmann::json j{{"kind", "WarehouseShipment"}, {"order_number", "PO"}, {"shipment_number", "S"}, {"barcode", "P"}};
  CHECK(std::get<WarehouseShipment>(build_event(producer, j).event).shipment_number == "S");
  CHECK(has_code([&] { build_event(producer, nlohmann::json{{"kind", "Teleport"}}); }, ErrorCode::SchemaViolation));
}

TEST_CASE("happy path yields one payment per receipt boundary", "[supply_chain][contracts]") {
  Flow flow;
  const auto& o = flow.orders[0];
  for (const auto& e : happy_path(o, 100)) flow.emit(e);
  auto s = flow.state();

  CHECK(s.rejected.empty());
  CHECK(s.disputes.empty());
  CHECK(s.progress.at(o.order_number).finished());
  REQUIRE(s.payments.size() == 3);
  std::map<Stage, int> per_stage;
  for (const auto& p : s.payments) ++per_stage[p.stage];
  CHECK(per_stage == std::map<Stage, int>{{Stage::ProducerReceipt, 1}, {Stage::WarehouseReceipt, 1}, {Stage::RetailReceipt, 1}});
  CHECK(s.payment_for(o.order_number, Stage::ProducerReceipt)->to == "supplier");
  CHECK(s.payment_for(o.order_number, Stage::WarehouseReceipt)->amount == 1200);
  CHECK(s.balances.at("supplier") == 500);
  CHECK(s.balances.at("producer") == 700);
  CHECK(s.balances.at("warehouse") == 800);
  CHECK(s.balances.at("retailer") == -2000);
  CHECK(s.inventory.at("warehouse").at("WIDGET") == 100);
  CHECK(s.inventory.at("retailer").at("WIDGET") == 100);
  CHECK(s.confirmed.at(o.order_number) == std::set<Stage>{Stage::ProducerReceipt});
  CHECK(s.unsettled_payments().size() == 3);

  SECTION("payments settle once") {
    for (const auto& p : s.unsettled_payments())
      flow.emit_raw(p.from, Payment{p.from, p.to, static_cast<std::uint64_t>(p.amount), p.order_number, p.stage});
    auto settled = flow.state();
    CHECK(settled.unsettled_payments().empty());
    CHECK(settled.rejected.empty());
    const auto& first = s.payments[0];
    flow.emit_raw(first.from, Payment{first.from, first.to, static_cast<std::uint64_t>(first.amount), first.order_number, first.stage});
    auto again = flow.state();
    REQUIRE(again.rejected.size() == 1);
    CHECK(again.rejected[0].reason == "payment already settled");
  }
  SECTION("payments must match an obligation and be made by the payer") {
    flow.emit_raw("producer", Payment{"producer", "supplier", 499, o.order_number, Stage::ProducerReceipt});
    flow.emit_raw("warehouse", Payment{"producer", "supplier", 500, o.order_number, Stage::ProducerReceipt});
    auto st = flow.state();
    REQUIRE(st.rejected.size() == 2);
    CHECK(st.rejected[0].reason == "payment does not match any contract obligation");
    CHECK(st.rejected[1].reason == "payment not authored by payer");
  }
}

TEST_CASE("quantity mismatch raises a dispute and freezes the order", "[supply_chain][contracts]") {
  Flow flow;
  auto events = happy_path(flow.orders[0], 100);
  std::get<ProducerReceipt>(events[1].event).received_quantity = 90;
  for (const auto& e : events) flow.emit(e);
  auto s = flow.state();
  REQUIRE(s.disputes.size() == 1);
  CHECK(s.disputes[0].reason == "quantity mismatch");
  CHECK(s.disputes[0].stage == Stage::ProducerReceipt);
  CHECK(s.progress.at("PO-7").frozen);
  CHECK(s.payments.empty());
  CHECK(s.payment_for("PO-7", Stage::ProducerReceipt) == nullptr);
  CHECK(s.rejected.size() == 5);
  for (const auto& r : s.rejected) CHECK(r.reason.find("frozen") != std::string::npos);
}

TEST_CASE("ledger rejects out-of-order, wrong-role and wrong-party events", "[supply_chain]") {
  Flow flow;
  const auto& o = flow.orders[0];
  flow.emit_raw("producer", ProductionRecord{o.order_number, "PRD", "PROD", "RAW"});
  flow.emit_raw("retailer", RawMaterialShipment{"C", "B", o.order_number, 1, "RAW"});
  flow.emit_raw("supplier", RawMaterialShipment{"C", "B", "PO-unknown", 1, "RAW"});
  auto s = flow.state();
  REQUIRE(s.rejected.size() == 3);
  CHECK(s.rejected[0].reason.find("OutOfOrderEvent") != std::string::npos);
  CHECK(s.rejected[1].reason == "RoleMismatch");
  CHECK(s.rejected[2].reason.find("unknown order") != std::string::npos);
  CHECK_FALSE(s.progress.at(o.order_number).completed);
}

TEST_CASE("trace returns exactly the events of the traced order", "[supply_chain][trace]") {
  std::vector<Order> orders;
  for (int i = 0; i < 3; ++i) orders.push_back(testing::sample_order("PO-" + std::to_string(i)));
  Flow flow(orders);
  // Interleave the three orders stage by stage.
  std::vector<std::vector<ScheduledEvent>> paths;
  for (const auto& o : orders) paths.push_back(happy_path(o, 10));
  for (std::size_t stage = 0; stage < stage_count; ++stage)
    for (const auto& p : paths) flow.emit(p[stage]);
  REQUIRE(flow.state().rejected.empty());

  for (const auto& o : orders) {
    auto trail = trace(flow.net.chain, "PKG-" + o.order_number);
    REQUIRE(trail.entries.size() == stage_count);
    CHECK(trail.kinds() == stage_kinds());
    for (std::size_t i = 1; i < trail.entries.size(); ++i)
      CHECK(trail.entries[i - 1].block_index < trail.entries[i].block_index);
    for (const auto& e : trail.entries) CHECK(order_number_of(e.tx.event) == o.order_number);

    auto product = trace(flow.net.chain, "PROD-" + o.order_number);
    CHECK(product.kinds() == std::vector<EventKind>{EventKind::RawMaterialShipment, EventKind::ProducerReceipt,
                                                    EventKind::ProductionRecord, EventKind::WarehouseShipment,
                                                    EventKind::WarehouseReceipt});
    CHECK(trace(flow.net.chain, "RAW-" + o.order_number).kinds() ==
          std::vector<EventKind>{EventKind::RawMaterialShipment, EventKind::ProducerReceipt});
  }
  CHECK(trace(flow.net.chain, "PKG-nothing").entries.empty());
  CHECK(trace(flow.net.chain, "").entries.empty());
}

TEST_CASE("sealed notes are visible only with the recipient key", "[supply_chain][trace]") {
  Flow flow;
  for (const auto& e : happy_path(flow.orders[0], 1)) flow.emit(e);
  auto trail = trace(flow.net.chain, "PKG-PO-7");
  auto redacted = trail_to_json(trail);
  CHECK(redacted["trail"][0]["sealed"]["redacted"] == true);
  CHECK_FALSE(redacted["trail"][0]["sealed"].contains("plaintext"));
  auto opened = trail_to_json(trail, &flow.net.actor("producer").private_key);
  CHECK(opened["trail"][0]["sealed"]["plaintext"] == "unit cost 500");
  auto outsider = trail_to_json(trail, &flow.net.actor("retailer").private_key);
  CHECK(outsider["trail"][0]["sealed"]["redacted"] == true);
  CHECK(redacted.dump().find("unit cost") == std::string::npos);
}

TEST_CASE("evaluate is pure and scoped to its trigger and order", "[contracts]") {
  Flow flow;
  auto s = flow.state();
  const auto& rule = s.contracts.at("receipt-check/PO-7");
  Event good = ProducerReceipt{"PO-7", 100, true, "grade-A"};
  auto a1 = evaluate(rule, good, s);
  auto a2 = evaluate(rule, good, s);
  CHECK(a1 == a2);
  REQUIRE(a1.size() == 2);
  CHECK(std::get<PayAction>(a1[0]) == PayAction{"producer", "supplier", 500, "PO-7", Stage::ProducerReceipt});
  CHECK(evaluate(rule, Event{ProducerReceipt{"PO-other", 100, true, "grade-A"}}, s).empty());
  CHECK(evaluate(rule, Event{ProductionRecord{"PO-7", "P", "B", "R"}}, s).empty());

  auto failing = [&](Event e) {
    auto a = evaluate(rule, e, s);
    REQUIRE(a.size() == 1);
    return std::get<RaiseDisputeAction>(a[0]).reason;
  };
  CHECK(failing(ProducerReceipt{"PO-7", 90, true, "grade-A"}) == "quantity mismatch");
  CHECK(failing(ProducerReceipt{"PO-7", 100, false, "grade-A"}) == "quality failure");
  CHECK(failing(ProducerReceipt{"PO-7", 100, true, "grade-B"}) == "spec mismatch");
}

TEST_CASE("built-in rules refuse incomplete orders", "[contracts]") {
  auto o = testing::sample_order();
  o.warehouse.clear();
  CHECK(has_code([&] { builtin_receipt_check(o); }, ErrorCode::IncompleteOrder));
  CHECK(has_code([&] { builtin_rules(o); }, ErrorCode::IncompleteOrder));
}

TEST_CASE("payments apply at most once per order and stage", "[contracts]") {
  LedgerState s;
  ActionContext ctx{"PO", Stage::ProducerReceipt, 4};
  PayAction pay{"p", "s", 10, "PO", Stage::ProducerReceipt};
  s = apply_actions(s, {pay, pay}, ctx);
  s = apply_actions(s, {pay}, ctx);
  CHECK(s.payments.size() == 1);
  CHECK(s.rejected_actions.size() == 2);
  CHECK(s.balances.at("s") == 10);
  s = apply_actions(s, {PayAction{"p", "s", 0, "PO", Stage::RetailReceipt}}, ctx);
  CHECK(s.payments.size() == 1);
}

TEST_CASE("inventory never goes negative", "[contracts]") {
  LedgerState s;
  ActionContext ctx{"PO", Stage::WarehouseReceipt, 2};
  s = apply_actions(s, {UpdateInventoryAction{"wh", "SKU", 5}}, ctx);
  s = apply_actions(s, {UpdateInventoryAction{"wh", "SKU", -6}}, ctx);
  CHECK(s.inventory.at("wh").at("SKU") == 5);
  REQUIRE(s.disputes.size() == 1);
  CHECK(s.disputes[0].reason == "insufficient inventory");
  CHECK(s.progress.at("PO").frozen);
  s = apply_actions(s, {UpdateInventoryAction{"wh", "SKU", -5}}, ctx);
  CHECK(s.inventory.at("wh").at("SKU") == 0);

  LedgerState fresh;
  fresh = apply_actions(fresh, {UpdateInventoryAction{"x", "Y", -1}}, ctx);
  CHECK(fresh.inventory.empty());
}

TEST_CASE("deploy appends once and refuses duplicates and strangers", "[contracts]") {
  Flow flow;
  auto commit = [&](const Chain& c, std::vector<SignedTransaction> txs) { return flow.net.commit(c, std::move(txs)); };
  auto rule = builtin_receipt_check(testing::sample_order());
  rule.id = "extra-check";
  auto before = flow.net.chain.size();
  auto chain = deploy(flow.net.chain, rule, flow.net.actor("producer"), commit);
  CHECK(chain.size() == before + 1);
  CHECK(fold_chain(chain).contracts.count("extra-check") == 1);
  CHECK(has_code([&] { deploy(chain, rule, flow.net.actor("producer"), commit); }, ErrorCode::DuplicateContract));
  rule.id = "other";
  CHECK(has_code([&] { deploy(chain, rule, generate_identity(Role::Producer, 4242), commit); }, ErrorCode::BadCredential));

  // A deployment smuggled in with the wrong block index is ignored by the fold.
  auto stale = deployment_transaction(rule, 1, flow.net.actor("producer"));
  flow.net.commit_block({stale});
  CHECK(fold_chain(flow.net.chain).contracts.count("other") == 0);
}

TEST_CASE("declarative rules parse from JSON and fire", "[contracts]") {
  nlohmann::json j = {
      {"id", "bonus"},
      {"order_number", "PO-7"},
      {"trigger", "WarehouseShipment"},
      {"all", {{{"lhs", {{"event", "barcode"}}}, {"op", "=="}, {"rhs", {{"state", "ProductionRecord.barcode"}}},
                {"dispute", "wrong goods"}}}},
      {"actions", {{{"pay", {{"from", {{"order", "warehouse"}}}, {"to", {{"order", "producer"}}}, {"amount", 25},
                             {"stage", "WarehouseShipment"}}}},
                   {{"advance", "WarehouseShipment"}}}}};
  auto rule = rule_from_json(j);
  CHECK(rule.trigger == EventKind::WarehouseShipment);
  CHECK(rule.checks.size() == 1);
  CHECK(rule.actions.size() == 2);

  Flow flow;
  flow.net.commit_block({deployment_transaction(rule, flow.net.chain.size(), flow.net.actor("producer"))});
  for (const auto& e : happy_path(flow.orders[0], 1)) flow.emit(e);
  auto s = flow.state();
  REQUIRE(s.payment_for("PO-7", Stage::WarehouseShipment));
  CHECK(s.payment_for("PO-7", Stage::WarehouseShipment)->amount == 25);
  CHECK(s.confirmed.at("PO-7").count(Stage::WarehouseShipment) == 1);
  CHECK(action_to_json(PayAction{"a", "b", 3, "PO", Stage::RetailReceipt})["pay"]["stage"] == "RetailReceipt");

  auto bad = j;
  bad["all"][0]["op"] = "~=";
  CHECK(has_code([&] { rule_from_json(bad); }, ErrorCode::SchemaViolation));
  bad = j;
  bad["trigger"] = "Payment";
  CHECK(has_code([&] { rule_from_json(bad); }, ErrorCode::SchemaViolation));
  bad = j;
  bad["all"][0]["lhs"] = {{"event", "no_such_field"}};
  CHECK(has_code([&] { rule_from_json(bad); }, ErrorCode::SchemaViolation));
  bad = j;
  bad["actions"][0] = {{"explode", true}};
  CHECK(has_code([&] { rule_from_json(bad); }, ErrorCode::SchemaViolation));
}

TEST_CASE("folding is deterministic and incremental", "[contracts]") {
  Flow flow;
  for (const auto& e : happy_path(flow.orders[0], 3)) flow.emit(e);
  auto full = fold_chain(flow.net.chain);
  CHECK(encode_state(full) == encode_state(fold_chain(flow.net.chain)));
  auto blocks = flow.net.chain.blocks();
  auto last = blocks.back();
  blocks.pop_back();
  auto prefix = fold_chain(Chain::from_blocks(blocks));
  CHECK(encode_state(apply_block(prefix, last)) == encode_state(full));
  CHECK_FALSE(semantic_problem(prefix, last));

  auto duplicate = last;
  CHECK(semantic_problem(full, duplicate).has_value());
}
