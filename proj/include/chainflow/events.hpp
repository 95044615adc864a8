#ifndef CHAINFLOW_EVENTS_HPP
#define CHAINFLOW_EVENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainflow/bytes.hpp"
#include "chainflow/error.hpp"
#include "chainflow/hash.hpp"
#include "chainflow/identity.hpp"

namespace chainflow {

// Supply-chain stages in the order a single product lineage traverses them.
enum class Stage : std::uint8_t {
  RawMaterialShipment = 0,
  ProducerReceipt,
  ProductionRecord,
  WarehouseShipment,
  WarehouseReceipt,
  RetailShipment,
  RetailReceipt,
};

inline constexpr std::size_t stage_count = 7;

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::RawMaterialShipment: return "RawMaterialShipment";
    case Stage::ProducerReceipt: return "ProducerReceipt";
    case Stage::ProductionRecord: return "ProductionRecord";
    case Stage::WarehouseShipment: return "WarehouseShipment";
    case Stage::WarehouseReceipt: return "WarehouseReceipt";
    case Stage::RetailShipment: return "RetailShipment";
    case Stage::RetailReceipt: return "RetailReceipt";
  }
  return "Unknown";
}

inline Stage stage_from_byte(std::uint8_t b) {
  if (b >= stage_count) throw Error(ErrorCode::Malformed, "unknown stage tag");
  return static_cast<Stage>(b);
}

inline std::optional<Stage> parse_stage(std::string_view s) {
  for (std::uint8_t i = 0; i < stage_count; ++i)
    if (to_string(static_cast<Stage>(i)) == s) return static_cast<Stage>(i);
  return std::nullopt;
}

enum class VoteBase : std::uint8_t { RegisteredOnly = 0, AllObserved = 1 };

inline std::string_view to_string(VoteBase b) {
  return b == VoteBase::RegisteredOnly ? "registered_only" : "all_observed";
}

inline VoteBase vote_base_from_byte(std::uint8_t b) {
  if (b > 1) throw Error(ErrorCode::Malformed, "unknown vote base tag");
  return static_cast<VoteBase>(b);
}

// ---------------------------------------------------------------------------
// Orders

/// One purchase order followed through all seven stages. It names every
/// party on the route and the price paid at each receipt boundary.
struct Order {
  std::string order_number;
  std::string sku;
  std::string spec;
  std::uint64_t quantity = 0;
  bool quality_required = true;
  std::string invoice_number;
  std::string supplier;
  std::string producer;
  std::string warehouse;
  std::string retailer;
  std::uint64_t raw_material_price = 0;
  std::uint64_t wholesale_price = 0;
  std::uint64_t retail_price = 0;

  const std::string& buyer() const { return producer; }
  const std::string& seller() const { return supplier; }
  std::uint64_t price() const { return raw_material_price; }

  bool operator==(const Order&) const = default;
};

// ---------------------------------------------------------------------------
// Declarative contract rules. Rules are data so they can be stored on-chain
// and hashed like any other payload.

using Value = std::variant<std::int64_t, std::string, bool>;

enum class OperandSource : std::uint8_t { Literal = 0, Event, Order, State };

struct Operand {
  OperandSource source = OperandSource::Literal;
  std::string name;  // field name when not a literal
  Value literal = std::int64_t{0};

  static Operand lit(Value v) { return Operand{OperandSource::Literal, {}, std::move(v)}; }
  static Operand event(std::string n) { return Operand{OperandSource::Event, std::move(n), std::int64_t{0}}; }
  static Operand order(std::string n) { return Operand{OperandSource::Order, std::move(n), std::int64_t{0}}; }
  static Operand state(std::string n) { return Operand{OperandSource::State, std::move(n), std::int64_t{0}}; }

  bool operator==(const Operand&) const = default;
};

enum class CompareOp : std::uint8_t { Eq = 0, Ne, Lt, Le, Gt, Ge };

struct Check {
  Operand lhs;
  CompareOp op = CompareOp::Eq;
  Operand rhs;
  std::string dispute_reason;

  bool operator==(const Check&) const = default;
};

struct PayTemplate {
  Operand from;
  Operand to;
  Operand amount;
  Stage stage = Stage::ProducerReceipt;
  bool operator==(const PayTemplate&) const = default;
};
struct InventoryTemplate {
  Operand location;
  Operand sku;
  Operand delta;
  bool operator==(const InventoryTemplate&) const = default;
};
struct DisputeTemplate {
  std::string reason;
  bool operator==(const DisputeTemplate&) const = default;
};
struct AdvanceTemplate {
  Stage stage = Stage::ProducerReceipt;
  bool operator==(const AdvanceTemplate&) const = default;
};

using ActionTemplate = std::variant<PayTemplate, InventoryTemplate, DisputeTemplate, AdvanceTemplate>;

// ---------------------------------------------------------------------------
// Events

struct GenesisMarker {
  std::string label;
  HashAlgo algo = HashAlgo::Sha256;
  std::uint8_t difficulty = 0;
  RegistryMode registry_mode = RegistryMode::Centralized;
  VoteBase vote_base = VoteBase::RegisteredOnly;
  std::vector<PublicKey> issuer_keys;
  bool operator==(const GenesisMarker&) const = default;
};

struct Enrollment {
  std::string name;
  PublicKey public_key;
  Role role = Role::Node;
  Credential credential;
  bool operator==(const Enrollment&) const = default;
};

struct OrderOpened {
  Order order;
  bool operator==(const OrderOpened&) const = default;
};

enum class EventKind : std::uint8_t {
  GenesisMarker = 0,
  Enrollment,
  OrderOpened,
  ContractDeployment,
  RawMaterialShipment,
  ProducerReceipt,
  ProductionRecord,
  WarehouseShipment,
  WarehouseReceipt,
  RetailShipment,
  RetailReceipt,
  Payment,
};

inline constexpr std::uint8_t event_kind_count = 12;

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::GenesisMarker: return "GenesisMarker";
    case EventKind::Enrollment: return "Enrollment";
    case EventKind::OrderOpened: return "OrderOpened";
    case EventKind::ContractDeployment: return "ContractDeployment";
    case EventKind::RawMaterialShipment: return "RawMaterialShipment";
    case EventKind::ProducerReceipt: return "ProducerReceipt";
    case EventKind::ProductionRecord: return "ProductionRecord";
    case EventKind::WarehouseShipment: return "WarehouseShipment";
    case EventKind::WarehouseReceipt: return "WarehouseReceipt";
    case EventKind::RetailShipment: return "RetailShipment";
    case EventKind::RetailReceipt: return "RetailReceipt";
    case EventKind::Payment: return "Payment";
  }
  return "Unknown";
}

inline std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (std::uint8_t i = 0; i < event_kind_count; ++i)
    if (to_string(static_cast<EventKind>(i)) == s) return static_cast<EventKind>(i);
  return std::nullopt;
}

/// Stage-bearing kinds map one to one onto Stage.
inline std::optional<Stage> stage_of(EventKind k) {
  auto v = static_cast<std::uint8_t>(k);
  auto first = static_cast<std::uint8_t>(EventKind::RawMaterialShipment);
  if (v >= first && v < first + stage_count) return static_cast<Stage>(v - first);
  return std::nullopt;
}

inline EventKind kind_of(Stage s) {
  return static_cast<EventKind>(static_cast<std::uint8_t>(s) + static_cast<std::uint8_t>(EventKind::RawMaterialShipment));
}

struct ContractRule {
  std::string id;
  std::string order_number;
  EventKind trigger = EventKind::ProducerReceipt;
  std::vector<Check> checks;
  std::vector<ActionTemplate> actions;
  std::uint64_t deployed_in = 0;

  bool operator==(const ContractRule&) const = default;
};

struct ContractDeployment {
  ContractRule rule;
  bool operator==(const ContractDeployment&) const = default;
};

struct RawMaterialShipment {
  std::string certificate_of_origin;
  std::string batch_data;
  std::string order_number;
  std::int64_t shipment_date = 0;
  std::string barcode;
  bool operator==(const RawMaterialShipment&) const = default;
};

struct ProducerReceipt {
  std::string order_number;
  std::uint64_t received_quantity = 0;
  bool quality_pass = false;
  std::string spec_observed;
  bool operator==(const ProducerReceipt&) const = default;
};

struct ProductionRecord {
  std::string order_number;
  std::string production_number;
  std::string barcode;
  std::string consumed_batch;  // barcode of the raw-material lot consumed
  bool operator==(const ProductionRecord&) const = default;
};

struct WarehouseShipment {
  std::string order_number;
  std::string shipment_number;
  std::string barcode;
  bool operator==(const WarehouseShipment&) const = default;
};

struct WarehouseReceipt {
  std::string order_number;
  std::string supplier;
  std::string invoice_number;
  std::string shipment_number;
  std::uint64_t quantity = 0;
  bool quality_pass = false;
  bool operator==(const WarehouseReceipt&) const = default;
};

struct RetailShipment {
  std::string order_number;
  std::string product_received_data;
  std::int64_t shipment_date = 0;
  std::string packaging_barcode;
  std::string product_barcode;
  bool operator==(const RetailShipment&) const = default;
};

struct RetailReceipt {
  std::string order_number;
  std::int64_t receive_date = 0;
  std::string customer_id;
  bool operator==(const RetailReceipt&) const = default;
};

struct Payment {
  std::string from;
  std::string to;
  std::uint64_t amount = 0;
  std::string order_number;
  Stage stage = Stage::ProducerReceipt;
  bool operator==(const Payment&) const = default;
};

// Variant order must match EventKind.
using Event = std::variant<GenesisMarker, Enrollment, OrderOpened, ContractDeployment, RawMaterialShipment,
                           ProducerReceipt, ProductionRecord, WarehouseShipment, WarehouseReceipt, RetailShipment,
                           RetailReceipt, Payment>;

inline EventKind kind_of(const Event& e) { return static_cast<EventKind>(e.index()); }

/// Order number the event belongs to, if any.
inline std::optional<std::string> order_number_of(const Event& e) {
  return std::visit(
      [](const auto& ev) -> std::optional<std::string> {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, OrderOpened>) return ev.order.order_number;
        else if constexpr (std::is_same_v<T, ContractDeployment>) return ev.rule.order_number;
        else if constexpr (requires { ev.order_number; }) return ev.order_number;
        else return std::nullopt;
      },
      e);
}

// ---------------------------------------------------------------------------
// Canonical encoding

namespace detail {

inline void encode_value(ByteWriter& w, const Value& v) {
  w.u8(static_cast<std::uint8_t>(v.index()));
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::int64_t>) w.i64(x);
        else if constexpr (std::is_same_v<T, std::string>) w.str(x);
        else w.boolean(x);
      },
      v);
}

inline Value decode_value(ByteReader& r) {
  switch (r.u8()) {
    case 0: return r.i64();
    case 1: return r.str();
    case 2: return r.boolean();
    default: throw Error(ErrorCode::Malformed, "unknown value tag");
  }
}

inline void encode_operand(ByteWriter& w, const Operand& o) {
  w.u8(static_cast<std::uint8_t>(o.source));
  if (o.source == OperandSource::Literal) encode_value(w, o.literal);
  else w.str(o.name);
}

inline Operand decode_operand(ByteReader& r) {
  auto tag = r.u8();
  if (tag > 3) throw Error(ErrorCode::Malformed, "unknown operand source");
  Operand o;
  o.source = static_cast<OperandSource>(tag);
  if (o.source == OperandSource::Literal) o.literal = decode_value(r);
  else o.name = r.str();
  return o;
}

inline void encode_rule(ByteWriter& w, const ContractRule& rule) {
  w.str(rule.id).str(rule.order_number).u8(static_cast<std::uint8_t>(rule.trigger));
  w.u32(static_cast<std::uint32_t>(rule.checks.size()));
  for (const auto& c : rule.checks) {
    encode_operand(w, c.lhs);
    w.u8(static_cast<std::uint8_t>(c.op));
    encode_operand(w, c.rhs);
    w.str(c.dispute_reason);
  }
  w.u32(static_cast<std::uint32_t>(rule.actions.size()));
  for (const auto& a : rule.actions) {
    w.u8(static_cast<std::uint8_t>(a.index()));
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, PayTemplate>) {
            encode_operand(w, t.from);
            encode_operand(w, t.to);
            encode_operand(w, t.amount);
            w.u8(static_cast<std::uint8_t>(t.stage));
          } else if constexpr (std::is_same_v<T, InventoryTemplate>) {
            encode_operand(w, t.location);
            encode_operand(w, t.sku);
            encode_operand(w, t.delta);
          } else if constexpr (std::is_same_v<T, DisputeTemplate>) {
            w.str(t.reason);
          } else {
            w.u8(static_cast<std::uint8_t>(t.stage));
          }
        },
        a);
  }
  w.u64(rule.deployed_in);
}

inline ContractRule decode_rule(ByteReader& r) {
  ContractRule rule;
  rule.id = r.str();
  rule.order_number = r.str();
  auto trig = r.u8();
  if (trig >= event_kind_count) throw Error(ErrorCode::Malformed, "unknown trigger kind");
  rule.trigger = static_cast<EventKind>(trig);
  auto nchecks = r.count(4);
  for (std::uint32_t i = 0; i < nchecks; ++i) {
    Check c;
    c.lhs = decode_operand(r);
    auto op = r.u8();
    if (op > 5) throw Error(ErrorCode::Malformed, "unknown comparison operator");
    c.op = static_cast<CompareOp>(op);
    c.rhs = decode_operand(r);
    c.dispute_reason = r.str();
    rule.checks.push_back(std::move(c));
  }
  auto nactions = r.count(2);
  for (std::uint32_t i = 0; i < nactions; ++i) {
    switch (r.u8()) {
      case 0: {
        PayTemplate t;
        t.from = decode_operand(r);
        t.to = decode_operand(r);
        t.amount = decode_operand(r);
        t.stage = stage_from_byte(r.u8());
        rule.actions.emplace_back(std::move(t));
        break;
      }
      case 1: {
        InventoryTemplate t;
        t.location = decode_operand(r);
        t.sku = decode_operand(r);
        t.delta = decode_operand(r);
        rule.actions.emplace_back(std::move(t));
        break;
      }
      case 2: rule.actions.emplace_back(DisputeTemplate{r.str()}); break;
      case 3: rule.actions.emplace_back(AdvanceTemplate{stage_from_byte(r.u8())}); break;
      default: throw Error(ErrorCode::Malformed, "unknown action tag");
    }
  }
  rule.deployed_in = r.u64();
  return rule;
}

inline void encode_order(ByteWriter& w, const Order& o) {
  w.str(o.order_number).str(o.sku).str(o.spec).u64(o.quantity).boolean(o.quality_required).str(o.invoice_number);
  w.str(o.supplier).str(o.producer).str(o.warehouse).str(o.retailer);
  w.u64(o.raw_material_price).u64(o.wholesale_price).u64(o.retail_price);
}

inline Order decode_order(ByteReader& r) {
  Order o;
  o.order_number = r.str();
  o.sku = r.str();
  o.spec = r.str();
  o.quantity = r.u64();
  o.quality_required = r.boolean();
  o.invoice_number = r.str();
  o.supplier = r.str();
  o.producer = r.str();
  o.warehouse = r.str();
  o.retailer = r.str();
  o.raw_material_price = r.u64();
  o.wholesale_price = r.u64();
  o.retail_price = r.u64();
  return o;
}

}  // namespace detail

inline void encode_event(ByteWriter& w, const Event& event) {
  w.u8(static_cast<std::uint8_t>(event.index()));
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, GenesisMarker>) {
          w.str(e.label).u8(static_cast<std::uint8_t>(e.algo)).u8(e.difficulty);
          w.u8(static_cast<std::uint8_t>(e.registry_mode)).u8(static_cast<std::uint8_t>(e.vote_base));
          w.u32(static_cast<std::uint32_t>(e.issuer_keys.size()));
          for (const auto& k : e.issuer_keys) w.blob(k.view());
        } else if constexpr (std::is_same_v<T, Enrollment>) {
          w.str(e.name).blob(e.public_key.view()).u8(static_cast<std::uint8_t>(e.role));
          w.blob(e.credential.signer.view()).blob(e.credential.signature);
        } else if constexpr (std::is_same_v<T, OrderOpened>) {
          detail::encode_order(w, e.order);
        } else if constexpr (std::is_same_v<T, ContractDeployment>) {
          detail::encode_rule(w, e.rule);
        } else if constexpr (std::is_same_v<T, RawMaterialShipment>) {
          w.str(e.certificate_of_origin).str(e.batch_data).str(e.order_number).i64(e.shipment_date).str(e.barcode);
        } else if constexpr (std::is_same_v<T, ProducerReceipt>) {
          w.str(e.order_number).u64(e.received_quantity).boolean(e.quality_pass).str(e.spec_observed);
        } else if constexpr (std::is_same_v<T, ProductionRecord>) {
          w.str(e.order_number).str(e.production_number).str(e.barcode).str(e.consumed_batch);
        } else if constexpr (std::is_same_v<T, WarehouseShipment>) {
          w.str(e.order_number).str(e.shipment_number).str(e.barcode);
        } else if constexpr (std::is_same_v<T, WarehouseReceipt>) {
          w.str(e.order_number).str(e.supplier).str(e.invoice_number).str(e.shipment_number);
          w.u64(e.quantity).boolean(e.quality_pass);
        } else if constexpr (std::is_same_v<T, RetailShipment>) {
          w.str(e.order_number).str(e.product_received_data).i64(e.shipment_date);
          w.str(e.packaging_barcode).str(e.product_barcode);
        } else if constexpr (std::is_same_v<T, RetailReceipt>) {
          w.str(e.order_number).i64(e.receive_date).str(e.customer_id);
        } else {
          w.str(e.from).str(e.to).u64(e.amount).str(e.order_number).u8(static_cast<std::uint8_t>(e.stage));
        }
      },
      event);
}

inline Event decode_event(ByteReader& r) {
  auto tag = r.u8();
  switch (static_cast<EventKind>(tag)) {
    case EventKind::GenesisMarker: {
      GenesisMarker g;
      g.label = r.str();
      g.algo = hash_algo_from_byte(r.u8());
      g.difficulty = r.u8();
      g.registry_mode = registry_mode_from_byte(r.u8());
      g.vote_base = vote_base_from_byte(r.u8());
      auto n = r.count(4 + PublicKey::size);
      for (std::uint32_t i = 0; i < n; ++i) g.issuer_keys.push_back(PublicKey::from_bytes(r.blob()));
      return g;
    }
    case EventKind::Enrollment: {
      Enrollment e;
      e.name = r.str();
      e.public_key = PublicKey::from_bytes(r.blob());
      e.role = role_from_byte(r.u8());
      e.credential.signer = PublicKey::from_bytes(r.blob());
      e.credential.signature = r.blob();
      return e;
    }
    case EventKind::OrderOpened: return OrderOpened{detail::decode_order(r)};
    case EventKind::ContractDeployment: return ContractDeployment{detail::decode_rule(r)};
    case EventKind::RawMaterialShipment: {
      RawMaterialShipment e;
      e.certificate_of_origin = r.str();
      e.batch_data = r.str();
      e.order_number = r.str();
      e.shipment_date = r.i64();
      e.barcode = r.str();
      return e;
    }
    case EventKind::ProducerReceipt: {
      ProducerReceipt e;
      e.order_number = r.str();
      e.received_quantity = r.u64();
      e.quality_pass = r.boolean();
      e.spec_observed = r.str();
      return e;
    }
    case EventKind::ProductionRecord: {
      ProductionRecord e;
      e.order_number = r.str();
      e.production_number = r.str();
      e.barcode = r.str();
      e.consumed_batch = r.str();
      return e;
    }
    case EventKind::WarehouseShipment: {
      WarehouseShipment e;
      e.order_number = r.str();
      e.shipment_number = r.str();
      e.barcode = r.str();
      return e;
    }
    case EventKind::WarehouseReceipt: {
      WarehouseReceipt e;
      e.order_number = r.str();
      e.supplier = r.str();
      e.invoice_number = r.str();
      e.shipment_number = r.str();
      e.quantity = r.u64();
      e.quality_pass = r.boolean();
      return e;
    }
    case EventKind::RetailShipment: {
      RetailShipment e;
      e.order_number = r.str();
      e.product_received_data = r.str();
      e.shipment_date = r.i64();
      e.packaging_barcode = r.str();
      e.product_barcode = r.str();
      return e;
    }
    case EventKind::RetailReceipt: {
      RetailReceipt e;
      e.order_number = r.str();
      e.receive_date = r.i64();
      e.customer_id = r.str();
      return e;
    }
    case EventKind::Payment: {
      Payment e;
      e.from = r.str();
      e.to = r.str();
      e.amount = r.u64();
      e.order_number = r.str();
      e.stage = stage_from_byte(r.u8());
      return e;
    }
  }
  throw Error(ErrorCode::Malformed, "unknown event tag " + std::to_string(tag));
}

inline Bytes encode_event(const Event& e) {
  ByteWriter w;
  encode_event(w, e);
  return std::move(w).bytes();
}

// ---------------------------------------------------------------------------
// Field access used by contract predicates

inline std::optional<Value> event_field(const Event& event, std::string_view name) {
  return std::visit(
      [&](const auto& e) -> std::optional<Value> {
        using T = std::decay_t<decltype(e)>;
        auto s = [](const std::string& v) { return std::optional<Value>(Value(v)); };
        auto i = [](auto v) { return std::optional<Value>(Value(static_cast<std::int64_t>(v))); };
        auto b = [](bool v) { return std::optional<Value>(Value(v)); };
        if constexpr (std::is_same_v<T, RawMaterialShipment>) {
          if (name == "certificate_of_origin") return s(e.certificate_of_origin);
          if (name == "batch_data") return s(e.batch_data);
          if (name == "order_number") return s(e.order_number);
          if (name == "shipment_date") return i(e.shipment_date);
          if (name == "barcode") return s(e.barcode);
        } else if constexpr (std::is_same_v<T, ProducerReceipt>) {
          if (name == "order_number") return s(e.order_number);
          if (name == "received_quantity") return i(e.received_quantity);
          if (name == "quality_pass") return b(e.quality_pass);
          if (name == "spec_observed") return s(e.spec_observed);
        } else if constexpr (std::is_same_v<T, ProductionRecord>) {
          if (name == "order_number") return s(e.order_number);
          if (name == "production_number") return s(e.production_number);
          if (name == "barcode") return s(e.barcode);
          if (name == "consumed_batch") return s(e.consumed_batch);
        } else if constexpr (std::is_same_v<T, WarehouseShipment>) {
          if (name == "order_number") return s(e.order_number);
          if (name == "shipment_number") return s(e.shipment_number);
          if (name == "barcode") return s(e.barcode);
        } else if constexpr (std::is_same_v<T, WarehouseReceipt>) {
          if (name == "order_number") return s(e.order_number);
          if (name == "supplier") return s(e.supplier);
          if (name == "invoice_number") return s(e.invoice_number);
          if (name == "shipment_number") return s(e.shipment_number);
          if (name == "quantity") return i(e.quantity);
          if (name == "quality_pass") return b(e.quality_pass);
        } else if constexpr (std::is_same_v<T, RetailShipment>) {
          if (name == "order_number") return s(e.order_number);
          if (name == "product_received_data") return s(e.product_received_data);
          if (name == "shipment_date") return i(e.shipment_date);
          if (name == "packaging_barcode") return s(e.packaging_barcode);
          if (name == "product_barcode") return s(e.product_barcode);
        } else if constexpr (std::is_same_v<T, RetailReceipt>) {
          if (name == "order_number") return s(e.order_number);
          if (name == "receive_date") return i(e.receive_date);
          if (name == "customer_id") return s(e.customer_id);
        } else if constexpr (std::is_same_v<T, Payment>) {
          if (name == "from") return s(e.from);
          if (name == "to") return s(e.to);
          if (name == "amount") return i(e.amount);
          if (name == "order_number") return s(e.order_number);
        }
        return std::nullopt;
      },
      event);
}

inline std::optional<Value> order_field(const Order& o, std::string_view name) {
  if (name == "order_number") return Value(o.order_number);
  if (name == "sku") return Value(o.sku);
  if (name == "spec") return Value(o.spec);
  if (name == "quantity") return Value(static_cast<std::int64_t>(o.quantity));
  if (name == "quality_required") return Value(o.quality_required);
  if (name == "invoice_number") return Value(o.invoice_number);
  if (name == "supplier") return Value(o.supplier);
  if (name == "producer") return Value(o.producer);
  if (name == "warehouse") return Value(o.warehouse);
  if (name == "retailer") return Value(o.retailer);
  if (name == "raw_material_price") return Value(static_cast<std::int64_t>(o.raw_material_price));
  if (name == "wholesale_price") return Value(static_cast<std::int64_t>(o.wholesale_price));
  if (name == "retail_price") return Value(static_cast<std::int64_t>(o.retail_price));
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON rendering and parsing (scenario files and trace output)

inline nlohmann::json value_to_json(const Value& v) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

inline nlohmann::json order_to_json(const Order& o) {
  return {{"order_number", o.order_number},
          {"sku", o.sku},
          {"spec", o.spec},
          {"quantity", o.quantity},
          {"quality_required", o.quality_required},
          {"invoice_number", o.invoice_number},
          {"supplier", o.supplier},
          {"producer", o.producer},
          {"warehouse", o.warehouse},
          {"retailer", o.retailer},
          {"raw_material_price", o.raw_material_price},
          {"wholesale_price", o.wholesale_price},
          {"retail_price", o.retail_price}};
}

inline nlohmann::json event_to_json(const Event& event) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(kind_of(event)));
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, GenesisMarker>) {
          j["label"] = e.label;
          j["algo"] = std::string(to_string(e.algo));
          j["difficulty"] = e.difficulty;
          j["registry_mode"] = std::string(to_string(e.registry_mode));
          j["vote_base"] = std::string(to_string(e.vote_base));
          auto keys = nlohmann::json::array();
          for (const auto& k : e.issuer_keys) keys.push_back(k.hex());
          j["issuer_keys"] = keys;
        } else if constexpr (std::is_same_v<T, Enrollment>) {
          j["name"] = e.name;
          j["public_key"] = e.public_key.hex();
          j["role"] = std::string(to_string(e.role));
        } else if constexpr (std::is_same_v<T, OrderOpened>) {
          j["order"] = order_to_json(e.order);
        } else if constexpr (std::is_same_v<T, ContractDeployment>) {
          j["rule_id"] = e.rule.id;
          j["order_number"] = e.rule.order_number;
          j["trigger"] = std::string(to_string(e.rule.trigger));
          j["deployed_in"] = e.rule.deployed_in;
        } else if constexpr (std::is_same_v<T, Payment>) {
          j["from"] = e.from;
          j["to"] = e.to;
          j["amount"] = e.amount;
          j["order_number"] = e.order_number;
          j["stage"] = std::string(to_string(e.stage));
        } else {
          static const char* const names[] = {
              "certificate_of_origin", "batch_data",   "order_number",    "shipment_date",   "barcode",
              "received_quantity",     "quality_pass", "spec_observed",   "production_number",
              "consumed_batch",        "shipment_number", "supplier",     "invoice_number",  "quantity",
              "product_received_data", "packaging_barcode", "product_barcode", "receive_date", "customer_id"};
          for (const char* n : names)
            if (auto v = event_field(event, n)) j[n] = value_to_json(*v);
        }
      },
      event);
  return j;
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::SchemaViolation, std::string("missing field '") + key + "'");
  return j.at(key);
}

inline std::string req_string(const nlohmann::json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) throw Error(ErrorCode::SchemaViolation, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline std::uint64_t req_uint(const nlohmann::json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw Error(ErrorCode::SchemaViolation, std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::int64_t req_int(const nlohmann::json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number_integer()) throw Error(ErrorCode::SchemaViolation, std::string("field '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

inline bool req_bool(const nlohmann::json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_boolean()) throw Error(ErrorCode::SchemaViolation, std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

}  // namespace detail

inline Order order_from_json(const nlohmann::json& j) {
  using namespace detail;
  Order o;
  o.order_number = req_string(j, "order_number");
  o.sku = req_string(j, "sku");
  o.spec = req_string(j, "spec");
  o.quantity = req_uint(j, "quantity");
  o.quality_required = j.value("quality_required", true);
  o.invoice_number = j.contains("invoice_number") ? req_string(j, "invoice_number") : "INV-" + o.order_number;
  o.supplier = req_string(j, "supplier");
  o.producer = req_string(j, "producer");
  o.warehouse = req_string(j, "warehouse");
  o.retailer = req_string(j, "retailer");
  o.raw_material_price = req_uint(j, "raw_material_price");
  o.wholesale_price = req_uint(j, "wholesale_price");
  o.retail_price = req_uint(j, "retail_price");
  if (o.quantity == 0) throw Error(ErrorCode::SchemaViolation, "order quantity must be positive");
  return o;
}

/// Parses a supply-chain stage event from {"kind": ..., <fields>}. Only the
/// seven stage kinds and Payment are accepted from external input.
inline Event stage_event_from_json(const nlohmann::json& j) {
  using namespace detail;
  auto kind_name = req_string(j, "kind");
  auto kind = parse_event_kind(kind_name);
  if (!kind) throw Error(ErrorCode::SchemaViolation, "unknown event kind '" + kind_name + "'");
  switch (*kind) {
    case EventKind::RawMaterialShipment:
      return RawMaterialShipment{req_string(j, "certificate_of_origin"), req_string(j, "batch_data"),
                                 req_string(j, "order_number"), req_int(j, "shipment_date"), req_string(j, "barcode")};
    case EventKind::ProducerReceipt:
      return ProducerReceipt{req_string(j, "order_number"), req_uint(j, "received_quantity"),
                             req_bool(j, "quality_pass"), req_string(j, "spec_observed")};
    case EventKind::ProductionRecord:
      return ProductionRecord{req_string(j, "order_number"), req_string(j, "production_number"),
                              req_string(j, "barcode"), req_string(j, "consumed_batch")};
    case EventKind::WarehouseShipment:
      return WarehouseShipment{req_string(j, "order_number"), req_string(j, "shipment_number"),
                               req_string(j, "barcode")};
    case EventKind::WarehouseReceipt:
      return WarehouseReceipt{req_string(j, "order_number"),    req_string(j, "supplier"),
                              req_string(j, "invoice_number"),  req_string(j, "shipment_number"),
                              req_uint(j, "quantity"),          req_bool(j, "quality_pass")};
    case EventKind::RetailShipment:
      return RetailShipment{req_string(j, "order_number"), req_string(j, "product_received_data"),
                            req_int(j, "shipment_date"), req_string(j, "packaging_barcode"),
                            req_string(j, "product_barcode")};
    case EventKind::RetailReceipt:
      return RetailReceipt{req_string(j, "order_number"), req_int(j, "receive_date"), req_string(j, "customer_id")};
    case EventKind::Payment: {
      auto stage_name = req_string(j, "stage");
      auto stage = parse_stage(stage_name);
      if (!stage) throw Error(ErrorCode::SchemaViolation, "unknown stage '" + stage_name + "'");
      return Payment{req_string(j, "from"), req_string(j, "to"), req_uint(j, "amount"), req_string(j, "order_number"),
                     *stage};
    }
    default: throw Error(ErrorCode::SchemaViolation, "event kind '" + kind_name + "' cannot be scheduled");
  }
}

}  // namespace chainflow

#endif  // CHAINFLOW_EVENTS_HPP
