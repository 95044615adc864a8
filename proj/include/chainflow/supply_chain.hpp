#ifndef CHAINFLOW_SUPPLY_CHAIN_HPP
#define CHAINFLOW_SUPPLY_CHAIN_HPP

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainflow/error.hpp"
#include "chainflow/events.hpp"
#include "chainflow/identity.hpp"
#include "chainflow/ledger.hpp"

namespace chainflow {

// ---------------------------------------------------------------------------
// Stage machine

struct OrderProgress {
  std::optional<Stage> completed;  // last stage recorded on-chain
  bool frozen = false;             // a dispute halts the order

  bool finished() const { return completed == Stage::RetailReceipt; }
  bool operator==(const OrderProgress&) const = default;
};

/// Event kinds the order may accept next. Empty when frozen or finished.
inline std::vector<EventKind> stage_machine(const OrderProgress& progress) {
  if (progress.frozen || progress.finished()) return {};
  auto next = progress.completed ? static_cast<std::uint8_t>(*progress.completed) + 1 : 0;
  return {kind_of(static_cast<Stage>(next))};
}

inline void require_next_stage(const OrderProgress& progress, EventKind kind) {
  auto allowed = stage_machine(progress);
  if (std::find(allowed.begin(), allowed.end(), kind) == allowed.end()) {
    std::string why = progress.frozen ? "order is frozen by a dispute"
                      : progress.finished() ? "order already completed"
                                            : "expected " + std::string(to_string(allowed.front()));
    throw Error(ErrorCode::OutOfOrderEvent, std::string(to_string(kind)) + " not allowed: " + why);
  }
}

/// Role allowed to author each stage event.
inline std::optional<Role> required_role(EventKind kind) {
  switch (kind) {
    case EventKind::RawMaterialShipment: return Role::Supplier;
    case EventKind::ProducerReceipt:
    case EventKind::ProductionRecord:
    case EventKind::WarehouseShipment: return Role::Producer;
    case EventKind::WarehouseReceipt:
    case EventKind::RetailShipment: return Role::Warehouse;
    case EventKind::RetailReceipt: return Role::Retailer;
    default: return std::nullopt;
  }
}

/// Order party expected to author a stage event.
inline const std::string& responsible_party(const Order& order, Stage stage) {
  switch (stage) {
    case Stage::RawMaterialShipment: return order.supplier;
    case Stage::ProducerReceipt:
    case Stage::ProductionRecord:
    case Stage::WarehouseShipment: return order.producer;
    case Stage::WarehouseReceipt:
    case Stage::RetailShipment: return order.warehouse;
    case Stage::RetailReceipt: return order.retailer;
  }
  return order.supplier;
}

inline bool is_payer_role(Role r) { return r == Role::Producer || r == Role::Warehouse || r == Role::Retailer; }

/// Rejects empty identifiers and barcodes.
inline void validate_event_schema(const Event& event) {
  auto nonempty = [](const std::string& v, const char* field) {
    if (v.empty()) throw Error(ErrorCode::SchemaViolation, std::string("field '") + field + "' must be non-empty");
  };
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, RawMaterialShipment>) {
          nonempty(e.order_number, "order_number");
          nonempty(e.certificate_of_origin, "certificate_of_origin");
          nonempty(e.batch_data, "batch_data");
          nonempty(e.barcode, "barcode");
        } else if constexpr (std::is_same_v<T, ProducerReceipt>) {
          nonempty(e.order_number, "order_number");
        } else if constexpr (std::is_same_v<T, ProductionRecord>) {
          nonempty(e.order_number, "order_number");
          nonempty(e.production_number, "production_number");
          nonempty(e.barcode, "barcode");
          nonempty(e.consumed_batch, "consumed_batch");
        } else if constexpr (std::is_same_v<T, WarehouseShipment>) {
          nonempty(e.order_number, "order_number");
          nonempty(e.shipment_number, "shipment_number");
          nonempty(e.barcode, "barcode");
        } else if constexpr (std::is_same_v<T, WarehouseReceipt>) {
          nonempty(e.order_number, "order_number");
          nonempty(e.shipment_number, "shipment_number");
        } else if constexpr (std::is_same_v<T, RetailShipment>) {
          nonempty(e.order_number, "order_number");
          nonempty(e.packaging_barcode, "packaging_barcode");
          nonempty(e.product_barcode, "product_barcode");
        } else if constexpr (std::is_same_v<T, RetailReceipt>) {
          nonempty(e.order_number, "order_number");
          nonempty(e.customer_id, "customer_id");
        } else if constexpr (std::is_same_v<T, Payment>) {
          nonempty(e.order_number, "order_number");
          nonempty(e.from, "from");
          nonempty(e.to, "to");
          if (e.amount == 0) throw Error(ErrorCode::SchemaViolation, "payment amount must be positive");
        }
      },
      event);
}

/// Signs a supply-chain event for `actor` after checking role and schema.
inline SignedTransaction build_event(const IdentityKeys& actor, Event event,
                                     std::optional<SealedPayload> sealed = std::nullopt) {
  auto kind = kind_of(event);
  if (kind == EventKind::Payment) {
    if (!is_payer_role(actor.identity.role))
      throw Error(ErrorCode::RoleMismatch, std::string(to_string(actor.identity.role)) + " cannot issue payments");
  } else {
    auto role = required_role(kind);
    if (!role) throw Error(ErrorCode::SchemaViolation, std::string(to_string(kind)) + " is not a supply-chain event");
    if (*role != actor.identity.role)
      throw Error(ErrorCode::RoleMismatch, std::string(to_string(actor.identity.role)) + " cannot emit " +
                                               std::string(to_string(kind)));
  }
  validate_event_schema(event);
  return sign_transaction(std::move(event), std::move(sealed), actor);
}

inline SignedTransaction build_event(const IdentityKeys& actor, const nlohmann::json& fields) {
  return build_event(actor, stage_event_from_json(fields));
}

// ---------------------------------------------------------------------------
// Provenance

struct TrailEntry {
  std::size_t block_index = 0;
  std::size_t tx_index = 0;
  SignedTransaction tx;
};

struct ProvenanceTrail {
  std::string barcode;
  std::vector<TrailEntry> entries;  // ascending block index, supplier first

  std::vector<EventKind> kinds() const {
    std::vector<EventKind> out;
    for (const auto& e : entries) out.push_back(kind_of(e.tx.event));
    return out;
  }
};

/// Walks a barcode upstream to its raw-material origin. Barcode links:
/// packaging -> product (RetailShipment), product -> raw lot
/// (ProductionRecord.consumed_batch). Receipts join their shipment by order
/// number (producer, retail) or shipment number (warehouse).
inline ProvenanceTrail trace(const Chain& chain, const std::string& barcode) {
  ProvenanceTrail trail{barcode, {}};
  if (barcode.empty()) return trail;

  struct Located {
    std::size_t block, tx;
    const SignedTransaction* ptr;
  };
  std::vector<Located> events;
  for (std::size_t b = 0; b < chain.size(); ++b)
    for (std::size_t t = 0; t < chain.at(b).transactions.size(); ++t)
      events.push_back({b, t, &chain.at(b).transactions[t]});

  std::set<std::string> lineage{barcode};
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& l : events) {
      if (const auto* rs = std::get_if<RetailShipment>(&l.ptr->event)) {
        if (lineage.count(rs->packaging_barcode)) grew |= lineage.insert(rs->product_barcode).second;
      } else if (const auto* pr = std::get_if<ProductionRecord>(&l.ptr->event)) {
        if (lineage.count(pr->barcode)) grew |= lineage.insert(pr->consumed_batch).second;
      }
    }
  }

  std::set<std::string> raw_orders, retail_orders, shipments;
  std::set<std::pair<std::size_t, std::size_t>> picked;
  for (const auto& l : events) {
    bool hit = std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, RawMaterialShipment>) {
            if (lineage.count(e.barcode)) {
              raw_orders.insert(e.order_number);
              return true;
            }
          } else if constexpr (std::is_same_v<T, ProductionRecord>) {
            return lineage.count(e.barcode) > 0;
          } else if constexpr (std::is_same_v<T, WarehouseShipment>) {
            if (lineage.count(e.barcode)) {
              shipments.insert(e.shipment_number);
              return true;
            }
          } else if constexpr (std::is_same_v<T, RetailShipment>) {
            if (lineage.count(e.packaging_barcode)) {
              retail_orders.insert(e.order_number);
              return true;
            }
          }
          return false;
        },
        l.ptr->event);
    if (hit) picked.insert({l.block, l.tx});
  }
  for (const auto& l : events) {
    bool hit = false;
    if (const auto* r = std::get_if<ProducerReceipt>(&l.ptr->event)) hit = raw_orders.count(r->order_number) > 0;
    else if (const auto* w = std::get_if<WarehouseReceipt>(&l.ptr->event)) hit = shipments.count(w->shipment_number) > 0;
    else if (const auto* rr = std::get_if<RetailReceipt>(&l.ptr->event)) hit = retail_orders.count(rr->order_number) > 0;
    if (hit) picked.insert({l.block, l.tx});
  }
  for (const auto& [b, t] : picked) trail.entries.push_back({b, t, chain.at(b).transactions[t]});
  return trail;
}

/// Sealed fields are shown only when `key` opens them.
inline nlohmann::json trail_to_json(const ProvenanceTrail& trail, const PrivateKey* key = nullptr) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : trail.entries) {
    nlohmann::json j{{"block", e.block_index},
                     {"tx", e.tx_index},
                     {"author", e.tx.author.hex()},
                     {"event", event_to_json(e.tx.event)}};
    if (e.tx.sealed) {
      nlohmann::json s{{"recipient", e.tx.sealed->recipient.hex()}};
      std::optional<Bytes> plain;
      if (key) {
        try {
          plain = unseal(*e.tx.sealed, *key);
        } catch (const Error&) {
        }
      }
      if (plain) s["plaintext"] = std::string(plain->begin(), plain->end());
      else s["redacted"] = true;
      j["sealed"] = s;
    }
    entries.push_back(std::move(j));
  }
  return {{"barcode", trail.barcode}, {"trail", entries}};
}

}  // namespace chainflow

#endif  // CHAINFLOW_SUPPLY_CHAIN_HPP
