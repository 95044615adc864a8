#ifndef CHAINFLOW_NETWORK_HPP
#define CHAINFLOW_NETWORK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "chainflow/error.hpp"
#include "chainflow/identity.hpp"
#include "chainflow/ledger.hpp"
#include "chainflow/rng.hpp"

namespace chainflow {

// ---------------------------------------------------------------------------
// Topology

/// Undirected graph over node indices; adjacency lists kept sorted.
class Topology {
 public:
  explicit Topology(std::size_t n = 0) : adj_(n) {}

  std::size_t size() const { return adj_.size(); }
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return adj_.at(v); }
  std::size_t degree(std::size_t v) const { return adj_.at(v).size(); }

  bool has_edge(std::size_t a, std::size_t b) const {
    const auto& n = adj_.at(a);
    return std::binary_search(n.begin(), n.end(), b);
  }

  void add_edge(std::size_t a, std::size_t b) {
    if (a == b) throw Error(ErrorCode::InvalidArgument, "self loop");
    if (has_edge(a, b)) return;
    insert_sorted(adj_.at(a), b);
    insert_sorted(adj_.at(b), a);
  }

  void remove_edge(std::size_t a, std::size_t b) {
    erase_value(adj_.at(a), b);
    erase_value(adj_.at(b), a);
  }

  std::size_t add_node() {
    adj_.emplace_back();
    return adj_.size() - 1;
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& a : adj_) n += a.size();
    return n / 2;
  }

  bool symmetric() const {
    for (std::size_t a = 0; a < adj_.size(); ++a)
      for (auto b : adj_[a])
        if (!has_edge(b, a)) return false;
    return true;
  }

  bool operator==(const Topology&) const = default;

 private:
  static void insert_sorted(std::vector<std::size_t>& v, std::size_t x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); }
  static void erase_value(std::vector<std::size_t>& v, std::size_t x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it != v.end() && *it == x) v.erase(it);
  }

  std::vector<std::vector<std::size_t>> adj_;
};

/// Random spanning tree plus extra edges until every node has at least
/// `degree` neighbours where possible.
inline Topology build_topology(std::size_t node_count, std::size_t degree, std::uint64_t seed) {
  if (node_count == 0) throw Error(ErrorCode::Unsatisfiable, "topology needs at least one node");
  if (node_count > 1 && degree == 0) throw Error(ErrorCode::Unsatisfiable, "degree 0 cannot connect the graph");
  if (node_count > 1 && degree >= node_count)
    throw Error(ErrorCode::Unsatisfiable,
                "degree " + std::to_string(degree) + " impossible with " + std::to_string(node_count) + " nodes");
  Topology g(node_count);
  Rng rng(seed, "topology");
  std::vector<std::size_t> order(node_count);
  for (std::size_t i = 0; i < node_count; ++i) order[i] = i;
  rng.shuffle(order);
  for (std::size_t i = 1; i < node_count; ++i) g.add_edge(order[i], order[rng.below(i)]);

  for (std::size_t round = 0; round < degree * node_count * 4; ++round) {
    std::vector<std::size_t> low;
    for (std::size_t v = 0; v < node_count; ++v)
      if (g.degree(v) < degree) low.push_back(v);
    if (low.empty()) break;
    auto a = low[rng.below(low.size())];
    std::vector<std::size_t> candidates;
    for (std::size_t v = 0; v < node_count; ++v)
      if (v != a && !g.has_edge(a, v)) candidates.push_back(v);
    if (candidates.empty()) break;
    // Prefer partners that are themselves short of edges.
    std::vector<std::size_t> short_partners;
    for (auto v : candidates)
      if (g.degree(v) < degree) short_partners.push_back(v);
    const auto& pool = short_partners.empty() ? candidates : short_partners;
    g.add_edge(a, pool[rng.below(pool.size())]);
  }
  return g;
}

/// Hop distance from `origin` to every node; nullopt if unreachable.
inline std::vector<std::optional<std::size_t>> bfs_distances(const Topology& g, std::size_t origin) {
  std::vector<std::optional<std::size_t>> dist(g.size());
  std::deque<std::size_t> q{origin};
  dist[origin] = 0;
  while (!q.empty()) {
    auto v = q.front();
    q.pop_front();
    for (auto w : g.neighbors(v))
      if (!dist[w]) {
        dist[w] = *dist[v] + 1;
        q.push_back(w);
      }
  }
  return dist;
}

inline bool connected(const Topology& g) {
  if (g.size() == 0) return true;
  auto d = bfs_distances(g, 0);
  return std::all_of(d.begin(), d.end(), [](const auto& x) { return x.has_value(); });
}

// ---------------------------------------------------------------------------
// Broadcast

struct Delivery {
  std::size_t node = 0;
  std::size_t hop = 0;  // arrival time in unit delays
  std::size_t from = 0;
  bool operator==(const Delivery&) const = default;
};

/// Decides whether `from` passes the message on to `to`.
using RelayPolicy = std::function<bool(std::size_t from, std::size_t to)>;

/// Flood from `origin` with unit delay per hop. Each reachable up-node
/// appears once, ordered by (hop, node). Down nodes neither receive nor relay.
inline std::vector<Delivery> broadcast(const Topology& g, std::size_t origin, const std::vector<bool>& up,
                                       const RelayPolicy& relay = nullptr) {
  std::vector<Delivery> out;
  if (origin >= g.size() || !up.at(origin)) return out;
  std::vector<bool> seen(g.size(), false);
  seen[origin] = true;
  std::vector<std::size_t> frontier{origin};
  for (std::size_t hop = 1; !frontier.empty(); ++hop) {
    std::vector<Delivery> arrivals;
    for (auto v : frontier)
      for (auto w : g.neighbors(v)) {
        if (seen[w] || !up.at(w)) continue;
        if (relay && !relay(v, w)) continue;
        seen[w] = true;
        arrivals.push_back({w, hop, v});
      }
    std::sort(arrivals.begin(), arrivals.end(), [](const Delivery& a, const Delivery& b) { return a.node < b.node; });
    frontier.clear();
    for (const auto& d : arrivals) {
      frontier.push_back(d.node);
      out.push_back(d);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Voting

struct VoteCollection {
  bool accepted = false;
  std::vector<Vote> votes;  // distinct valid votes, sorted by voter id
  std::uint64_t required = 0;
};

/// Keeps distinct votes that verify against `block` under `quorum`; when
/// `eligible` is given only those voters count.
inline VoteCollection collect_votes(const Block& block, HashAlgo algo, const std::vector<Vote>& offered,
                                    const VoteQuorum& quorum, const std::set<IdentityId>* eligible = nullptr,
                                    VerifyCache* cache = nullptr) {
  VoteCollection out;
  out.required = quorum.required();
  auto header_hash = hash_header(block.header, algo);
  std::set<IdentityId> seen;
  for (const auto& v : offered) {
    if (seen.count(v.voter)) continue;
    if (eligible && !eligible->count(v.voter)) continue;
    if (!vote_valid(v, header_hash, quorum.population, quorum.base, algo, cache)) continue;
    seen.insert(v.voter);
    out.votes.push_back(v);
  }
  std::sort(out.votes.begin(), out.votes.end(), [](const Vote& a, const Vote& b) { return a.voter < b.voter; });
  out.accepted = quorum.met(out.votes.size());
  return out;
}

// ---------------------------------------------------------------------------
// Nodes

enum class Honesty { Honest, Adversarial };

struct SimNode {
  std::string name;
  IdentityKeys keys;
  std::vector<std::size_t> neighbors;
  std::shared_ptr<const Chain> chain;  // local replica
  Honesty honesty = Honesty::Honest;
  bool up = true;
};

// ---------------------------------------------------------------------------
// Attacks

struct SybilAttack {
  std::uint32_t fake_identity_count = 0;
};
struct EclipseAttack {
  std::string victim;
  double adversarial_neighbor_fraction = 0.0;
};
struct MajorityAttack {
  double controlled_fraction = 0.0;
  std::uint32_t duration_steps = 1;
  double power_rate_per_node_step = 1.0;
};

struct AttackProfile {
  std::variant<SybilAttack, EclipseAttack, MajorityAttack> variant;
  std::uint32_t start_step = 0;
  std::uint64_t seed = 0;

  void validate() const {
    std::visit(
        [](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, EclipseAttack>) {
            if (!(a.adversarial_neighbor_fraction >= 0.0 && a.adversarial_neighbor_fraction <= 1.0))
              throw Error(ErrorCode::SchemaViolation, "adversarial_neighbor_fraction must lie in [0,1]");
            if (a.victim.empty()) throw Error(ErrorCode::SchemaViolation, "eclipse victim must be named");
          } else if constexpr (std::is_same_v<T, MajorityAttack>) {
            if (!(a.controlled_fraction >= 0.0 && a.controlled_fraction <= 1.0))
              throw Error(ErrorCode::SchemaViolation, "controlled_fraction must lie in [0,1]");
            if (a.duration_steps < 1) throw Error(ErrorCode::SchemaViolation, "duration_steps must be at least 1");
            if (!(a.power_rate_per_node_step >= 0.0))
              throw Error(ErrorCode::SchemaViolation, "power_rate_per_node_step must be non-negative");
          }
        },
        variant);
  }
};

/// ceil(fraction * n), robust against representation error such as 0.51*100.
inline std::uint64_t fraction_count(double fraction, std::uint64_t n) {
  auto exact = fraction * static_cast<double>(n);
  auto rounded = std::round(exact);
  if (std::fabs(exact - rounded) < 1e-9) return static_cast<std::uint64_t>(rounded);
  return static_cast<std::uint64_t>(std::ceil(exact));
}

inline double attack_cost(std::uint64_t steps_active, std::uint64_t controlled_nodes, double rate_per_node_step) {
  return static_cast<double>(steps_active) * static_cast<double>(controlled_nodes) * rate_per_node_step;
}

inline double attack_cost(const MajorityAttack& profile, std::uint64_t population, std::uint64_t steps_active) {
  return attack_cost(steps_active, fraction_count(profile.controlled_fraction, population),
                     profile.power_rate_per_node_step);
}

}  // namespace chainflow

#endif  // CHAINFLOW_NETWORK_HPP
