// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <unistd.h>

#include "../unit/support.hpp"
#include "chainflow/cli.hpp"

using namespace chainflow;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path scratch(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("chainflow-acceptance-" + tag + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// 50 blocks after genesis; every block carries one to three signed
/// transactions, some with sealed notes.
testing::TestNet long_chain(std::uint64_t seed) {
  testing::TestNet net{4, 4, HashAlgo::Sha256, testing::supply_actors()};
  Rng rng(seed, "acceptance-chain");
  for (int b = 0; b < 50; ++b) {
    std::vector<SignedTransaction> txs;
    auto n = 1 + rng.below(3);
    for (std::uint64_t t = 0; t < n; ++t) {
      const auto& from = net.actors[rng.below(net.actors.size())];
      const auto& to = net.actors[rng.below(net.actors.size())];
      Payment p{"from-" + std::to_string(b), "to-" + std::to_string(t), 1 + rng.below(1000),
                "PO-" + std::to_string(seed), Stage::ProducerReceipt};
      std::optional<SealedPayload> sealed;
      if (rng.below(2) == 0) {
        auto entropy = to_bytes("e" + std::to_string(b) + "-" + std::to_string(t));
        sealed = seal(to_bytes("note " + std::to_string(rng.next())), to.identity, entropy);
      }
      txs.push_back(sign_transaction(p, sealed, from));
    }
    net.commit_block(std::move(txs), seed * 1000);
  }
  return net;
}

Outcome tamper_detection() {
  auto t0 = Clock::now();
  VerifyCache cache;
  std::size_t false_alarms = 0;
  for (std::uint64_t s = 1; s <= 5; ++s)
    if (!verify_chain(long_chain(s).chain, &cache).ok()) ++false_alarms;

  auto net = long_chain(11);
  const auto& blocks = net.chain.blocks();
  if (blocks.size() != 51) return {false, "chain has " + std::to_string(blocks.size()) + " blocks"};
  std::vector<Bytes> records;
  DecodedChainFile clean;
  for (const auto& b : blocks) {
    records.push_back(canonical_encode(b));
    clean.blocks.emplace_back(b);
    clean.errors.emplace_back();
  }
  if (!verify_chain_file(clean, &cache).ok()) ++false_alarms;

  Rng rng(2024, "mutations");
  std::size_t detected = 0, missed = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    auto target = 1 + rng.below(50);
    auto rec = records[target];
    rec[rng.below(rec.size())] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    auto file = clean;
    try {
      file.blocks[target] = decode_block(rec);
    } catch (const Error& e) {
      file.blocks[target] = std::nullopt;
      file.errors[target] = e.what();
    }
    auto failure = verify_chain_file(file, &cache).first_failure();
    if (failure && failure->index <= target) ++detected;
    else ++missed;
  }
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << detected << "/" << trials << " mutations flagged at or before the mutated block, " << false_alarms
    << " false alarms on 6 clean chains, " << secs << " s";
  return {detected == static_cast<std::size_t>(trials) && false_alarms == 0 && secs < 30.0, d.str()};
}

/// Chain whose genesis enrolls `n` validators, difficulty 0.
struct Population {
  std::vector<IdentityKeys> voters;
  Chain chain;
};

Population population_of(const std::vector<IdentityKeys>& pool, std::size_t n) {
  static const auto issuer = generate_identity(Role::Node, 900);
  std::vector<IdentityKeys> members(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("v-" + std::to_string(i));
  auto chain = testing::TestNet::genesis_chain(issuer, members, names, 0, HashAlgo::Sha256,
                                               RegistryMode::Centralized, VoteBase::RegisteredOnly);
  return {members, chain};
}

Outcome threshold_exactness() {
  std::vector<IdentityKeys> pool;
  for (std::uint64_t i = 0; i < 200; ++i) pool.push_back(generate_identity(Role::Node, 7000 + i));
  std::size_t wrong = 0;
  std::string first_wrong;
  for (std::uint32_t n = 1; n <= 200; ++n) {
    // Independent oracle: smallest k with 100k >= 51n.
    std::uint32_t oracle = 0;
    while (100 * oracle < 51 * n) ++oracle;
    auto pop = population_of(pool, n);
    auto tx = sign_transaction(Payment{"a", "b", n, "PO-" + std::to_string(n), Stage::ProducerReceipt}, std::nullopt,
                               pool[0]);
    auto block = build_block(pop.chain, {tx}, pool[0].identity.id, 1000, n);
    block.quorum_population = n;
    auto h = hash_header(block.header, HashAlgo::Sha256);
    auto accepts = [&](std::uint32_t k) {
      auto b = block;
      for (std::uint32_t i = 0; i < k; ++i) b.votes.push_back(make_vote(pop.voters[i], h, n, VoteBase::RegisteredOnly));
      try {
        append_block(pop.chain, b, VoteQuorum{VoteBase::RegisteredOnly, n});
        return true;
      } catch (const Error&) {
        return false;
      }
    };
    bool ok = accepts(oracle) && (oracle == 0 || !accepts(oracle - 1)) &&
              VoteQuorum::required_for(n) == oracle;
    if (!ok && wrong++ == 0) first_wrong = " first mismatch at N=" + std::to_string(n);
  }
  bool examples = VoteQuorum::required_for(4) == 3 && VoteQuorum::required_for(100) == 51;
  return {wrong == 0 && examples, "N=1..200 flip points vs oracle, " + std::to_string(wrong) + " mismatches" + first_wrong};
}

int cli_run_exit(const std::string& name) {
  auto dir = scratch("cli-" + name);
  cli::RunOptions o;
  o.scenario_path = testing::scenario_path(name);
  o.out_dir = dir;
  std::ostringstream out, err;
  int rc = cli::cmd_run(o, out, err);
  fs::remove_all(dir);
  return rc;
}

Outcome majority_semantics() {
  auto win = run(testing::scenario("majority_051")).report;
  auto lose = run(testing::scenario("majority_049")).report;
  int win_exit = cli_run_exit("majority_051");
  bool thresholds = win.integrity_violations >= 1 && win.attacks["majority"]["fault_block_accepted"] == true &&
                    win_exit == cli::Violations && lose.attacks["majority"]["fault_block_accepted"] == false &&
                    lose.integrity_violations == 0 && lose.blocks_rejected >= 1;

  auto base = testing::scenario_doc("majority_051");
  Rng rng(51, "majority-sweep");
  std::size_t altered = 0, rewrites = 0, broken = 0, prefix_lost = 0, engaged = 0;
  for (int i = 0; i < 100; ++i) {
    auto doc = base;
    auto seed = 1000 + rng.below(1000000);
    auto start = 2 + rng.below(6);
    doc["seed"] = seed;
    doc["attacks"][0]["controlled_fraction"] = 0.3 + 0.65 * rng.unit();
    doc["attacks"][0]["start_step"] = start;
    doc["attacks"][0]["duration_steps"] = 1 + rng.below(6);
    auto out = run(scenario_from_json(doc));
    const auto& m = out.report.attacks["majority"];
    if (m["steps_active"].get<std::uint64_t>() > 0) ++engaged;
    altered += m["existing_blocks_altered"].get<std::uint64_t>();
    rewrites += m["rewrites_accepted"].get<std::uint64_t>();
    if (!verify_chain(out.chain).ok()) ++broken;

    // The chain an attack-free run had built before the attack began must
    // survive unchanged as a prefix.
    auto quiet = doc;
    quiet.erase("attacks");
    quiet["steps"] = start;
    auto before = run(scenario_from_json(quiet)).chain;
    for (std::size_t b = 0; b < before.size(); ++b)
      if (b >= out.chain.size() || !(before.at(b) == out.chain.at(b))) {
        ++prefix_lost;
        break;
      }
  }
  std::ostringstream d;
  d << "0.51 exit " << win_exit << " violations " << win.integrity_violations << ", 0.49 rejected "
    << lose.blocks_rejected << "; 100 random runs (" << engaged << " engaged): altered " << altered << ", rewrites "
    << rewrites << ", invalid chains " << broken << ", lost prefixes " << prefix_lost;
  return {thresholds && altered == 0 && rewrites == 0 && broken == 0 && prefix_lost == 0 && engaged > 0, d.str()};
}

Outcome eclipse_isolation() {
  auto full = run(testing::scenario("eclipse_full")).report;
  const auto& e = full.attacks["eclipse"];
  auto honest_after = e["victim_honest_blocks_after_start"].get<std::uint64_t>();
  auto availability = e["victim_availability"].get<double>();
  auto doc = testing::scenario_doc("eclipse_mitigated");
  auto mitigated = report_hash(run(scenario_from_json(doc)).report);
  doc.erase("attacks");
  auto baseline = report_hash(run(scenario_from_json(doc)).report);
  std::ostringstream d;
  d << "victim honest blocks after start " << honest_after << ", availability " << availability
    << ", mitigated report " << (mitigated == baseline ? "equals" : "differs from") << " the no-attack baseline";
  return {honest_after == 0 && availability < 0.5 && mitigated == baseline, d.str()};
}

Outcome sybil_neutralization() {
  auto open_cfg = testing::scenario("sybil_user_centric");
  auto open = run(open_cfg).report;
  bool quorum = open.attacks["sybil"]["fault_block_accepted"] == true;
  auto closed = report_hash(run(testing::scenario("sybil_centralized")).report);
  auto baseline = report_hash(run(testing::scenario("sybil_network_baseline")).report);
  std::ostringstream d;
  d << "user-centric/all-observed fault block " << (quorum ? "accepted" : "rejected")
    << ", centralized report " << (closed == baseline ? "equals" : "differs from") << " baseline";
  return {quorum && closed == baseline, d.str()};
}

Outcome provenance() {
  auto out = run(testing::scenario("baseline"));
  std::size_t stage_blocks = 0, stage_events = 0;
  for (const auto& b : out.chain.blocks()) {
    std::size_t here = 0;
    for (const auto& tx : b.transactions)
      if (stage_of(kind_of(tx.event))) ++here;
    stage_events += here;
    if (here > 0) ++stage_blocks;
  }
  auto state = fold_chain(out.chain);
  std::map<Stage, int> pays;
  for (const auto& p : state.payments)
    if (p.order_number == "PO-1001") ++pays[p.stage];
  bool one_each = pays.size() == 3 && pays[Stage::ProducerReceipt] == 1 && pays[Stage::WarehouseReceipt] == 1 &&
                  pays[Stage::RetailReceipt] == 1;
  auto trail = trace(out.chain, "PKG-PO-1001");
  bool ordered = trail.entries.size() == stage_count;
  for (std::size_t i = 0; ordered && i < trail.entries.size(); ++i)
    ordered = stage_of(kind_of(trail.entries[i].tx.event)) == static_cast<Stage>(i);

  auto bad = run(testing::scenario("quantity_mismatch"));
  auto bad_state = fold_chain(bad.chain);
  bool disputed = bad_state.disputes.size() == 1 && bad_state.progress.at("PO-1001").frozen &&
                  bad_state.payment_for("PO-1001", Stage::ProducerReceipt) == nullptr && bad_state.payments.empty();
  std::ostringstream d;
  d << stage_blocks << " stage blocks, " << state.payments.size() << " payments, trail of " << trail.entries.size()
    << (ordered ? " supplier-first" : " out of order") << "; mismatch: " << bad_state.disputes.size() << " dispute, "
    << bad_state.payments.size() << " payments";
  return {stage_blocks == stage_count && stage_events == stage_count && one_each && ordered && disputed, d.str()};
}

Outcome pow_statistics() {
  auto t0 = Clock::now();
  const int runs = 1000;
  const unsigned difficulty = 8;
  double sum = 0;
  BlockHeader h;
  h.index = 1;
  h.timestamp = 1000;
  for (int i = 0; i < runs; ++i) {
    h.timestamp = 1000 + i;
    sum += static_cast<double>(mine(h, difficulty, substream_seed(77, "acceptance-pow-" + std::to_string(i)),
                                    HashAlgo::Sha256, std::uint64_t{1} << 20)
                                   .attempts);
  }
  double mean = sum / runs;
  double p = std::ldexp(1.0, -static_cast<int>(difficulty));
  double sigma_mean = std::sqrt((1 - p) / (p * p)) / std::sqrt(static_cast<double>(runs));
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << "mean attempts " << mean << " vs 256, 3 sigma = " << 3 * sigma_mean << ", " << secs << " s";
  return {std::abs(mean - 256.0) <= 3 * sigma_mean && secs < 60.0, d.str()};
}

Outcome determinism() {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(CHAINFLOW_SCENARIO_DIR))
    if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
  std::sort(names.begin(), names.end());
  auto a = scratch("det-a"), b = scratch("det-b");
  std::size_t same = 0;
  std::set<std::string> attacks_seen;
  std::string first_diff;
  for (const auto& name : names) {
    for (const auto& dir : {a, b}) {
      cli::RunOptions o;
      o.scenario_path = testing::scenario_path(name);
      o.out_dir = dir;
      std::ostringstream out, err;
      cli::cmd_run(o, out, err);
    }
    auto file_hash = [&](const fs::path& dir, const std::string& suffix) {
      return sha256(read_file(dir / (name + suffix))).hex();
    };
    bool eq = file_hash(a, ".report.json") == file_hash(b, ".report.json") &&
              file_hash(a, ".chain.cfs") == file_hash(b, ".chain.cfs");
    if (eq) ++same;
    else if (first_diff.empty()) first_diff = ", first difference " + name;
    for (const auto& atk : testing::scenario_doc(name).value("attacks", nlohmann::json::array()))
      attacks_seen.insert(atk["type"].get<std::string>());
  }
  fs::remove_all(a);
  fs::remove_all(b);
  std::ostringstream d;
  d << same << "/" << names.size() << " scenarios byte-identical across two runs, attack types covered "
    << attacks_seen.size() << first_diff;
  return {same == names.size() && names.size() >= 10 && attacks_seen.size() == 3, d.str()};
}

Outcome cost_monotonicity() {
  std::size_t violations = 0;
  for (std::uint64_t nodes : {1u, 11u, 51u})
    for (double rate : {0.5, 1.5}) {
      double prev = attack_cost(0, nodes, rate);
      for (std::uint64_t d = 1; d <= 100; ++d) {
        double c = attack_cost(d, nodes, rate);
        if (!(c > prev)) ++violations;
        prev = c;
      }
    }
  return {violations == 0, "durations 1..100 for 6 node/rate pairs, " + std::to_string(violations) + " non-increases"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"tamper detection", tamper_detection},
      {"51% threshold exactness", threshold_exactness},
      {"majority attack semantics", majority_semantics},
      {"eclipse isolation and mitigation", eclipse_isolation},
      {"sybil neutralization", sybil_neutralization},
      {"end-to-end provenance", provenance},
      {"proof-of-work statistics", pow_statistics},
      {"determinism", determinism},
      {"attack cost monotonicity", cost_monotonicity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
