#ifndef CHAINFLOW_LEDGER_HPP
#define CHAINFLOW_LEDGER_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "chainflow/bytes.hpp"
#include "chainflow/error.hpp"
#include "chainflow/events.hpp"
#include "chainflow/hash.hpp"
#include "chainflow/identity.hpp"

namespace chainflow {

// ---------------------------------------------------------------------------
// Transactions

struct SignedTransaction {
  Event event;
  std::optional<SealedPayload> sealed;
  IdentityId author;
  Bytes author_key;  // empty only for the unsigned genesis marker
  Signature signature;

  bool operator==(const SignedTransaction&) const = default;
};

inline Bytes transaction_signing_message(const Event& event, const std::optional<SealedPayload>& sealed,
                                         const IdentityId& author) {
  ByteWriter w;
  w.str("CFTX");
  encode_event(w, event);
  w.boolean(sealed.has_value());
  if (sealed) w.fixed(sealed->recipient.bytes()).blob(sealed->ciphertext);
  w.fixed(author.bytes());
  return std::move(w).bytes();
}

inline SignedTransaction sign_transaction(Event event, std::optional<SealedPayload> sealed, const IdentityKeys& author) {
  auto msg = transaction_signing_message(event, sealed, author.identity.id);
  auto sig = sign(msg, author.private_key);
  return SignedTransaction{std::move(event), std::move(sealed), author.identity.id,
                           author.identity.public_key.to_bytes(), std::move(sig)};
}

inline SignedTransaction genesis_marker_transaction(GenesisMarker marker) {
  return SignedTransaction{Event{std::move(marker)}, std::nullopt, IdentityId{}, {}, {}};
}

/// The author key must hash to the author id and the signature must verify
/// under it. Impersonating another identity fails one of the two.
inline bool transaction_signature_valid(const SignedTransaction& tx, HashAlgo id_algo = HashAlgo::Sha256) {
  if (tx.author_key.size() != PublicKey::size) return false;
  auto pk = PublicKey::from_bytes(tx.author_key);
  if (derive_identity_id(pk, id_algo) != tx.author) return false;
  return verify(transaction_signing_message(tx.event, tx.sealed, tx.author), tx.signature, pk);
}

inline void encode_transaction(ByteWriter& w, const SignedTransaction& tx) {
  encode_event(w, tx.event);
  w.boolean(tx.sealed.has_value());
  if (tx.sealed) w.fixed(tx.sealed->recipient.bytes()).blob(tx.sealed->ciphertext);
  w.fixed(tx.author.bytes()).blob(tx.author_key).blob(tx.signature);
}

inline SignedTransaction decode_transaction(ByteReader& r) {
  SignedTransaction tx;
  tx.event = decode_event(r);
  if (r.boolean()) {
    SealedPayload s;
    s.recipient = IdentityId(r.fixed<IdentityId::size>());
    s.ciphertext = r.blob();
    tx.sealed = std::move(s);
  }
  tx.author = IdentityId(r.fixed<IdentityId::size>());
  tx.author_key = r.blob();
  tx.signature = r.blob();
  return tx;
}

// ---------------------------------------------------------------------------
// Blocks

struct BlockHeader {
  std::uint64_t index = 0;
  HashDigest prev_hash;
  std::int64_t timestamp = 0;  // simulated milliseconds
  std::uint64_t nonce = 0;
  HashDigest payload_hash;
  IdentityId proposer;

  bool operator==(const BlockHeader&) const = default;
};

struct Vote {
  IdentityId voter;
  Bytes public_key;
  Signature signature;

  bool operator==(const Vote&) const = default;
};

struct Block {
  BlockHeader header;
  std::vector<SignedTransaction> transactions;
  std::uint32_t quorum_population = 0;  // vote base size the votes were counted against
  std::vector<Vote> votes;

  bool operator==(const Block&) const = default;
};

inline Bytes encode_header(const BlockHeader& h) {
  ByteWriter w;
  w.u64(h.index).fixed(h.prev_hash.bytes()).i64(h.timestamp).u64(h.nonce).fixed(h.payload_hash.bytes());
  w.fixed(h.proposer.bytes());
  return std::move(w).bytes();
}

inline BlockHeader decode_header(ByteReader& r) {
  BlockHeader h;
  h.index = r.u64();
  h.prev_hash = HashDigest(r.fixed<HashDigest::size>());
  h.timestamp = r.i64();
  h.nonce = r.u64();
  h.payload_hash = HashDigest(r.fixed<HashDigest::size>());
  h.proposer = IdentityId(r.fixed<IdentityId::size>());
  return h;
}

inline Bytes encode_payload(const std::vector<SignedTransaction>& txs) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(txs.size()));
  for (const auto& tx : txs) encode_transaction(w, tx);
  return std::move(w).bytes();
}

inline HashDigest payload_hash(const std::vector<SignedTransaction>& txs, HashAlgo algo) {
  return digest(algo, encode_payload(txs));
}

inline HashDigest hash_header(const BlockHeader& header, HashAlgo algo) {
  require_hash_algo(algo);
  return digest(algo, encode_header(header));
}

/// Layout: header | u32 tx count, transactions | u32 population |
/// u32 vote count, votes. All integers big-endian.
inline Bytes canonical_encode(const Block& block) {
  ByteWriter w;
  w.raw(encode_header(block.header));
  w.raw(encode_payload(block.transactions));
  w.u32(block.quorum_population);
  w.u32(static_cast<std::uint32_t>(block.votes.size()));
  for (const auto& v : block.votes) w.fixed(v.voter.bytes()).blob(v.public_key).blob(v.signature);
  return std::move(w).bytes();
}

inline Block decode_block(ByteView data) {
  ByteReader r(data);
  Block b;
  b.header = decode_header(r);
  auto ntx = r.count(1);
  for (std::uint32_t i = 0; i < ntx; ++i) b.transactions.push_back(decode_transaction(r));
  b.quorum_population = r.u32();
  auto nvotes = r.count(IdentityId::size + 8);
  for (std::uint32_t i = 0; i < nvotes; ++i) {
    Vote v;
    v.voter = IdentityId(r.fixed<IdentityId::size>());
    v.public_key = r.blob();
    v.signature = r.blob();
    b.votes.push_back(std::move(v));
  }
  r.expect_done();
  return b;
}

// ---------------------------------------------------------------------------
// Votes and quorum

/// Threshold fixed at 51/100 of the vote base, rounded up.
struct VoteQuorum {
  static constexpr std::uint64_t numerator = 51;
  static constexpr std::uint64_t denominator = 100;

  VoteBase base = VoteBase::RegisteredOnly;
  std::uint32_t population = 1;

  static std::uint64_t required_for(std::uint64_t population) {
    return (numerator * population + denominator - 1) / denominator;
  }
  std::uint64_t required() const { return required_for(population); }
  bool met(std::uint64_t votes) const { return population > 0 && votes >= required(); }
};

inline Bytes vote_message(const HashDigest& header_hash, std::uint32_t population, VoteBase base) {
  ByteWriter w;
  w.str("CFVOTE").fixed(header_hash.bytes()).u32(population).u8(static_cast<std::uint8_t>(base));
  return std::move(w).bytes();
}

inline Vote make_vote(const IdentityKeys& voter, const HashDigest& header_hash, std::uint32_t population,
                      VoteBase base) {
  return Vote{voter.identity.id, voter.identity.public_key.to_bytes(),
              sign(vote_message(header_hash, population, base), voter.private_key)};
}

/// Memo of signature checks keyed by (key, message, signature). Purely an
/// optimisation: results are identical with or without it.
class VerifyCache {
 public:
  bool check(ByteView message, ByteView signature, ByteView public_key) {
    ByteWriter w;
    w.blob(public_key).blob(message).blob(signature);
    auto key = sha256(w.bytes());
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool ok = false;
    try {
      ok = verify(message, signature, public_key);
    } catch (const Error&) {
      ok = false;
    }
    memo_.emplace(key, ok);
    return ok;
  }

 private:
  std::map<HashDigest, bool> memo_;
};

inline bool vote_valid(const Vote& v, const HashDigest& header_hash, std::uint32_t population, VoteBase base,
                       HashAlgo id_algo, VerifyCache* cache = nullptr) {
  if (v.public_key.size() != PublicKey::size) return false;
  if (derive_identity_id(PublicKey::from_bytes(v.public_key), id_algo) != v.voter) return false;
  auto msg = vote_message(header_hash, population, base);
  if (cache) return cache->check(msg, v.signature, v.public_key);
  return verify(msg, v.signature, v.public_key);
}

// ---------------------------------------------------------------------------
// Mining

struct MiningResult {
  std::uint64_t nonce = 0;
  std::uint64_t attempts = 0;
};

inline constexpr unsigned max_difficulty = 32;

inline std::uint64_t default_mining_budget(unsigned difficulty) { return std::uint64_t{1} << (difficulty + 8); }

/// Searches nonces start, start+1, ... where start is derived from rng_seed.
inline MiningResult mine(BlockHeader header, unsigned difficulty, std::uint64_t rng_seed, HashAlgo algo,
                         std::optional<std::uint64_t> budget = std::nullopt) {
  if (difficulty > max_difficulty)
    throw Error(ErrorCode::InvalidArgument, "difficulty above " + std::to_string(max_difficulty) + " bits");
  require_hash_algo(algo);
  const auto limit = budget.value_or(default_mining_budget(difficulty));
  ByteWriter w;
  w.str("chainflow-mine").u64(rng_seed);
  auto d = sha256(w.bytes());
  std::uint64_t start = 0;
  for (int i = 0; i < 8; ++i) start = (start << 8) | d.bytes()[static_cast<std::size_t>(i)];
  for (std::uint64_t attempt = 0; attempt < limit; ++attempt) {
    header.nonce = start + attempt;
    if (hash_header(header, algo).leading_zero_bits() >= difficulty) return MiningResult{header.nonce, attempt + 1};
  }
  throw Error(ErrorCode::Exhausted, "no nonce found within " + std::to_string(limit) + " attempts");
}

// ---------------------------------------------------------------------------
// Chain

struct ChainParams {
  HashAlgo algo = HashAlgo::Sha256;
  unsigned difficulty = 0;
  RegistryMode registry_mode = RegistryMode::Centralized;
  VoteBase vote_base = VoteBase::RegisteredOnly;
  std::vector<PublicKey> issuers;
  bool operator==(const ChainParams&) const = default;
};

inline std::optional<ChainParams> params_from_genesis(const Block& genesis) {
  if (genesis.transactions.empty()) return std::nullopt;
  const auto* marker = std::get_if<GenesisMarker>(&genesis.transactions.front().event);
  if (!marker) return std::nullopt;
  return ChainParams{marker->algo, marker->difficulty, marker->registry_mode, marker->vote_base, marker->issuer_keys};
}

/// Immutable block sequence; appending yields a new chain value.
class Chain {
 public:
  explicit Chain(Block genesis) {
    auto p = params_from_genesis(genesis);
    if (!p) throw Error(ErrorCode::Malformed, "genesis block must start with a genesis marker");
    params_ = *p;
    blocks_.push_back(std::move(genesis));
  }

  /// Builds a chain from decoded blocks without judging them; verify_chain
  /// reports any problems.
  static Chain from_blocks(std::vector<Block> blocks) {
    if (blocks.empty()) throw Error(ErrorCode::Malformed, "chain has no blocks");
    Chain c;
    c.params_ = params_from_genesis(blocks.front()).value_or(ChainParams{});
    c.blocks_ = std::move(blocks);
    return c;
  }

  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& at(std::size_t i) const { return blocks_.at(i); }
  const Block& head() const { return blocks_.back(); }
  std::size_t size() const { return blocks_.size(); }
  HashAlgo algo() const { return params_.algo; }
  unsigned difficulty() const { return params_.difficulty; }
  const ChainParams& params() const { return params_; }

  HashDigest head_hash() const { return hash_header(head().header, params_.algo); }

  Chain with_block(Block b) const {
    Chain next = *this;
    next.blocks_.push_back(std::move(b));
    return next;
  }

  bool operator==(const Chain& other) const { return blocks_ == other.blocks_; }

 private:
  Chain() = default;

  ChainParams params_;
  std::vector<Block> blocks_;
};

inline Block make_genesis(GenesisMarker marker, std::vector<SignedTransaction> extra = {}) {
  Block g;
  auto algo = marker.algo;
  g.transactions.push_back(genesis_marker_transaction(std::move(marker)));
  for (auto& tx : extra) g.transactions.push_back(std::move(tx));
  g.header.payload_hash = payload_hash(g.transactions, algo);
  return g;
}

/// Builds and mines the next block on `chain`. Votes are attached separately.
inline Block build_block(const Chain& chain, std::vector<SignedTransaction> txs, const IdentityId& proposer,
                         std::int64_t timestamp, std::uint64_t mining_seed, MiningResult* stats = nullptr) {
  Block b;
  b.header.index = chain.size();
  b.header.prev_hash = chain.head_hash();
  b.header.timestamp = timestamp;
  b.header.proposer = proposer;
  b.transactions = std::move(txs);
  b.header.payload_hash = payload_hash(b.transactions, chain.algo());
  auto result = mine(b.header, chain.difficulty(), mining_seed, chain.algo());
  b.header.nonce = result.nonce;
  if (stats) *stats = result;
  return b;
}

// ---------------------------------------------------------------------------
// Verification

enum class FailureCause {
  None,
  Malformed,
  GenesisInvalid,
  IndexMismatch,
  LinkMismatch,
  TimestampRegression,
  PoWInvalid,
  EmptyBlock,
  PayloadMismatch,
  BadSignature,
  BadCredential,
  BadVote,
  DuplicateVote,
  IneligibleVoter,
  PopulationMismatch,
  QuorumNotMet,
  AncestorInvalid,
};

inline std::string_view to_string(FailureCause c) {
  switch (c) {
    case FailureCause::None: return "None";
    case FailureCause::Malformed: return "Malformed";
    case FailureCause::GenesisInvalid: return "GenesisInvalid";
    case FailureCause::IndexMismatch: return "IndexMismatch";
    case FailureCause::LinkMismatch: return "LinkMismatch";
    case FailureCause::TimestampRegression: return "TimestampRegression";
    case FailureCause::PoWInvalid: return "PoWInvalid";
    case FailureCause::EmptyBlock: return "EmptyBlock";
    case FailureCause::PayloadMismatch: return "PayloadMismatch";
    case FailureCause::BadSignature: return "BadSignature";
    case FailureCause::BadCredential: return "BadCredential";
    case FailureCause::BadVote: return "BadVote";
    case FailureCause::DuplicateVote: return "DuplicateVote";
    case FailureCause::IneligibleVoter: return "IneligibleVoter";
    case FailureCause::PopulationMismatch: return "PopulationMismatch";
    case FailureCause::QuorumNotMet: return "QuorumNotMet";
    case FailureCause::AncestorInvalid: return "AncestorInvalid";
  }
  return "Unknown";
}

struct BlockVerdict {
  std::size_t index = 0;
  FailureCause cause = FailureCause::None;
  std::string detail;

  bool ok() const { return cause == FailureCause::None; }
};

struct VerificationReport {
  std::vector<BlockVerdict> blocks;

  bool ok() const {
    for (const auto& b : blocks)
      if (!b.ok()) return false;
    return true;
  }

  std::optional<BlockVerdict> first_failure() const {
    for (const auto& b : blocks)
      if (!b.ok()) return b;
    return std::nullopt;
  }
};

namespace detail {

/// Enrolled identities as seen while walking the chain.
struct EnrollmentView {
  std::map<IdentityId, Role> roles;
  std::set<std::string> names;

  std::uint32_t voting_population() const {
    std::uint32_t n = 0;
    for (const auto& [id, role] : roles)
      if (is_voting_role(role)) ++n;
    return n;
  }
};

inline bool enrollment_credential_valid(const Enrollment& e, const ChainParams& params) {
  Identity ident{derive_identity_id(e.public_key, params.algo), e.public_key, e.role};
  auto registry = IdentityRegistry::with_mode(params.registry_mode, params.issuers, params.algo);
  return registry.credential_valid(ident, e.name, e.credential);
}

inline BlockVerdict check_transactions(const Block& b, std::size_t index, const ChainParams& params,
                                       EnrollmentView& view, VerifyCache* cache) {
  auto fail = [&](FailureCause c, std::string d) { return BlockVerdict{index, c, std::move(d)}; };
  for (std::size_t t = 0; t < b.transactions.size(); ++t) {
    const auto& tx = b.transactions[t];
    if (std::holds_alternative<GenesisMarker>(tx.event)) {
      if (index != 0 || t != 0) return fail(FailureCause::GenesisInvalid, "genesis marker outside genesis position");
      if (!tx.author.is_zero() || !tx.author_key.empty() || !tx.signature.empty() || tx.sealed)
        return fail(FailureCause::GenesisInvalid, "genesis marker must be unsigned");
      continue;
    }
    bool sig_ok = false;
    if (tx.author_key.size() == PublicKey::size &&
        derive_identity_id(PublicKey::from_bytes(tx.author_key), params.algo) == tx.author) {
      auto msg = transaction_signing_message(tx.event, tx.sealed, tx.author);
      sig_ok = cache ? cache->check(msg, tx.signature, tx.author_key) : verify(msg, tx.signature, tx.author_key);
    }
    if (!sig_ok) return fail(FailureCause::BadSignature, "transaction " + std::to_string(t) + " signature invalid");
    if (const auto* e = std::get_if<Enrollment>(&tx.event)) {
      auto id = derive_identity_id(e->public_key, params.algo);
      if (id != tx.author) return fail(FailureCause::BadCredential, "enrollment not authored by the enrollee");
      if (!enrollment_credential_valid(*e, params))
        return fail(FailureCause::BadCredential, "enrollment credential for '" + e->name + "' invalid");
      if (view.roles.count(id) || view.names.count(e->name))
        return fail(FailureCause::BadCredential, "duplicate enrollment for '" + e->name + "'");
      view.roles.emplace(id, e->role);
      view.names.insert(e->name);
    }
  }
  if (index == 0 && (b.transactions.empty() || !std::holds_alternative<GenesisMarker>(b.transactions.front().event)))
    return fail(FailureCause::GenesisInvalid, "genesis block must start with a genesis marker");
  return BlockVerdict{index, FailureCause::None, {}};
}

inline void absorb_enrollments(const Block& b, const ChainParams& params, EnrollmentView& view) {
  for (const auto& tx : b.transactions)
    if (const auto* e = std::get_if<Enrollment>(&tx.event)) {
      view.roles.emplace(derive_identity_id(e->public_key, params.algo), e->role);
      view.names.insert(e->name);
    }
}

}  // namespace detail

/// Checks one non-genesis block's votes against the quorum rule. Shared by
/// verify_chain and append_block.
inline BlockVerdict check_votes(const Block& b, const HashDigest& header_hash, const ChainParams& params,
                                const detail::EnrollmentView& view, VerifyCache* cache) {
  auto fail = [&](FailureCause c, std::string d) { return BlockVerdict{b.header.index, c, std::move(d)}; };
  const auto registered = view.voting_population();
  if (params.vote_base == VoteBase::RegisteredOnly && b.quorum_population != registered)
    return fail(FailureCause::PopulationMismatch, "population " + std::to_string(b.quorum_population) +
                                                      " does not match " + std::to_string(registered) +
                                                      " registered voters");
  if (params.vote_base == VoteBase::AllObserved && b.quorum_population < registered)
    return fail(FailureCause::PopulationMismatch, "observed population smaller than registered voters");
  std::set<IdentityId> seen;
  for (const auto& v : b.votes) {
    if (!vote_valid(v, header_hash, b.quorum_population, params.vote_base, params.algo, cache))
      return fail(FailureCause::BadVote, "vote by " + v.voter.hex() + " does not verify");
    if (!seen.insert(v.voter).second) return fail(FailureCause::DuplicateVote, "duplicate vote by " + v.voter.hex());
    if (params.vote_base == VoteBase::RegisteredOnly) {
      auto it = view.roles.find(v.voter);
      if (it == view.roles.end() || !is_voting_role(it->second))
        return fail(FailureCause::IneligibleVoter, "voter " + v.voter.hex() + " is not a registered validator");
    }
  }
  VoteQuorum q{params.vote_base, b.quorum_population};
  if (!q.met(seen.size()))
    return fail(FailureCause::QuorumNotMet, std::to_string(seen.size()) + " votes, " + std::to_string(q.required()) +
                                                " required");
  return BlockVerdict{b.header.index, FailureCause::None, {}};
}

/// With `with_votes` false the block is judged as an unvoted candidate, the
/// way a validator sees it before endorsing.
inline BlockVerdict check_block(const Block& b, std::size_t index, const Block* prev, const ChainParams& params,
                                detail::EnrollmentView& view, VerifyCache* cache, bool with_votes = true) {
  auto fail = [&](FailureCause c, std::string d) { return BlockVerdict{index, c, std::move(d)}; };
  const auto& h = b.header;
  if (h.index != index) return fail(FailureCause::IndexMismatch, "header index " + std::to_string(h.index));
  if (index == 0) {
    if (!h.prev_hash.is_zero() || h.timestamp != 0 || h.nonce != 0 || !h.proposer.is_zero())
      return fail(FailureCause::GenesisInvalid, "genesis header fields must be zero");
    if (b.quorum_population != 0 || !b.votes.empty())
      return fail(FailureCause::GenesisInvalid, "genesis carries no votes");
  } else {
    if (h.prev_hash != hash_header(prev->header, params.algo))
      return fail(FailureCause::LinkMismatch, "prev_hash does not match block " + std::to_string(index - 1));
    if (h.timestamp < prev->header.timestamp)
      return fail(FailureCause::TimestampRegression, "timestamp earlier than block " + std::to_string(index - 1));
  }
  HashDigest header_hash = hash_header(h, params.algo);
  if (index > 0 && header_hash.leading_zero_bits() < params.difficulty)
    return fail(FailureCause::PoWInvalid, "header hash has fewer than " + std::to_string(params.difficulty) +
                                              " leading zero bits");
  if (b.transactions.empty()) return fail(FailureCause::EmptyBlock, "block has no transactions");
  if (payload_hash(b.transactions, params.algo) != h.payload_hash)
    return fail(FailureCause::PayloadMismatch, "payload hash does not match transactions");
  if (index > 0 && with_votes) {
    auto vote_verdict = check_votes(b, header_hash, params, view, cache);
    if (!vote_verdict.ok()) return vote_verdict;
  }
  // Enrollments take effect after this block's own votes were counted.
  return detail::check_transactions(b, index, params, view, cache);
}

/// Failures are reported, never thrown. A failed block poisons every later
/// block.
inline VerificationReport verify_chain(const Chain& chain, VerifyCache* cache = nullptr) {
  VerificationReport report;
  const auto& params = chain.params();
  detail::EnrollmentView view;
  bool poisoned = false;
  if (!params_from_genesis(chain.at(0))) {
    report.blocks.push_back({0, FailureCause::GenesisInvalid, "genesis block must start with a genesis marker"});
    poisoned = true;
  } else if (!hash_algo_supported(params.algo)) {
    report.blocks.push_back({0, FailureCause::GenesisInvalid, "hash algorithm unsupported in this build"});
    poisoned = true;
  }
  for (std::size_t i = report.blocks.size(); i < chain.size(); ++i) {
    if (poisoned) {
      report.blocks.push_back({i, FailureCause::AncestorInvalid, "an earlier block failed"});
      continue;
    }
    auto verdict = check_block(chain.at(i), i, i == 0 ? nullptr : &chain.at(i - 1), params, view, cache);
    poisoned = !verdict.ok();
    report.blocks.push_back(std::move(verdict));
  }
  return report;
}

/// Enrollment view after the whole chain, for quorum checks on the next block.
inline detail::EnrollmentView enrollment_view(const Chain& chain) {
  detail::EnrollmentView view;
  for (const auto& b : chain.blocks()) detail::absorb_enrollments(b, chain.params(), view);
  return view;
}

inline std::uint32_t registered_voters(const Chain& chain) { return enrollment_view(chain).voting_population(); }

/// Structural check of an unvoted block proposed on top of `chain`.
inline BlockVerdict check_candidate(const Chain& chain, const Block& block, VerifyCache* cache = nullptr) {
  auto view = enrollment_view(chain);
  return check_block(block, chain.size(), &chain.head(), chain.params(), view, cache, false);
}

/// Appends iff the block links to the head, carries valid proof of work, and
/// its votes satisfy `quorum`. Otherwise throws and leaves `chain` untouched.
inline Chain append_block(const Chain& chain, const Block& block, const VoteQuorum& quorum,
                          VerifyCache* cache = nullptr) {
  const auto& params = chain.params();
  if (block.header.index != chain.size() || block.header.prev_hash != chain.head_hash())
    throw Error(ErrorCode::LinkMismatch, "block does not extend the current head");
  auto header_hash = hash_header(block.header, params.algo);
  if (header_hash.leading_zero_bits() < params.difficulty)
    throw Error(ErrorCode::PoWInvalid, "insufficient proof of work");
  if (block.quorum_population != quorum.population)
    throw Error(ErrorCode::QuorumNotMet, "block was voted against a different population");
  auto view = enrollment_view(chain);
  auto verdict = check_block(block, chain.size(), &chain.head(), params, view, cache);
  if (!verdict.ok()) {
    switch (verdict.cause) {
      case FailureCause::LinkMismatch: throw Error(ErrorCode::LinkMismatch, verdict.detail);
      case FailureCause::PoWInvalid: throw Error(ErrorCode::PoWInvalid, verdict.detail);
      case FailureCause::QuorumNotMet:
      case FailureCause::BadVote:
      case FailureCause::DuplicateVote:
      case FailureCause::IneligibleVoter:
      case FailureCause::PopulationMismatch: throw Error(ErrorCode::QuorumNotMet, verdict.detail);
      default: throw Error(ErrorCode::Malformed, std::string(to_string(verdict.cause)) + ": " + verdict.detail);
    }
  }
  return chain.with_block(block);
}

/// Median of validator-reported clocks (lower median for even counts),
/// clamped so timestamps never regress.
inline std::int64_t decentralized_timestamp(std::vector<std::int64_t> clocks, std::int64_t previous) {
  if (clocks.empty()) return previous;
  std::sort(clocks.begin(), clocks.end());
  auto median = clocks[(clocks.size() - 1) / 2];
  return std::max(median, previous);
}

}  // namespace chainflow

#endif  // CHAINFLOW_LEDGER_HPP
