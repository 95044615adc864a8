#include <catch_amalgamated.hpp>

#include <cmath>

#include "support.hpp"

using namespace chainflow;
using testing::TestNet;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

Block golden_genesis() {
  PublicKey issuer;
  issuer.bytes.fill(0x11);
  return make_genesis(GenesisMarker{"chainflow-golden", HashAlgo::Sha256, 8, RegistryMode::Centralized,
                                    VoteBase::RegisteredOnly, {issuer}});
}

SignedTransaction note(const IdentityKeys& author, const std::string& order, std::uint64_t amount) {
  return sign_transaction(Payment{"a", "b", amount, order, Stage::ProducerReceipt}, std::nullopt, author);
}

}  // namespace

TEST_CASE("genesis block encodes to the fixture bytes", "[ledger][golden]") {
  const auto& g = testing::golden();
  auto genesis = golden_genesis();
  CHECK(to_hex(canonical_encode(genesis)) == g["genesis_block_hex"].get<std::string>());
  CHECK(hash_header(genesis.header, HashAlgo::Sha256).hex() == g["genesis_hash_sha256"].get<std::string>());
  CHECK(decode_block(from_hex(g["genesis_block_hex"].get<std::string>())) == genesis);
  Chain chain(genesis);
  CHECK(verify_chain(chain).ok());
}

TEST_CASE("signed transaction, header and vote match the fixture", "[ledger][golden]") {
  const auto& g = testing::golden();
  auto keys = generate_identity(Role::Producer, 7);
  auto tx = sign_transaction(Payment{"bolt-works", "acme-minerals", 500, "PO-1", Stage::ProducerReceipt}, std::nullopt,
                             keys);
  ByteWriter w;
  encode_transaction(w, tx);
  CHECK(to_hex(w.bytes()) == g["payment_tx_hex"].get<std::string>());
  CHECK(transaction_signature_valid(tx));

  BlockHeader h;
  h.index = 1;
  h.prev_hash = HashDigest::from_hex(g["genesis_hash_sha256"].get<std::string>());
  h.timestamp = 1000;
  h.nonce = 12345;
  h.payload_hash = payload_hash({tx}, HashAlgo::Sha256);
  h.proposer = keys.identity.id;
  CHECK(to_hex(encode_header(h)) == g["block1_header_hex"].get<std::string>());
  CHECK(hash_header(h, HashAlgo::Sha256).hex() == g["block1_hash_sha256"].get<std::string>());
  CHECK(hash_header(h, HashAlgo::Sha256d).hex() == g["block1_hash_sha256d"].get<std::string>());

  auto vote = make_vote(keys, hash_header(h, HashAlgo::Sha256), 4, VoteBase::RegisteredOnly);
  CHECK(to_hex(vote.signature) == g["block1_vote_signature_hex"].get<std::string>());
}

TEST_CASE("blocks round-trip through the canonical encoding", "[ledger]") {
  TestNet net(3, 4);
  auto producer = generate_identity(Role::Producer, 60);
  auto sealed = seal(to_bytes("secret"), producer.identity, to_bytes("e"));
  net.commit_block({sign_transaction(Payment{"x", "y", 5, "PO", Stage::RetailReceipt}, sealed, producer)});
  for (const auto& b : net.chain.blocks()) CHECK(decode_block(canonical_encode(b)) == b);
  auto bytes = canonical_encode(net.chain.head());
  bytes.push_back(0);
  CHECK_THROWS_AS(decode_block(bytes), Error);
}

TEST_CASE("quorum threshold is the ceiling of 51 percent", "[ledger][quorum]") {
  for (std::uint64_t n = 1; n <= 200; ++n) {
    std::uint64_t oracle = 0;
    while (oracle * 100 < 51 * n) ++oracle;
    INFO("population " << n);
    REQUIRE(VoteQuorum::required_for(n) == oracle);
    VoteQuorum q{VoteBase::RegisteredOnly, static_cast<std::uint32_t>(n)};
    CHECK_FALSE(q.met(oracle - 1));
    CHECK(q.met(oracle));
    CHECK(q.met(n));
  }
  CHECK(VoteQuorum::required_for(4) == 3);
  CHECK(VoteQuorum::required_for(100) == 51);
  CHECK_FALSE(VoteQuorum{VoteBase::RegisteredOnly, 0}.met(0));
}

TEST_CASE("append accepts exactly when enough registered validators vote", "[ledger][quorum]") {
  for (std::size_t n = 1; n <= 9; ++n) {
    TestNet net(n, 2);
    auto b = build_block(net.chain, {note(net.validators[0], "PO", 1)}, net.validators[0].identity.id, 10, 1);
    b.quorum_population = static_cast<std::uint32_t>(n);
    auto h = hash_header(b.header, HashAlgo::Sha256);
    VoteQuorum q{VoteBase::RegisteredOnly, static_cast<std::uint32_t>(n)};
    for (std::size_t k = 0; k <= n; ++k) {
      Block candidate = b;
      for (std::size_t i = 0; i < k; ++i)
        candidate.votes.push_back(make_vote(net.validators[i], h, q.population, VoteBase::RegisteredOnly));
      INFO("n=" << n << " k=" << k);
      if (k * 100 >= 51 * n) {
        CHECK(append_block(net.chain, candidate, q).size() == 2);
      } else {
        CHECK(code_of([&] { append_block(net.chain, candidate, q); }) == ErrorCode::QuorumNotMet);
      }
    }
  }
}

TEST_CASE("append rejects bad links, proof of work and votes", "[ledger]") {
  TestNet net(4, 6);
  auto tx = note(net.validators[0], "PO", 1);
  auto good = build_block(net.chain, {tx}, net.validators[0].identity.id, 10, 3);
  good.quorum_population = 4;
  VoteQuorum q{VoteBase::RegisteredOnly, 4};
  auto h = hash_header(good.header, HashAlgo::Sha256);
  for (const auto& v : net.validators) good.votes.push_back(make_vote(v, h, 4, VoteBase::RegisteredOnly));
  REQUIRE(append_block(net.chain, good, q).size() == 2);

  SECTION("link") {
    auto b = good;
    b.header.prev_hash = HashDigest::zero();
    CHECK(code_of([&] { append_block(net.chain, b, q); }) == ErrorCode::LinkMismatch);
    b = good;
    b.header.index = 5;
    CHECK(code_of([&] { append_block(net.chain, b, q); }) == ErrorCode::LinkMismatch);
  }
  SECTION("proof of work") {
    auto b = good;
    do ++b.header.nonce;
    while (hash_header(b.header, HashAlgo::Sha256).leading_zero_bits() >= 6);
    CHECK(code_of([&] { append_block(net.chain, b, q); }) == ErrorCode::PoWInvalid);
  }
  SECTION("outsider votes do not count") {
    auto b = good;
    b.votes.resize(2);
    auto outsider = generate_identity(Role::Node, 999);
    b.votes.push_back(make_vote(outsider, h, 4, VoteBase::RegisteredOnly));
    CHECK(code_of([&] { append_block(net.chain, b, q); }) == ErrorCode::QuorumNotMet);
  }
  SECTION("duplicate votes do not count") {
    auto b = good;
    b.votes = {b.votes[0], b.votes[0], b.votes[1]};
    CHECK(code_of([&] { append_block(net.chain, b, q); }) == ErrorCode::QuorumNotMet);
  }
  SECTION("votes for another population") {
    auto b = good;
    b.quorum_population = 3;
    CHECK(code_of([&] { append_block(net.chain, b, VoteQuorum{VoteBase::RegisteredOnly, 3}); }) ==
          ErrorCode::QuorumNotMet);
    CHECK(code_of([&] { append_block(net.chain, b, q); }) == ErrorCode::QuorumNotMet);
  }
  SECTION("forged transaction signature") {
    auto b = good;
    std::get<Payment>(b.transactions[0].event).amount = 2;
    b.header.payload_hash = payload_hash(b.transactions, HashAlgo::Sha256);
    b.header.nonce = mine(b.header, 6, 1, HashAlgo::Sha256).nonce;
    auto h2 = hash_header(b.header, HashAlgo::Sha256);
    b.votes.clear();
    for (const auto& v : net.validators) b.votes.push_back(make_vote(v, h2, 4, VoteBase::RegisteredOnly));
    CHECK(code_of([&] { append_block(net.chain, b, q); }) == ErrorCode::Malformed);
    CHECK(check_candidate(net.chain, b).cause == FailureCause::BadSignature);
  }
  SECTION("the original chain is untouched by a failed append") {
    auto before = net.chain;
    auto b = good;
    b.votes.clear();
    CHECK_THROWS(append_block(net.chain, b, q));
    CHECK(net.chain == before);
  }
}

TEST_CASE("mining meets the difficulty and honours its budget", "[ledger][mining]") {
  BlockHeader h;
  h.index = 3;
  for (unsigned d : {0u, 1u, 4u, 8u, 10u}) {
    auto r = mine(h, d, 77, HashAlgo::Sha256);
    auto mined = h;
    mined.nonce = r.nonce;
    CHECK(hash_header(mined, HashAlgo::Sha256).leading_zero_bits() >= d);
    CHECK(r.attempts >= 1);
    CHECK(mine(h, d, 77, HashAlgo::Sha256).nonce == r.nonce);
  }
  CHECK(code_of([&] { mine(h, 30, 1, HashAlgo::Sha256, 16); }) == ErrorCode::Exhausted);
  CHECK(code_of([&] { mine(h, 33, 1, HashAlgo::Sha256); }) == ErrorCode::InvalidArgument);
  CHECK(default_mining_budget(8) == 65536);
}

TEST_CASE("mean mining attempts follow the geometric distribution", "[ledger][mining]") {
  // 400 runs at 6 bits: mean 64, sigma of the mean sqrt(1-p)/p/sqrt(400) ~ 3.2.
  const double p = 1.0 / 64;
  double sum = 0;
  BlockHeader h;
  for (std::uint64_t s = 0; s < 400; ++s) {
    h.index = s;
    sum += static_cast<double>(mine(h, 6, s, HashAlgo::Sha256).attempts);
  }
  double mean = sum / 400;
  double sigma = std::sqrt(1 - p) / p / std::sqrt(400.0);
  CHECK(std::fabs(mean - 64) < 3 * sigma);
}

TEST_CASE("verify_chain reports the first failure and poisons descendants", "[ledger]") {
  TestNet net(4, 4);
  for (int i = 0; i < 6; ++i) net.commit_block({note(net.validators[i % 4], "PO-" + std::to_string(i), 1 + i)});
  REQUIRE(verify_chain(net.chain).ok());
  REQUIRE(verify_chain(net.chain).blocks.size() == 7);

  auto blocks = net.chain.blocks();
  blocks[3].votes.pop_back();
  blocks[3].votes.pop_back();
  auto report = verify_chain(Chain::from_blocks(blocks));
  REQUIRE(report.first_failure());
  CHECK(report.first_failure()->index == 3);
  CHECK(report.first_failure()->cause == FailureCause::QuorumNotMet);
  for (std::size_t i = 4; i < 7; ++i) CHECK(report.blocks[i].cause == FailureCause::AncestorInvalid);
  for (std::size_t i = 0; i < 3; ++i) CHECK(report.blocks[i].ok());
}

TEST_CASE("single-byte tampering is always caught at or before the block", "[ledger][tamper]") {
  TestNet net(3, 4);
  for (int i = 0; i < 8; ++i) net.commit_block({note(net.validators[i % 3], "PO", 10 + i)});
  VerifyCache cache;
  REQUIRE(verify_chain(net.chain, &cache).ok());
  Rng rng(2024, "tamper");
  for (int trial = 0; trial < 300; ++trial) {
    auto blocks = net.chain.blocks();
    auto i = static_cast<std::size_t>(rng.below(blocks.size()));
    auto bytes = canonical_encode(blocks[i]);
    auto pos = static_cast<std::size_t>(rng.below(bytes.size()));
    bytes[pos] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    INFO("block " << i << " byte " << pos);
    try {
      blocks[i] = decode_block(bytes);
    } catch (const Error&) {
      continue;  // undecodable records are flagged Malformed at this block
    }
    auto report = verify_chain(Chain::from_blocks(blocks), &cache);
    auto f = report.first_failure();
    REQUIRE(f);
    CHECK(f->index <= i);
  }
}

TEST_CASE("timestamps never regress", "[ledger]") {
  CHECK(decentralized_timestamp({5, 1, 9}, 0) == 5);
  CHECK(decentralized_timestamp({5, 1, 9, 7}, 0) == 5);
  CHECK(decentralized_timestamp({5, 1, 9}, 6) == 6);
  CHECK(decentralized_timestamp({}, 4) == 4);

  TestNet net(2, 2);
  net.commit_block({note(net.validators[0], "PO", 1)});
  auto b = build_block(net.chain, {note(net.validators[1], "PO", 2)}, net.validators[0].identity.id,
                       net.chain.head().header.timestamp - 1, 4);
  b.quorum_population = 2;
  auto h = hash_header(b.header, HashAlgo::Sha256);
  for (const auto& v : net.validators) b.votes.push_back(make_vote(v, h, 2, VoteBase::RegisteredOnly));
  CHECK(check_candidate(net.chain, b).cause == FailureCause::TimestampRegression);
}

TEST_CASE("genesis must start with an unsigned marker", "[ledger]") {
  Block empty;
  CHECK_THROWS_AS(Chain(empty), Error);
  auto g = golden_genesis();
  auto params = params_from_genesis(g);
  REQUIRE(params);
  CHECK(params->difficulty == 8);
  CHECK(params->issuers.size() == 1);

  auto signer = generate_identity(Role::Node, 3);
  auto bad = g;
  bad.transactions[0].author = signer.identity.id;
  bad.header.payload_hash = payload_hash(bad.transactions, HashAlgo::Sha256);
  CHECK(verify_chain(Chain::from_blocks({bad})).first_failure()->cause == FailureCause::GenesisInvalid);

  auto stamped = g;
  stamped.header.timestamp = 5;
  CHECK(verify_chain(Chain::from_blocks({stamped})).first_failure()->cause == FailureCause::GenesisInvalid);
}

TEST_CASE("all hash algorithms build verifiable chains", "[ledger]") {
  for (auto algo : {HashAlgo::Sha256, HashAlgo::Sha256d, HashAlgo::Scrypt}) {
    TestNet net(2, algo == HashAlgo::Scrypt ? 1 : 4, algo);
    net.commit_block({note(net.validators[0], "PO", 1)});
    INFO(to_string(algo));
    CHECK(verify_chain(net.chain).ok());
  }
}

TEST_CASE("chain files round-trip and report framing errors", "[ledger][file]") {
  TestNet net(2, 2);
  net.commit_block({note(net.validators[0], "PO", 1)});
  auto bytes = encode_chain_file(net.chain);
  auto decoded = decode_chain_file(bytes);
  REQUIRE(decoded.fully_decoded());
  CHECK(verify_chain_file(decoded).ok());

  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  try {
    decode_chain_file(truncated);
    FAIL("truncation not detected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Malformed);
    CHECK(std::string(e.what()).find("unexpected end of record") != std::string::npos);
  }
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_chain_file(bad_magic), Error);
  CHECK_THROWS_AS(decode_chain_file(Bytes{'C', 'F', 'S', '1'}), Error);
}
