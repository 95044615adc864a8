#ifndef CHAINFLOW_IDENTITY_HPP
#define CHAINFLOW_IDENTITY_HPP

#include <sodium.h>

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chainflow/bytes.hpp"
#include "chainflow/error.hpp"
#include "chainflow/hash.hpp"

namespace chainflow {

enum class Role : std::uint8_t { Supplier = 0, Producer, Warehouse, Retailer, Customer, Node, Attacker };

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::Supplier: return "Supplier";
    case Role::Producer: return "Producer";
    case Role::Warehouse: return "Warehouse";
    case Role::Retailer: return "Retailer";
    case Role::Customer: return "Customer";
    case Role::Node: return "Node";
    case Role::Attacker: return "Attacker";
  }
  return "Unknown";
}

inline std::optional<Role> parse_role(std::string_view s) {
  for (std::uint8_t i = 0; i <= static_cast<std::uint8_t>(Role::Attacker); ++i)
    if (to_string(static_cast<Role>(i)) == s) return static_cast<Role>(i);
  return std::nullopt;
}

inline Role role_from_byte(std::uint8_t b) {
  if (b > static_cast<std::uint8_t>(Role::Attacker)) throw Error(ErrorCode::Malformed, "unknown role tag");
  return static_cast<Role>(b);
}

/// Roles that take part in block validation.
inline bool is_voting_role(Role r) { return r != Role::Customer; }

class IdentityId {
 public:
  static constexpr std::size_t size = 16;
  using Array = std::array<std::uint8_t, size>;

  IdentityId() : bytes_{} {}
  explicit IdentityId(const Array& a) : bytes_(a) {}

  static IdentityId from_hex(std::string_view hex) {
    auto raw = chainflow::from_hex(hex);
    if (raw.size() != size) throw Error(ErrorCode::Malformed, "identity id must be 16 bytes");
    Array a{};
    std::copy(raw.begin(), raw.end(), a.begin());
    return IdentityId(a);
  }

  std::string hex() const { return to_hex(ByteView(bytes_.data(), bytes_.size())); }
  const Array& bytes() const { return bytes_; }
  bool is_zero() const { return *this == IdentityId{}; }

  auto operator<=>(const IdentityId&) const = default;

 private:
  Array bytes_;
};

/// Ed25519 verification key.
struct PublicKey {
  static constexpr std::size_t size = crypto_sign_PUBLICKEYBYTES;
  std::array<std::uint8_t, size> bytes{};

  static PublicKey from_bytes(ByteView raw) {
    if (raw.size() != size) throw Error(ErrorCode::MalformedKey, "public key must be 32 bytes");
    PublicKey pk;
    std::copy(raw.begin(), raw.end(), pk.bytes.begin());
    return pk;
  }
  ByteView view() const { return ByteView(bytes.data(), bytes.size()); }
  Bytes to_bytes() const { return Bytes(bytes.begin(), bytes.end()); }
  std::string hex() const { return to_hex(view()); }

  auto operator<=>(const PublicKey&) const = default;
};

/// Ed25519 signing key, stored as its 32-byte seed. Exported as hex for
/// simulated actors only; there is no protection of the material.
class PrivateKey {
 public:
  static PrivateKey from_seed(const std::array<std::uint8_t, crypto_sign_SEEDBYTES>& seed) {
    ensure_sodium();
    PrivateKey k;
    k.seed_ = seed;
    crypto_sign_seed_keypair(k.public_.bytes.data(), k.secret_.data(), seed.data());
    return k;
  }

  static PrivateKey from_hex(std::string_view hex) {
    Bytes raw;
    try {
      raw = chainflow::from_hex(hex);
    } catch (const Error&) {
      throw Error(ErrorCode::MalformedKey, "private key is not valid hex");
    }
    if (raw.size() != crypto_sign_SEEDBYTES) throw Error(ErrorCode::MalformedKey, "private key seed must be 32 bytes");
    std::array<std::uint8_t, crypto_sign_SEEDBYTES> seed{};
    std::copy(raw.begin(), raw.end(), seed.begin());
    return from_seed(seed);
  }

  std::string hex() const { return to_hex(ByteView(seed_.data(), seed_.size())); }
  const PublicKey& public_key() const { return public_; }
  const std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES>& secret() const { return secret_; }

 private:
  PrivateKey() = default;

  std::array<std::uint8_t, crypto_sign_SEEDBYTES> seed_{};
  std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> secret_{};
  PublicKey public_;
};

inline IdentityId derive_identity_id(const PublicKey& pk, HashAlgo algo = HashAlgo::Sha256) {
  auto d = digest(algo, pk.view());
  IdentityId::Array a{};
  std::copy_n(d.bytes().begin(), IdentityId::size, a.begin());
  return IdentityId(a);
}

struct Identity {
  IdentityId id;
  PublicKey public_key;
  Role role = Role::Node;

  bool operator==(const Identity&) const = default;
};

struct IdentityKeys {
  Identity identity;
  PrivateKey private_key;
};

inline IdentityKeys generate_identity(Role role, std::uint64_t rng_seed, HashAlgo algo = HashAlgo::Sha256) {
  ByteWriter w;
  w.str("chainflow-identity").u64(rng_seed);
  auto seed_digest = sha256(w.bytes());
  auto key = PrivateKey::from_seed(seed_digest.bytes());
  Identity ident{derive_identity_id(key.public_key(), algo), key.public_key(), role};
  return IdentityKeys{ident, key};
}

inline IdentityKeys identity_from_private_key(const PrivateKey& key, Role role, HashAlgo algo = HashAlgo::Sha256) {
  return IdentityKeys{Identity{derive_identity_id(key.public_key(), algo), key.public_key(), role}, key};
}

using Signature = Bytes;

inline Signature sign(ByteView message, const PrivateKey& key) {
  ensure_sodium();
  Signature sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), key.secret().data());
  return sig;
}

/// False for any mismatch; throws MalformedKey only when the key bytes
/// cannot be a verification key at all.
inline bool verify(ByteView message, ByteView signature, ByteView public_key) {
  ensure_sodium();
  if (public_key.size() != crypto_sign_PUBLICKEYBYTES) throw Error(ErrorCode::MalformedKey, "public key must be 32 bytes");
  if (signature.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(signature.data(), message.data(), message.size(), public_key.data()) == 0;
}

inline bool verify(ByteView message, ByteView signature, const PublicKey& pk) {
  return verify(message, signature, pk.view());
}

// ---------------------------------------------------------------------------
// Sealed payloads: X25519 envelope derived from the Ed25519 identity keys.
// The ephemeral key is derived from caller-supplied entropy so simulation
// output stays reproducible.

struct SealedPayload {
  IdentityId recipient;
  Bytes ciphertext;  // ephemeral public key || box(mac || message)

  bool operator==(const SealedPayload&) const = default;
};

namespace detail {
inline std::array<std::uint8_t, crypto_box_NONCEBYTES> seal_nonce(ByteView eph_pk, ByteView recipient_pk) {
  ByteWriter w;
  w.raw(eph_pk).raw(recipient_pk);
  auto d = sha256(w.bytes());
  std::array<std::uint8_t, crypto_box_NONCEBYTES> n{};
  std::copy_n(d.bytes().begin(), n.size(), n.begin());
  return n;
}
}  // namespace detail

inline SealedPayload seal(ByteView plaintext, const Identity& recipient, ByteView entropy) {
  ensure_sodium();
  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> recipient_x{};
  if (crypto_sign_ed25519_pk_to_curve25519(recipient_x.data(), recipient.public_key.bytes.data()) != 0)
    throw Error(ErrorCode::MalformedKey, "recipient key is not a valid curve point");

  ByteWriter seed_input;
  seed_input.str("chainflow-seal").blob(entropy).raw(recipient.public_key.view()).blob(plaintext);
  auto eph_seed = sha256(seed_input.bytes());
  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> eph_pk{};
  std::array<std::uint8_t, crypto_box_SECRETKEYBYTES> eph_sk{};
  crypto_box_seed_keypair(eph_pk.data(), eph_sk.data(), eph_seed.bytes().data());

  auto nonce = detail::seal_nonce(ByteView(eph_pk), ByteView(recipient_x));
  Bytes out(eph_pk.size() + crypto_box_MACBYTES + plaintext.size());
  std::copy(eph_pk.begin(), eph_pk.end(), out.begin());
  if (crypto_box_easy(out.data() + eph_pk.size(), plaintext.data(), plaintext.size(), nonce.data(), recipient_x.data(),
                      eph_sk.data()) != 0)
    throw Error(ErrorCode::MalformedKey, "sealing failed");
  sodium_memzero(eph_sk.data(), eph_sk.size());
  return SealedPayload{recipient.id, std::move(out)};
}

inline Bytes unseal(const SealedPayload& sealed, const PrivateKey& key) {
  ensure_sodium();
  constexpr auto header = crypto_box_PUBLICKEYBYTES + crypto_box_MACBYTES;
  if (sealed.ciphertext.size() < header) throw Error(ErrorCode::DecryptFailure, "ciphertext too short");

  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> own_x_pk{};
  std::array<std::uint8_t, crypto_box_SECRETKEYBYTES> own_x_sk{};
  if (crypto_sign_ed25519_pk_to_curve25519(own_x_pk.data(), key.public_key().bytes.data()) != 0)
    throw Error(ErrorCode::DecryptFailure, "key cannot be converted for decryption");
  crypto_sign_ed25519_sk_to_curve25519(own_x_sk.data(), key.secret().data());

  ByteView eph_pk(sealed.ciphertext.data(), crypto_box_PUBLICKEYBYTES);
  auto nonce = detail::seal_nonce(eph_pk, ByteView(own_x_pk));
  Bytes plain(sealed.ciphertext.size() - header);
  int rc = crypto_box_open_easy(plain.data(), sealed.ciphertext.data() + crypto_box_PUBLICKEYBYTES,
                                sealed.ciphertext.size() - crypto_box_PUBLICKEYBYTES, nonce.data(), eph_pk.data(),
                                own_x_sk.data());
  sodium_memzero(own_x_sk.data(), own_x_sk.size());
  if (rc != 0) throw Error(ErrorCode::DecryptFailure, "sealed payload does not open under this key");
  return plain;
}

// ---------------------------------------------------------------------------
// Registry

enum class RegistryMode : std::uint8_t { Centralized = 0, UserCentric = 1 };

inline std::string_view to_string(RegistryMode m) {
  return m == RegistryMode::Centralized ? "centralized" : "user_centric";
}

inline RegistryMode registry_mode_from_byte(std::uint8_t b) {
  if (b > 1) throw Error(ErrorCode::Malformed, "unknown registry mode tag");
  return static_cast<RegistryMode>(b);
}

/// Endorsement of a registration: an issuer signature in Centralized mode,
/// the identity's own signature in UserCentric mode.
struct Credential {
  PublicKey signer;
  Signature signature;

  bool operator==(const Credential&) const = default;
};

inline Bytes registration_message(const Identity& identity, std::string_view name) {
  ByteWriter w;
  w.str("CFREG").fixed(identity.id.bytes()).raw(identity.public_key.view()).u8(static_cast<std::uint8_t>(identity.role)).str(name);
  return std::move(w).bytes();
}

inline Credential issue_credential(const Identity& identity, std::string_view name, const PrivateKey& issuer) {
  return Credential{issuer.public_key(), sign(registration_message(identity, name), issuer)};
}

inline Credential self_attest(const IdentityKeys& keys, std::string_view name) {
  return issue_credential(keys.identity, name, keys.private_key);
}

struct RegistryEntry {
  Identity identity;
  std::string name;
  Credential credential;
};

/// Value type; every registration returns a new registry.
class IdentityRegistry {
 public:
  static IdentityRegistry centralized(std::vector<PublicKey> issuers, HashAlgo id_algo = HashAlgo::Sha256) {
    IdentityRegistry r;
    r.mode_ = RegistryMode::Centralized;
    r.issuers_ = std::move(issuers);
    r.id_algo_ = id_algo;
    return r;
  }
  static IdentityRegistry user_centric(HashAlgo id_algo = HashAlgo::Sha256) {
    IdentityRegistry r;
    r.mode_ = RegistryMode::UserCentric;
    r.id_algo_ = id_algo;
    return r;
  }
  static IdentityRegistry with_mode(RegistryMode mode, std::vector<PublicKey> issuers, HashAlgo id_algo) {
    return mode == RegistryMode::Centralized ? centralized(std::move(issuers), id_algo) : user_centric(id_algo);
  }

  RegistryMode mode() const { return mode_; }
  const std::vector<PublicKey>& issuers() const { return issuers_; }
  const std::map<IdentityId, RegistryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  bool contains(const IdentityId& id) const { return entries_.count(id) != 0; }

  const RegistryEntry* find(const IdentityId& id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
  }

  const RegistryEntry* find_by_name(std::string_view name) const {
    for (const auto& [id, e] : entries_)
      if (e.name == name) return &e;
    return nullptr;
  }

  /// Checks a credential against this registry's mode without mutating.
  bool credential_valid(const Identity& identity, std::string_view name, const Credential& cred) const {
    if (!id_matches_key(identity)) return false;
    auto msg = registration_message(identity, name);
    bool sig_ok = false;
    try {
      sig_ok = verify(msg, cred.signature, cred.signer);
    } catch (const Error&) {
      return false;
    }
    if (!sig_ok) return false;
    if (mode_ == RegistryMode::UserCentric) return cred.signer == identity.public_key;
    if (cred.signer == identity.public_key) return false;
    for (const auto& issuer : issuers_)
      if (issuer == cred.signer) return true;
    return false;
  }

  IdentityRegistry register_identity(const Identity& identity, std::string_view name, const Credential& cred) const {
    if (!credential_valid(identity, name, cred))
      throw Error(ErrorCode::BadCredential, "credential for '" + std::string(name) + "' does not verify");
    if (contains(identity.id) || find_by_name(name) != nullptr)
      throw Error(ErrorCode::DuplicateIdentity, "identity '" + std::string(name) + "' already registered");
    IdentityRegistry next = *this;
    next.entries_.emplace(identity.id, RegistryEntry{identity, std::string(name), cred});
    return next;
  }

 private:
  IdentityRegistry() = default;

  bool id_matches_key(const Identity& identity) const {
    return derive_identity_id(identity.public_key, id_algo_) == identity.id;
  }

  RegistryMode mode_ = RegistryMode::UserCentric;
  HashAlgo id_algo_ = HashAlgo::Sha256;
  std::vector<PublicKey> issuers_;
  std::map<IdentityId, RegistryEntry> entries_;
};

}  // namespace chainflow

#endif  // CHAINFLOW_IDENTITY_HPP
