#ifndef CHAINFLOW_HASH_HPP
#define CHAINFLOW_HASH_HPP

#include <sodium.h>

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "chainflow/bytes.hpp"
#include "chainflow/error.hpp"

namespace chainflow {

inline void ensure_sodium() {
  static const bool ready = [] { return sodium_init() >= 0; }();
  if (!ready) throw Error(ErrorCode::UnsupportedAlgo, "libsodium failed to initialise");
}

/// Fixed 32-byte digest, rendered as 64 lowercase hex characters.
class HashDigest {
 public:
  static constexpr std::size_t size = 32;
  using Array = std::array<std::uint8_t, size>;

  HashDigest() : bytes_{} {}
  explicit HashDigest(const Array& bytes) : bytes_(bytes) {}

  static HashDigest zero() { return HashDigest{}; }

  static HashDigest from_hex(std::string_view hex) {
    if (hex.size() != 2 * size) throw Error(ErrorCode::Malformed, "digest hex must be 64 characters");
    auto raw = chainflow::from_hex(hex);
    Array a{};
    std::copy(raw.begin(), raw.end(), a.begin());
    return HashDigest(a);
  }

  std::string hex() const { return to_hex(ByteView(bytes_.data(), bytes_.size())); }
  const Array& bytes() const { return bytes_; }
  ByteView view() const { return ByteView(bytes_.data(), bytes_.size()); }

  bool is_zero() const {
    return std::all_of(bytes_.begin(), bytes_.end(), [](auto b) { return b == 0; });
  }

  /// Count of leading zero bits, most significant byte first.
  unsigned leading_zero_bits() const {
    unsigned bits = 0;
    for (auto b : bytes_) {
      if (b == 0) {
        bits += 8;
        continue;
      }
      bits += static_cast<unsigned>(std::countl_zero(b));
      break;
    }
    return bits;
  }

  auto operator<=>(const HashDigest&) const = default;

 private:
  Array bytes_;
};

enum class HashAlgo : std::uint8_t { Sha256 = 0, Sha256d = 1, Scrypt = 2 };

inline std::string_view to_string(HashAlgo algo) {
  switch (algo) {
    case HashAlgo::Sha256: return "sha256";
    case HashAlgo::Sha256d: return "sha256d";
    case HashAlgo::Scrypt: return "scrypt";
  }
  return "unknown";
}

inline std::optional<HashAlgo> parse_hash_algo(std::string_view name) {
  if (name == "sha256" || name == "SHA-256") return HashAlgo::Sha256;
  if (name == "sha256d" || name == "SHA256D") return HashAlgo::Sha256d;
  if (name == "scrypt" || name == "Scrypt") return HashAlgo::Scrypt;
  return std::nullopt;
}

inline HashAlgo hash_algo_from_byte(std::uint8_t b) {
  if (b > 2) throw Error(ErrorCode::Malformed, "unknown hash algorithm tag");
  return static_cast<HashAlgo>(b);
}

/// Scrypt is optional; SHA-256 and SHA256D are always present.
inline bool hash_algo_supported(HashAlgo algo) {
#ifdef SODIUM_LIBRARY_MINIMAL
  return algo != HashAlgo::Scrypt;
#else
  (void)algo;
  return true;
#endif
}

/// Call at configuration time; simulation code may then hash without
/// re-checking.
inline void require_hash_algo(HashAlgo algo) {
  if (!hash_algo_supported(algo))
    throw Error(ErrorCode::UnsupportedAlgo, std::string(to_string(algo)) + " is not available in this build");
}

inline HashDigest sha256(ByteView data) {
  ensure_sodium();
  HashDigest::Array out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return HashDigest(out);
}

inline HashDigest sha256d(ByteView data) {
  auto once = sha256(data);
  return sha256(once.view());
}

namespace detail {
// Scrypt work parameters: N=1024, r=1, p=1 keeps simulated mining cheap.
inline constexpr std::uint64_t scrypt_n = 1024;
inline constexpr std::uint32_t scrypt_r = 1;
inline constexpr std::uint32_t scrypt_p = 1;
inline constexpr std::string_view scrypt_salt = "chainflow";
}  // namespace detail

inline HashDigest scrypt_digest(ByteView data) {
  require_hash_algo(HashAlgo::Scrypt);
  ensure_sodium();
#ifndef SODIUM_LIBRARY_MINIMAL
  HashDigest::Array out{};
  if (crypto_pwhash_scryptsalsa208sha256_ll(data.data(), data.size(),
                                            reinterpret_cast<const std::uint8_t*>(detail::scrypt_salt.data()),
                                            detail::scrypt_salt.size(), detail::scrypt_n, detail::scrypt_r,
                                            detail::scrypt_p, out.data(), out.size()) != 0)
    throw Error(ErrorCode::UnsupportedAlgo, "scrypt computation failed");
  return HashDigest(out);
#else
  throw Error(ErrorCode::UnsupportedAlgo, "scrypt is not available in this build");
#endif
}

inline HashDigest digest(HashAlgo algo, ByteView data) {
  switch (algo) {
    case HashAlgo::Sha256: return sha256(data);
    case HashAlgo::Sha256d: return sha256d(data);
    case HashAlgo::Scrypt: return scrypt_digest(data);
  }
  throw Error(ErrorCode::UnsupportedAlgo, "unknown hash algorithm");
}

}  // namespace chainflow

#endif  // CHAINFLOW_HASH_HPP
