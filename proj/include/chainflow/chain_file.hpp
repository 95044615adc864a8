#ifndef CHAINFLOW_CHAIN_FILE_HPP
#define CHAINFLOW_CHAIN_FILE_HPP

#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "chainflow/bytes.hpp"
#include "chainflow/error.hpp"
#include "chainflow/ledger.hpp"

namespace chainflow {

// File layout: "CFS1" then, per block, a u32 big-endian length followed by
// canonical_encode(block).

inline constexpr char chain_file_magic[4] = {'C', 'F', 'S', '1'};

inline Bytes encode_chain_file(const Chain& chain) {
  ByteWriter w;
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(chain_file_magic), 4));
  for (const auto& b : chain.blocks()) w.blob(canonical_encode(b));
  return std::move(w).bytes();
}

/// Splits a chain file into block records. Throws Malformed on a bad magic
/// or a truncated record; does not decode the records.
inline std::vector<Bytes> split_chain_file(ByteView data) {
  if (data.size() < 4 || !std::equal(data.begin(), data.begin() + 4, chain_file_magic))
    throw Error(ErrorCode::Malformed, "bad magic: not a CFS1 chain file");
  ByteReader r(data.subspan(4));
  std::vector<Bytes> records;
  while (!r.done()) records.push_back(r.blob());
  if (records.empty()) throw Error(ErrorCode::Malformed, "chain file holds no blocks");
  return records;
}

/// Each record decoded independently; nullopt where a record is not a block.
struct DecodedChainFile {
  std::vector<std::optional<Block>> blocks;
  std::vector<std::string> errors;  // parallel to blocks, empty when decoded

  bool fully_decoded() const {
    for (const auto& b : blocks)
      if (!b) return false;
    return true;
  }
};

inline DecodedChainFile decode_chain_file(ByteView data) {
  DecodedChainFile out;
  for (const auto& rec : split_chain_file(data)) {
    try {
      out.blocks.push_back(decode_block(rec));
      out.errors.emplace_back();
    } catch (const Error& e) {
      out.blocks.push_back(std::nullopt);
      out.errors.emplace_back(e.what());
    }
  }
  return out;
}

/// Verification that also covers records that do not decode: the first such
/// record fails as Malformed and later blocks are AncestorInvalid.
inline VerificationReport verify_chain_file(const DecodedChainFile& file, VerifyCache* cache = nullptr) {
  std::vector<Block> prefix;
  std::size_t bad = file.blocks.size();
  for (std::size_t i = 0; i < file.blocks.size(); ++i) {
    if (!file.blocks[i]) {
      bad = i;
      break;
    }
    prefix.push_back(*file.blocks[i]);
  }
  VerificationReport report;
  if (!prefix.empty()) report = verify_chain(Chain::from_blocks(std::move(prefix)), cache);
  for (std::size_t i = bad; i < file.blocks.size(); ++i) {
    if (i == bad) report.blocks.push_back({i, FailureCause::Malformed, file.errors[i]});
    else report.blocks.push_back({i, FailureCause::AncestorInvalid, "an earlier block failed"});
  }
  return report;
}

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, ByteView data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

inline void write_chain_file(const std::filesystem::path& path, const Chain& chain) {
  write_file(path, encode_chain_file(chain));
}

/// Loads and decodes a chain file. Throws on framing errors or when any
/// record does not decode.
inline Chain read_chain_file(const std::filesystem::path& path) {
  auto file = decode_chain_file(read_file(path));
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < file.blocks.size(); ++i) {
    if (!file.blocks[i]) throw Error(ErrorCode::Malformed, "block " + std::to_string(i) + ": " + file.errors[i]);
    blocks.push_back(std::move(*file.blocks[i]));
  }
  return Chain::from_blocks(std::move(blocks));
}

}  // namespace chainflow

#endif  // CHAINFLOW_CHAIN_FILE_HPP
