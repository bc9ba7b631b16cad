#pragma once

// Token-embedding bundle: a directory holding manifest.json plus one binary
// token file per description.
//
// Token file layout (little-endian):
//   "ARTB" | 0x01 | uint32 L | uint32 d | L*d float32 row-major | L flag bytes
// Flag bytes are 0 for content tokens and 1 for special tokens.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arise/encoding.hpp"
#include "arise/semantics.hpp"

namespace arise {

inline constexpr char kBundleMagic[4] = {'A', 'R', 'T', 'B'};
inline constexpr std::uint8_t kBundleVersion = 0x01;

struct BundleEntry {
  std::string attribute;
  std::string value;
  std::string file;
  std::size_t num_tokens = 0;
  std::optional<std::size_t> start_token_index;
};

struct BundleManifest {
  std::string encoder_model;
  std::size_t dim = 0;
  std::vector<BundleEntry> entries;
};

std::vector<std::uint8_t> encode_token_matrix(const TokenMatrix& tm);
TokenMatrix decode_token_matrix(std::span<const std::uint8_t> bytes,
                                const std::string& origin = "<memory>");

TokenMatrix read_token_file(const std::string& path);
void write_token_file(const std::string& path, const TokenMatrix& tm);

BundleManifest read_manifest(const std::string& dir);
void write_manifest(const std::string& dir, const BundleManifest& manifest);

/// Read-only view of a bundle directory.
class Bundle {
public:
  explicit Bundle(std::string dir);

  const BundleManifest& manifest() const noexcept { return manifest_; }
  const std::string& dir() const noexcept { return dir_; }
  const BundleEntry* find(const std::string& attribute, const std::string& value) const;

  /// Loads the entry's file and checks it against the manifest (L, d and
  /// the start-token index).
  TokenMatrix load(const BundleEntry& entry) const;

private:
  std::string dir_;
  BundleManifest manifest_;
  std::map<std::pair<std::string, std::string>, std::size_t> index_;
};

/// Deterministic stand-in for a sentence encoder: whitespace tokens, a
/// synthetic special start token at index 0, and per-(token, position)
/// hashed states in [-1, 1].
TokenMatrix stub_token_matrix(std::string_view description, std::size_t dim);

/// Writes a stub bundle covering `records`, files named entry_00000.bin...
BundleManifest write_stub_bundle(std::span<const DescriptionRecord> records,
                                 const std::string& dir, std::size_t dim);

struct EncodeReport {
  ValueEmbeddings embeddings;
  std::size_t dim = 0;
  std::vector<std::string> warnings;   // values that fell back to zeros
  std::vector<std::size_t> zero_filled; // their vocabulary ids
};

/// Pools the bundle entry of every vocabulary value. Missing entries are a
/// CoverageError unless `best_effort`, which substitutes zero vectors.
EncodeReport encode_vocabulary(const Dataset& ds, const Vocabulary& vocab, const Bundle& bundle,
                               Pooling pooling, bool best_effort = false);

/// Same, but token states come from stub_token_matrix over the given
/// descriptions (vocabulary order, empty optional = missing).
EncodeReport encode_vocabulary_stub(const Vocabulary& vocab,
                                    std::span<const std::optional<DescriptionRecord>> records,
                                    std::size_t dim, Pooling pooling, bool best_effort = false);

} // namespace arise
