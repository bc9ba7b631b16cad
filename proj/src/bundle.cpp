#include "arise/bundle.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "arise/error.hpp"

namespace arise {
namespace {

namespace fs = std::filesystem;

constexpr std::size_t kHeaderBytes = 4 + 1 + 4 + 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

void hashed_row(std::string_view token, std::size_t position, std::span<float> out) {
  std::uint64_t state = fnv1a(token) ^ (static_cast<std::uint64_t>(position) * 0xD6E8FEB86659FD93ULL);
  for (float& v : out) {
    const std::uint64_t bits = splitmix64(state) >> 40; // 24 bits
    v = static_cast<float>(static_cast<double>(bits) / 8388608.0 - 1.0);
  }
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(Stage::encoding, "cannot open token file '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

std::vector<std::uint8_t> encode_token_matrix(const TokenMatrix& tm) {
  tm.validate();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + tm.states.size() * 4 + tm.tokens);
  out.insert(out.end(), std::begin(kBundleMagic), std::end(kBundleMagic));
  out.push_back(kBundleVersion);
  put_u32(out, static_cast<std::uint32_t>(tm.tokens));
  put_u32(out, static_cast<std::uint32_t>(tm.dim));
  for (float v : tm.states) put_u32(out, std::bit_cast<std::uint32_t>(v));
  out.insert(out.end(), tm.special.begin(), tm.special.end());
  return out;
}

TokenMatrix decode_token_matrix(std::span<const std::uint8_t> bytes, const std::string& origin) {
  auto fail = [&](const std::string& why) {
    return BundleFormatError(Stage::encoding, origin + ": " + why);
  };
  if (bytes.size() < kHeaderBytes) throw fail("truncated header");
  if (std::memcmp(bytes.data(), kBundleMagic, 4) != 0) throw fail("bad magic (expected ARTB)");
  if (bytes[4] != kBundleVersion) throw fail("unsupported version " + std::to_string(bytes[4]));
  TokenMatrix tm;
  tm.tokens = get_u32(bytes.data() + 5);
  tm.dim = get_u32(bytes.data() + 9);
  const std::size_t expected = kHeaderBytes + 4 * tm.tokens * tm.dim + tm.tokens;
  if (bytes.size() != expected) {
    throw fail("size " + std::to_string(bytes.size()) + " != expected " + std::to_string(expected) +
               " for L=" + std::to_string(tm.tokens) + ", d=" + std::to_string(tm.dim));
  }
  tm.states.resize(tm.tokens * tm.dim);
  const std::uint8_t* p = bytes.data() + kHeaderBytes;
  for (auto& v : tm.states) {
    v = std::bit_cast<float>(get_u32(p));
    p += 4;
  }
  tm.special.assign(p, p + tm.tokens);
  try {
    tm.validate();
  } catch (const BundleFormatError& e) {
    throw fail(e.what());
  }
  return tm;
}

TokenMatrix read_token_file(const std::string& path) {
  return decode_token_matrix(read_bytes(path), path);
}

void write_token_file(const std::string& path, const TokenMatrix& tm) {
  const auto bytes = encode_token_matrix(tm);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(Stage::encoding, "cannot write token file '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

BundleManifest read_manifest(const std::string& dir) {
  const std::string path = (fs::path(dir) / "manifest.json").string();
  std::ifstream in(path);
  if (!in) throw IoError(Stage::encoding, "cannot open bundle manifest '" + path + "'");
  BundleManifest m;
  try {
    nlohmann::json j;
    in >> j;
    m.encoder_model = j.at("encoder_model").get<std::string>();
    m.dim = j.at("dim").get<std::size_t>();
    for (const auto& e : j.at("entries")) {
      BundleEntry entry;
      entry.attribute = e.at("attribute").get<std::string>();
      entry.value = e.at("value").get<std::string>();
      entry.file = e.at("file").get<std::string>();
      entry.num_tokens = e.at("num_tokens").get<std::size_t>();
      if (e.contains("start_token_index") && !e["start_token_index"].is_null()) {
        entry.start_token_index = e["start_token_index"].get<std::size_t>();
      }
      m.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw BundleFormatError(Stage::encoding, path + ": " + e.what());
  }
  if (m.dim == 0) throw BundleFormatError(Stage::encoding, path + ": dim must be positive");
  return m;
}

void write_manifest(const std::string& dir, const BundleManifest& manifest) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    entries.push_back({{"attribute", e.attribute},
                       {"value", e.value},
                       {"file", e.file},
                       {"num_tokens", e.num_tokens},
                       {"start_token_index", e.start_token_index
                                                 ? nlohmann::json(*e.start_token_index)
                                                 : nlohmann::json(nullptr)}});
  }
  const nlohmann::json j = {
      {"encoder_model", manifest.encoder_model}, {"dim", manifest.dim}, {"entries", entries}};
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(Stage::encoding, "cannot write manifest in '" + dir + "'");
  out << j.dump(2) << '\n';
}

Bundle::Bundle(std::string dir) : dir_(std::move(dir)), manifest_(read_manifest(dir_)) {
  for (std::size_t i = 0; i < manifest_.entries.size(); ++i) {
    const auto& e = manifest_.entries[i];
    if (!index_.emplace(std::make_pair(e.attribute, e.value), i).second) {
      throw BundleFormatError(Stage::encoding, "duplicate bundle entry " + e.attribute + "=" + e.value);
    }
  }
}

const BundleEntry* Bundle::find(const std::string& attribute, const std::string& value) const {
  const auto it = index_.find({attribute, value});
  return it == index_.end() ? nullptr : &manifest_.entries[it->second];
}

TokenMatrix Bundle::load(const BundleEntry& entry) const {
  const std::string path = (fs::path(dir_) / entry.file).string();
  TokenMatrix tm = read_token_file(path);
  if (tm.tokens != entry.num_tokens) {
    throw BundleFormatError(Stage::encoding, path + ": L=" + std::to_string(tm.tokens) +
                                                 " but manifest says " +
                                                 std::to_string(entry.num_tokens));
  }
  if (tm.dim != manifest_.dim) {
    throw BundleFormatError(Stage::encoding, path + ": d=" + std::to_string(tm.dim) +
                                                 " but manifest dim is " +
                                                 std::to_string(manifest_.dim));
  }
  tm.start_index = entry.start_token_index;
  try {
    tm.validate();
  } catch (const BundleFormatError& e) {
    throw BundleFormatError(Stage::encoding, path + ": " + e.what());
  }
  return tm;
}

TokenMatrix stub_token_matrix(std::string_view description, std::size_t dim) {
  std::vector<std::string_view> words;
  std::size_t pos = 0;
  while (pos < description.size()) {
    const auto start = description.find_first_not_of(" \t\r\n", pos);
    if (start == std::string_view::npos) break;
    const auto end = std::min(description.find_first_of(" \t\r\n", start), description.size());
    words.push_back(description.substr(start, end - start));
    pos = end;
  }
  TokenMatrix tm;
  tm.tokens = words.size() + 1;
  tm.dim = dim;
  tm.states.resize(tm.tokens * dim);
  tm.special.assign(tm.tokens, 0);
  tm.special[0] = 1;
  tm.start_index = 0;
  hashed_row("[CLS]", 0, {tm.states.data(), dim});
  for (std::size_t t = 0; t < words.size(); ++t) {
    hashed_row(words[t], t + 1, {tm.states.data() + (t + 1) * dim, dim});
  }
  return tm;
}

BundleManifest write_stub_bundle(std::span<const DescriptionRecord> records, const std::string& dir,
                                 std::size_t dim) {
  if (dim == 0) throw ConfigError(Stage::encoding, "stub bundle dim must be positive");
  fs::create_directories(dir);
  BundleManifest manifest;
  manifest.encoder_model = "stub-hash";
  manifest.dim = dim;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TokenMatrix tm = stub_token_matrix(records[i].description, dim);
    char name[32];
    std::snprintf(name, sizeof name, "entry_%05zu.bin", i);
    write_token_file((fs::path(dir) / name).string(), tm);
    manifest.entries.push_back({records[i].attribute, records[i].value, name, tm.tokens, 0});
  }
  write_manifest(dir, manifest);
  return manifest;
}

EncodeReport encode_vocabulary(const Dataset& ds, const Vocabulary& vocab, const Bundle& bundle,
                               Pooling pooling, bool best_effort) {
  EncodeReport report;
  report.dim = bundle.manifest().dim;
  report.embeddings.resize(vocab.size());
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    const auto& entry = vocab.entries[id];
    const std::string& attr = ds.attributes.at(entry.attribute).name;
    const BundleEntry* be = bundle.find(attr, entry.value);
    if (!be) {
      if (!best_effort) {
        throw CoverageError(Stage::encoding, "bundle has no entry for " + attr + "=" + entry.value);
      }
      report.warnings.push_back("no bundle entry for " + attr + "=" + entry.value +
                                "; using a zero vector");
      report.zero_filled.push_back(id);
      report.embeddings[id] = ValueEmbedding{std::vector<double>(report.dim, 0.0), pooling};
      continue;
    }
    try {
      report.embeddings[id] = pool(bundle.load(*be), pooling);
    } catch (const Error& e) {
      throw BundleFormatError(Stage::encoding, attr + "=" + entry.value + ": " + e.what());
    }
  }
  return report;
}

EncodeReport encode_vocabulary_stub(const Vocabulary& vocab,
                                    std::span<const std::optional<DescriptionRecord>> records,
                                    std::size_t dim, Pooling pooling, bool best_effort) {
  if (records.size() != vocab.size()) {
    throw CoverageError(Stage::encoding, "description count does not match the vocabulary");
  }
  EncodeReport report;
  report.dim = dim;
  report.embeddings.resize(vocab.size());
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    if (!records[id]) {
      const auto& entry = vocab.entries[id];
      if (!best_effort) {
        throw CoverageError(Stage::encoding, "no description for value '" + entry.value +
                                                 "' of attribute #" + std::to_string(entry.attribute));
      }
      report.warnings.push_back("no description for '" + entry.value + "'; using a zero vector");
      report.zero_filled.push_back(id);
      report.embeddings[id] = ValueEmbedding{std::vector<double>(dim, 0.0), pooling};
      continue;
    }
    report.embeddings[id] = pool(stub_token_matrix(records[id]->description, dim), pooling);
  }
  return report;
}

} // namespace arise
