#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace arise {

using ValueId = std::uint32_t;

/// Literal token that stands in for empty or "?" cells.
inline constexpr std::string_view kMissingToken = "missing";

struct AttributeSchema {
  std::string name;
  std::vector<std::string> domain; // distinct raw values, first-appearance order

  std::size_t cardinality() const noexcept { return domain.size(); }
  bool degenerate() const noexcept { return domain.size() == 1; }
  std::optional<ValueId> find(std::string_view value) const;
};

/// N objects by M categorical attributes, stored as per-attribute value ids.
struct Dataset {
  std::string name;
  std::vector<AttributeSchema> attributes;
  std::vector<ValueId> cells; // row-major, rows() * cols()
  std::optional<std::vector<std::uint32_t>> labels;
  std::vector<std::string> label_names; // class id -> raw label string
  std::string label_column;
  std::size_t k = 2;

  std::size_t rows() const noexcept {
    return attributes.empty() ? 0 : cells.size() / attributes.size();
  }
  std::size_t cols() const noexcept { return attributes.size(); }
  ValueId cell(std::size_t row, std::size_t col) const {
    return cells[row * attributes.size() + col];
  }
  std::span<const ValueId> row(std::size_t i) const {
    return {cells.data() + i * attributes.size(), attributes.size()};
  }
  const std::string& raw(std::size_t row, std::size_t col) const {
    return attributes[col].domain[cell(row, col)];
  }

  /// Structural invariants: cells inside their domains, unique domain
  /// entries, label vector length. Throws ContractViolation.
  void validate() const;

  /// Adds the clustering preconditions N >= 2, M >= 1, 2 <= K <= N.
  void validate_for_clustering() const;
};

enum class MissingPolicy {
  token, // empty / "?" cells become the value "missing"
  mode,  // replaced by the attribute's most frequent observed value
};

struct LoadOptions {
  char delimiter = ',';
  std::optional<std::string> label_column;
  std::size_t k = 2;
  std::vector<std::string> drop_columns;
  MissingPolicy missing = MissingPolicy::token;
  /// Declared value domains keyed by attribute name. Declared values come
  /// first (in the given order), unseen observed values are appended.
  std::map<std::string, std::vector<std::string>> declared_domains;
};

Dataset load_dataset(const std::string& path, const LoadOptions& options);

/// Parses CSV text directly; `name` is used for diagnostics.
Dataset parse_dataset(std::string_view text, const LoadOptions& options,
                      std::string name = "<memory>");

/// Writes attributes (and the label column, if any) with a header row.
void write_dataset_csv(const Dataset& ds, const std::string& path);
std::string dataset_to_csv(const Dataset& ds);

/// Reads a JSON object {attribute: [values...]} of declared domains.
std::map<std::string, std::vector<std::string>>
load_declared_domains(const std::string& path);

struct VocabEntry {
  std::size_t attribute;
  std::string value;

  bool operator==(const VocabEntry&) const = default;
};

/// All attribute-scoped values, attribute ascending then domain order.
struct Vocabulary {
  std::vector<VocabEntry> entries;
  std::vector<std::size_t> offsets; // first global id of each attribute

  std::size_t size() const noexcept { return entries.size(); }
  std::size_t id(std::size_t attribute, ValueId local) const {
    return offsets[attribute] + local;
  }
  std::size_t span_end(std::size_t attribute) const {
    return attribute + 1 < offsets.size() ? offsets[attribute + 1]
                                          : entries.size();
  }
  bool operator==(const Vocabulary&) const = default;
};

Vocabulary extract_vocabulary(const Dataset& ds);

struct DatasetStats {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t vocab_size = 0;
  double mean_card = 0.0;
  std::size_t max_card = 0;
  std::size_t min_card = 0;
};

DatasetStats dataset_stats(const Dataset& ds);

void to_json(nlohmann::json& j, const DatasetStats& s);

} // namespace arise
