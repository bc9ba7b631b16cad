#include "arise/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "arise/csv.hpp"
#include "arise/error.hpp"

namespace arise {
namespace {

std::string trim(std::string s) {
  constexpr const char* ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "?"; }

std::size_t column_index(const csv::Record& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw ConfigError(Stage::dataset, "column '" + name + "' not found in header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

// Value used for a missing cell under the "mode" policy: most frequent
// observed value, ties to the earliest first appearance.
std::string mode_of(const std::vector<csv::Record>& rows, std::size_t col) {
  std::unordered_map<std::string, std::size_t> counts;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    const std::string v = trim(r[col]);
    if (is_missing(v)) continue;
    if (counts[v]++ == 0) order.push_back(v);
  }
  std::string best(kMissingToken);
  std::size_t best_count = 0;
  for (const auto& v : order) {
    if (counts[v] > best_count) {
      best = v;
      best_count = counts[v];
    }
  }
  return best;
}

} // namespace

std::optional<ValueId> AttributeSchema::find(std::string_view value) const {
  const auto it = std::find(domain.begin(), domain.end(), value);
  if (it == domain.end()) return std::nullopt;
  return static_cast<ValueId>(it - domain.begin());
}

void Dataset::validate() const {
  const std::size_t m = attributes.size();
  if (m == 0) {
    if (!cells.empty()) throw ContractViolation(Stage::dataset, "cells without attributes");
    return;
  }
  if (cells.size() % m != 0) {
    throw ContractViolation(Stage::dataset, "cell count is not a multiple of M");
  }
  for (std::size_t j = 0; j < m; ++j) {
    const auto& dom = attributes[j].domain;
    if (dom.empty()) {
      throw ContractViolation(Stage::dataset,
                              "attribute '" + attributes[j].name + "' has an empty domain");
    }
    std::set<std::string_view> seen(dom.begin(), dom.end());
    if (seen.size() != dom.size()) {
      throw ContractViolation(Stage::dataset, "attribute '" + attributes[j].name +
                                                  "' has duplicate domain entries");
    }
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i] >= attributes[i % m].domain.size()) {
      throw ContractViolation(Stage::dataset, "cell (" + std::to_string(i / m) + ", " +
                                                  std::to_string(i % m) +
                                                  ") lies outside its domain");
    }
  }
  if (labels && labels->size() != rows()) {
    throw ContractViolation(Stage::dataset, "label vector length " +
                                                std::to_string(labels->size()) +
                                                " != N = " + std::to_string(rows()));
  }
}

void Dataset::validate_for_clustering() const {
  validate();
  const std::size_t n = rows();
  if (n < 2) throw ContractViolation(Stage::dataset, "need N >= 2 objects, got " + std::to_string(n));
  if (cols() < 1) throw ContractViolation(Stage::dataset, "need M >= 1 attributes");
  if (k < 2) throw ContractViolation(Stage::dataset, "need K >= 2, got " + std::to_string(k));
  if (k > n) {
    throw ContractViolation(Stage::dataset, "K = " + std::to_string(k) +
                                                " exceeds N = " + std::to_string(n));
  }
}

Dataset parse_dataset(std::string_view text, const LoadOptions& options, std::string name) {
  if (options.k == 0) throw ConfigError(Stage::dataset, "k must be a positive integer");

  std::vector<csv::Record> records = csv::parse(text, options.delimiter);
  if (records.empty()) throw EmptyInputError(Stage::dataset, "'" + name + "' is empty");
  const csv::Record header = records.front();
  records.erase(records.begin());
  if (records.empty()) {
    throw EmptyInputError(Stage::dataset, "'" + name + "' has a header but no data rows");
  }
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      // Rows are numbered as CSV records, the header being row 1.
      throw ParseError(Stage::dataset, "'" + name + "': ragged row " + std::to_string(r + 2) +
                                           ": expected " + std::to_string(header.size()) +
                                           " fields, got " + std::to_string(records[r].size()));
    }
  }

  std::optional<std::size_t> label_col;
  if (options.label_column) label_col = column_index(header, *options.label_column);
  std::set<std::size_t> dropped;
  for (const auto& d : options.drop_columns) dropped.insert(column_index(header, d));

  std::vector<std::size_t> attr_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col || dropped.contains(c)) continue;
    attr_cols.push_back(c);
  }

  Dataset ds;
  ds.name = std::move(name);
  ds.k = options.k;
  const std::size_t n = records.size();
  const std::size_t m = attr_cols.size();
  ds.attributes.resize(m);
  ds.cells.resize(n * m);

  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t col = attr_cols[j];
    AttributeSchema& attr = ds.attributes[j];
    attr.name = trim(header[col]);
    std::unordered_map<std::string, ValueId> ids;
    if (auto it = options.declared_domains.find(attr.name);
        it != options.declared_domains.end()) {
      for (const auto& v : it->second) {
        if (ids.emplace(v, static_cast<ValueId>(attr.domain.size())).second) {
          attr.domain.push_back(v);
        }
      }
    }
    const std::string fill = options.missing == MissingPolicy::mode
                                 ? mode_of(records, col)
                                 : std::string(kMissingToken);
    for (std::size_t i = 0; i < n; ++i) {
      std::string v = trim(records[i][col]);
      if (is_missing(v)) v = fill;
      auto [it, inserted] = ids.emplace(v, static_cast<ValueId>(attr.domain.size()));
      if (inserted) attr.domain.push_back(v);
      ds.cells[i * m + j] = it->second;
    }
  }

  if (label_col) {
    ds.label_column = header[*label_col];
    std::unordered_map<std::string, std::uint32_t> ids;
    std::vector<std::uint32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string v = trim(records[i][*label_col]);
      auto [it, inserted] = ids.emplace(v, static_cast<std::uint32_t>(ds.label_names.size()));
      if (inserted) ds.label_names.push_back(v);
      labels[i] = it->second;
    }
    ds.labels = std::move(labels);
  }
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(Stage::dataset, "cannot open dataset '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str(), options, std::filesystem::path(path).stem().string());
}

std::string dataset_to_csv(const Dataset& ds) {
  std::ostringstream out;
  csv::Record header;
  for (const auto& a : ds.attributes) header.push_back(a.name);
  if (ds.labels) header.push_back(ds.label_column.empty() ? "label" : ds.label_column);
  csv::write_record(out, header);
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    csv::Record r;
    for (std::size_t j = 0; j < ds.cols(); ++j) r.push_back(ds.raw(i, j));
    if (ds.labels) r.push_back(ds.label_names[(*ds.labels)[i]]);
    csv::write_record(out, r);
  }
  return out.str();
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(Stage::dataset, "cannot write '" + path + "'");
  out << dataset_to_csv(ds);
}

std::map<std::string, std::vector<std::string>> load_declared_domains(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(Stage::dataset, "cannot open domain file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    return j.get<std::map<std::string, std::vector<std::string>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(Stage::dataset, "domain file '" + path + "': " + e.what());
  }
}

Vocabulary extract_vocabulary(const Dataset& ds) {
  Vocabulary vocab;
  vocab.offsets.reserve(ds.cols());
  for (std::size_t j = 0; j < ds.cols(); ++j) {
    vocab.offsets.push_back(vocab.entries.size());
    for (const auto& v : ds.attributes[j].domain) vocab.entries.push_back({j, v});
  }
  return vocab;
}

DatasetStats dataset_stats(const Dataset& ds) {
  DatasetStats s;
  s.n = ds.rows();
  s.m = ds.cols();
  s.k = ds.k;
  if (ds.attributes.empty()) return s;
  s.min_card = ds.attributes.front().cardinality();
  for (const auto& a : ds.attributes) {
    s.vocab_size += a.cardinality();
    s.max_card = std::max(s.max_card, a.cardinality());
    s.min_card = std::min(s.min_card, a.cardinality());
  }
  s.mean_card = static_cast<double>(s.vocab_size) / static_cast<double>(s.m);
  return s;
}

void to_json(nlohmann::json& j, const DatasetStats& s) {
  j = nlohmann::json{{"n", s.n},
                     {"m", s.m},
                     {"k", s.k},
                     {"vocab_size", s.vocab_size},
                     {"mean_card", s.mean_card},
                     {"max_card", s.max_card},
                     {"min_card", s.min_card}};
}

} // namespace arise
