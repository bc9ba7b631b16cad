#include "arise/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arise/error.hpp"

namespace arise {
namespace {

ValueEmbedding finish(std::span<const double> acc, Pooling mode) {
  ValueEmbedding e;
  e.pooling = mode;
  e.vector.assign(acc.begin(), acc.end());
  for (std::size_t k = 0; k < acc.size(); ++k) {
    if (!std::isfinite(e.vector[k])) {
      throw BundleFormatError(Stage::encoding, "pooled embedding has a non-finite entry");
    }
  }
  return e;
}

std::size_t content_tokens(const TokenMatrix& tm) {
  return static_cast<std::size_t>(std::count(tm.special.begin(), tm.special.end(), 0));
}

} // namespace

void TokenMatrix::validate() const {
  if (tokens == 0 || dim == 0) {
    throw BundleFormatError(Stage::encoding, "token matrix needs L >= 1 and d >= 1");
  }
  if (states.size() != tokens * dim || special.size() != tokens) {
    throw BundleFormatError(Stage::encoding, "token matrix sizes disagree with L x d");
  }
  for (std::size_t t = 0; t < tokens; ++t) {
    const auto r = row(t);
    if (std::all_of(r.begin(), r.end(), [](float v) { return std::isnan(v); })) {
      throw BundleFormatError(Stage::encoding, "token row " + std::to_string(t) + " is all NaN");
    }
    if (special[t] > 1) {
      throw BundleFormatError(Stage::encoding, "token flag must be 0 or 1");
    }
  }
  if (start_index && (*start_index >= tokens || special[*start_index] != 1)) {
    throw BundleFormatError(Stage::encoding, "start token index " + std::to_string(*start_index) +
                                                 " is out of range or not flagged special");
  }
}

TokenMatrix TokenMatrix::from_rows(const std::vector<std::vector<float>>& rows) {
  TokenMatrix tm;
  tm.tokens = rows.size();
  tm.dim = rows.empty() ? 0 : rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != tm.dim) throw BundleFormatError(Stage::encoding, "ragged token rows");
    tm.states.insert(tm.states.end(), r.begin(), r.end());
  }
  tm.special.assign(tm.tokens, 0);
  return tm;
}

std::string_view to_string(Pooling p) noexcept {
  switch (p) {
  case Pooling::attention: return "attention";
  case Pooling::mean: return "mean";
  case Pooling::cls: return "cls";
  }
  return "attention";
}

Pooling parse_pooling(std::string_view s) {
  if (s == "attention") return Pooling::attention;
  if (s == "mean") return Pooling::mean;
  if (s == "cls") return Pooling::cls;
  throw ConfigError(Stage::encoding, "unknown pooling '" + std::string(s) +
                                         "' (expected attention, mean or cls)");
}

std::vector<double> token_scores(const TokenMatrix& tm) {
  if (content_tokens(tm) == 0) {
    throw NoContentError(Stage::encoding, "every token is special; nothing to pool");
  }
  std::vector<double> scores(tm.tokens, -std::numeric_limits<double>::infinity());
  for (std::size_t t = 0; t < tm.tokens; ++t) {
    if (tm.is_special(t)) continue;
    double sum = 0.0;
    for (float h : tm.row(t)) sum += h;
    scores[t] = sum / static_cast<double>(tm.dim);
  }
  return scores;
}

std::vector<double> softmax(std::vector<double> scores) {
  const double peak = *std::max_element(scores.begin(), scores.end());
  if (!std::isfinite(peak)) throw ContractViolation(Stage::encoding, "softmax needs a finite score");
  double total = 0.0;
  for (double& x : scores) {
    x = std::exp(x - peak); // -infinity gives 0
    total += x;
  }
  for (double& x : scores) x /= total;
  return scores;
}

std::vector<double> attention_weights(const TokenMatrix& tm) {
  return softmax(token_scores(tm));
}

ValueEmbedding attention_pool(const TokenMatrix& tm) {
  const std::vector<double> a = attention_weights(tm);
  std::vector<double> acc(tm.dim, 0.0);
  for (std::size_t t = 0; t < tm.tokens; ++t) {
    if (a[t] == 0.0) continue;
    const auto h = tm.row(t);
    for (std::size_t k = 0; k < tm.dim; ++k) acc[k] += a[t] * h[k];
  }
  return finish(acc, Pooling::attention);
}

ValueEmbedding mean_pool(const TokenMatrix& tm) {
  const std::size_t count = content_tokens(tm);
  if (count == 0) throw NoContentError(Stage::encoding, "every token is special; nothing to pool");
  std::vector<double> acc(tm.dim, 0.0);
  for (std::size_t t = 0; t < tm.tokens; ++t) {
    if (tm.is_special(t)) continue;
    const auto h = tm.row(t);
    for (std::size_t k = 0; k < tm.dim; ++k) acc[k] += h[k];
  }
  for (double& x : acc) x /= static_cast<double>(count);
  return finish(acc, Pooling::mean);
}

ValueEmbedding cls_pool(const TokenMatrix& tm) {
  if (!tm.start_index || *tm.start_index >= tm.tokens || !tm.is_special(*tm.start_index)) {
    throw BundleFormatError(Stage::encoding, "CLS pooling needs a flagged sequence-start token");
  }
  const auto h = tm.row(*tm.start_index);
  const std::vector<double> acc(h.begin(), h.end());
  return finish(acc, Pooling::cls);
}

ValueEmbedding pool(const TokenMatrix& tm, Pooling mode) {
  switch (mode) {
  case Pooling::attention: return attention_pool(tm);
  case Pooling::mean: return mean_pool(tm);
  case Pooling::cls: return cls_pool(tm);
  }
  return attention_pool(tm);
}

SemanticMatrix assemble_semantic_matrix(const Dataset& ds, const Vocabulary& vocab,
                                        const ValueEmbeddings& embeddings) {
  if (embeddings.size() != vocab.size()) {
    throw CoverageError(Stage::encoding, "expected " + std::to_string(vocab.size()) +
                                             " value embeddings, got " +
                                             std::to_string(embeddings.size()));
  }
  std::size_t d = 0;
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    const auto& e = embeddings[id];
    const auto& entry = vocab.entries[id];
    if (!e) {
      throw CoverageError(Stage::encoding, "no embedding for " + ds.attributes[entry.attribute].name +
                                               "=" + entry.value);
    }
    if (d == 0) d = e->vector.size();
    if (e->vector.size() != d || d == 0) {
      throw BundleFormatError(Stage::encoding, "embedding of " + ds.attributes[entry.attribute].name +
                                                   "=" + entry.value + " has dimension " +
                                                   std::to_string(e->vector.size()) + ", expected " +
                                                   std::to_string(d));
    }
  }

  const std::size_t n = ds.rows();
  const std::size_t m = ds.cols();
  SemanticMatrix sem;
  sem.block_dim = d;
  sem.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m * d));
  for (std::size_t i = 0; i < n; ++i) {
    double* out = sem.values.row(static_cast<Eigen::Index>(i)).data();
    for (std::size_t j = 0; j < m; ++j) {
      const auto& v = embeddings[vocab.id(j, ds.cell(i, j))]->vector;
      std::copy(v.begin(), v.end(), out + j * d);
    }
  }
  return sem;
}

AnchorMatrix one_hot_matrix(const Dataset& ds, const Vocabulary& vocab) {
  if (vocab.offsets.size() != ds.cols()) {
    throw CoverageError(Stage::encoding, "vocabulary does not match the dataset's attributes");
  }
  AnchorMatrix anc;
  anc.values = Matrix::Zero(static_cast<Eigen::Index>(ds.rows()),
                                 static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (std::size_t j = 0; j < ds.cols(); ++j) {
      const std::size_t id = vocab.id(j, ds.cell(i, j));
      if (id >= vocab.span_end(j) || vocab.entries[id].value != ds.raw(i, j)) {
        throw CoverageError(Stage::encoding, "value " + ds.attributes[j].name + "=" + ds.raw(i, j) +
                                                 " is absent from the vocabulary");
      }
      anc.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(id)) = 1.0;
    }
  }
  return anc;
}

} // namespace arise
