#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "arise/dataset.hpp"

namespace arise {

/// Dense row-major matrix used for every N x D representation.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Hidden states of one description: `tokens` rows of `dim` floats.
struct TokenMatrix {
  std::size_t tokens = 0;
  std::size_t dim = 0;
  std::vector<float> states;          // row-major tokens x dim
  std::vector<std::uint8_t> special;  // 1 = start/end/padding token
  std::optional<std::size_t> start_index;

  std::span<const float> row(std::size_t t) const { return {states.data() + t * dim, dim}; }
  bool is_special(std::size_t t) const { return special[t] != 0; }

  /// L >= 1, d >= 1, sizes consistent, no all-NaN row, start token flagged.
  /// Throws BundleFormatError.
  void validate() const;

  /// Convenience for tests: rows of equal length, no special tokens.
  static TokenMatrix from_rows(const std::vector<std::vector<float>>& rows);
};

enum class Pooling { attention, mean, cls };

std::string_view to_string(Pooling p) noexcept;
Pooling parse_pooling(std::string_view s);

struct ValueEmbedding {
  std::vector<double> vector;
  Pooling pooling = Pooling::attention;
};

/// Mean activation of every token; special tokens get -infinity.
/// Throws NoContentError when every token is special.
std::vector<double> token_scores(const TokenMatrix& tm);

/// Softmax with max subtraction; -infinity entries weigh 0.
std::vector<double> softmax(std::vector<double> scores);

/// softmax(token_scores(tm)).
std::vector<double> attention_weights(const TokenMatrix& tm);

ValueEmbedding attention_pool(const TokenMatrix& tm);
ValueEmbedding mean_pool(const TokenMatrix& tm);
/// The sequence-start token's state. Throws BundleFormatError if absent.
ValueEmbedding cls_pool(const TokenMatrix& tm);
ValueEmbedding pool(const TokenMatrix& tm, Pooling mode);

/// Value embeddings indexed by global vocabulary id.
using ValueEmbeddings = std::vector<std::optional<ValueEmbedding>>;

/// N x (M*d); row i, block j holds the embedding of cell (i, j).
struct SemanticMatrix {
  Matrix values;
  std::size_t block_dim = 0;
};

/// N x |V| one-hot indicators, M ones per row.
struct AnchorMatrix {
  Matrix values;
};

SemanticMatrix assemble_semantic_matrix(const Dataset& ds, const Vocabulary& vocab,
                                        const ValueEmbeddings& embeddings);

AnchorMatrix one_hot_matrix(const Dataset& ds, const Vocabulary& vocab);

} // namespace arise
