#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hardmeta/corpus.hpp"

namespace hardmeta {

/// Id-aligned dense vectors, row-major, one row per id.
///
/// The fields are public so callers can assemble a matrix incrementally;
/// validate() checks the invariants (row count, unique ids, finite values),
/// and both the writer and the reader call it.
struct EmbeddingMatrix {
  std::vector<std::string> ids;
  std::size_t dim = 0;
  std::vector<float> values;

  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::vector<std::string> row_ids, std::size_t dimension,
                  std::vector<float> row_major);

  std::size_t rows() const { return ids.size(); }

  std::span<const float> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  std::span<float> row(std::size_t i) { return {values.data() + i * dim, dim}; }

  /// Throws DataError describing the first violated invariant.
  void validate() const;

  bool operator==(const EmbeddingMatrix&) const = default;
};

inline constexpr char kSoreMagic[4] = {'S', 'O', 'R', 'E'};
inline constexpr std::uint32_t kSoreVersion = 1;

void write_embeddings(std::ostream& out, const EmbeddingMatrix& matrix);
void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& matrix);

EmbeddingMatrix read_embeddings(std::istream& in, const std::string& source = "<stream>");
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

/// A corpus paired with its embeddings; row_of maps instance ids to rows.
struct AlignedDataset {
  Corpus corpus;
  EmbeddingMatrix matrix;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t row_of(const std::string& instance_id) const { return index.at(instance_id); }
  std::span<const float> vector_of(const std::string& instance_id) const {
    return matrix.row(row_of(instance_id));
  }
};

/// Requires exact id-set equality. Throws AlignmentError listing the
/// offending ids (sorted); missing embeddings are reported before orphans.
AlignedDataset align(Corpus corpus, EmbeddingMatrix matrix);

}  // namespace hardmeta
