#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "hardmeta/corpus.hpp"
#include "hardmeta/embedstore.hpp"

namespace hardmeta {

/// phi = s / k over the k nearest neighbours of one instance, where k is the
/// number of other pool instances sharing its sense.
struct OverlapScore {
  std::string instance_id;
  std::string sense_id;
  std::size_t k = 0;
  std::size_t s = 0;
  double phi = 0.0;
  std::vector<std::string> neighbor_ids;  // nearest first

  bool operator==(const OverlapScore&) const = default;
};

struct SkippedInstance {
  std::string instance_id;
  std::string reason;

  bool operator==(const SkippedInstance&) const = default;
};

struct ScoreTable {
  std::vector<OverlapScore> scores;  // corpus order
  std::string scope;                 // "lemma" or "corpus"
  std::vector<SkippedInstance> skipped;

  const OverlapScore* find(const std::string& instance_id) const;
};

/// Exact search: the k pool members other than the query with the smallest
/// cosine distance, nearest first, ties broken by ascending id.
/// Throws ConfigError when k > |pool| - 1 or the query is not in the pool,
/// NumericalError on a zero-norm vector.
std::vector<std::string> knn(const EmbeddingMatrix& sor, const std::vector<std::string>& pool,
                             const std::string& query_id, std::size_t k);

/// Throws DataError when the query's sense is a singleton in the pool.
OverlapScore overlap_ratio(const EmbeddingMatrix& sor, const std::vector<std::string>& pool,
                           const std::unordered_map<std::string, std::string>& sense_of,
                           const std::string& query_id);

struct ScoreOptions {
  std::size_t min_examples = 4;
  bool group_by_lemma = true;
  std::size_t threads = 1;
};

/// Scores every instance whose sense resolves and has at least
/// min_examples instances in `corpus`. Instances with unresolved senses,
/// insufficient support, zero-norm vectors or a singleton sense within their
/// pool are listed in `skipped`. Output does not depend on `threads`.
ScoreTable score_all(const EmbeddingMatrix& sor, const Corpus& corpus,
                     const SenseInventory& inventory, const ScoreOptions& options = {});

void write_scores(std::ostream& out, const ScoreTable& table);
void save_scores(const std::filesystem::path& path, const ScoreTable& table);
ScoreTable read_scores(std::istream& in, const std::string& source = "<stream>");
ScoreTable load_scores(const std::filesystem::path& path);

void write_skipped(std::ostream& out, const std::vector<SkippedInstance>& skipped);

}  // namespace hardmeta
