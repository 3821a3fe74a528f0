#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hardmeta/corpus.hpp"
#include "hardmeta/embedstore.hpp"
#include "hardmeta/overlap.hpp"

namespace hardmeta {

enum class Pairing { kWithoutReplacement, kWithReplacement };

std::optional<Pairing> parse_pairing(std::string_view token);
std::string_view to_string(Pairing pairing);

struct MineConfig {
  double threshold = 0.8;  // instances with phi strictly below are hard
  Pairing pairing = Pairing::kWithoutReplacement;

  void validate() const;  // ConfigError unless 0 < threshold <= 1
};

struct HardPair {
  std::string metaphor_instance_id;
  std::string literal_instance_id;
  double phi = 0.0;
  std::string sense_id;
  std::string gloss;
  std::string lemma;
  std::string literal_sense_id;
  double pair_distance = 0.0;  // cosine distance in SOR space

  bool operator==(const HardPair&) const = default;
};

struct Unpairable {
  std::string instance_id;
  std::string reason;

  bool operator==(const Unpairable&) const = default;
};

struct PairingResult {
  std::vector<HardPair> pairs;
  std::vector<Unpairable> unpairable;
};

/// Ids with phi < threshold.
std::set<std::string> flag_hard(const ScoreTable& scores, double threshold);

/// Hard ids whose sense is labeled METAPHORICAL, ascending by id.
std::vector<std::string> select_hard_metaphors(const std::set<std::string>& hard_ids,
                                               const Corpus& corpus,
                                               const SenseInventory& inventory);

/// Greedy nearest-literal pairing. Metaphors are visited in ascending id
/// order; each takes the closest available same-lemma instance of a LITERAL
/// sense (ties by id). Without replacement, a taken literal is unavailable
/// to later metaphors.
PairingResult pair_literals(const std::vector<std::string>& hard_metaphors,
                            const ScoreTable& scores, const EmbeddingMatrix& sor,
                            const Corpus& corpus, const SenseInventory& inventory,
                            const MineConfig& cfg);

/// HMD line format: a header record, then per pair a `meta` record and a
/// `literal` record.
void emit_dataset(std::ostream& out, const std::vector<HardPair>& pairs, const Corpus& corpus,
                  const SenseInventory& inventory);
void emit_dataset(const std::filesystem::path& path, const std::vector<HardPair>& pairs,
                  const Corpus& corpus, const SenseInventory& inventory);

void write_unpairable(std::ostream& out, const std::vector<Unpairable>& unpairable);

}  // namespace hardmeta
