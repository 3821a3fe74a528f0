#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "hardmeta/corpus.hpp"
#include "hardmeta/embedstore.hpp"

namespace hardmeta {

enum class Mixing {
  kNone,
  kOrthogonal,   // random rotation: cosine distances unchanged
  kAnisotropic,  // Q1 diag(1..1, eps..eps) Q2: invertible, entangles clusters
};

std::optional<Mixing> parse_mixing(std::string_view token);
std::string_view to_string(Mixing mixing);

struct SynthConfig {
  std::size_t n_lemmas = 10;
  std::size_t senses_per_lemma = 3;
  std::size_t instances_per_sense = 20;
  std::size_t dim = 32;
  double noise_sigma = 0.05;
  double hard_fraction = 0.0;
  double metaphor_fraction = 0.3;
  double margin_degrees = 30.0;
  Mixing mixing = Mixing::kNone;
  std::size_t mixing_rank = 1;     // directions kept at unit scale (anisotropic)
  double mixing_epsilon = 0.05;    // scale of the remaining directions
  std::uint64_t seed = 0;

  void validate() const;  // ConfigError
  std::string describe() const;
};

struct GroundTruth {
  std::set<std::string> planted_hard_ids;
};

struct SynthOutput {
  Corpus corpus;
  SenseInventory inventory;
  EmbeddingMatrix embeddings;
  GroundTruth truth;
};

/// Unit-sphere sense centroids with an angular margin between centroids of
/// the same lemma; instances are noisy renormalized copies. A hard_fraction
/// of each sense is placed around another sense of the same lemma instead.
/// The first ceil(metaphor_fraction * senses_per_lemma) senses of each lemma
/// are METAPHORICAL, the rest LITERAL. Mixing is applied last.
SynthOutput generate(const SynthConfig& cfg);

/// Writes corpus.jsonl, inventory.jsonl, embeddings.sore and
/// ground_truth.jsonl into `dir` (created if needed).
void save_synth(const std::filesystem::path& dir, const SynthOutput& out);

GroundTruth load_ground_truth(const std::filesystem::path& path);

}  // namespace hardmeta
