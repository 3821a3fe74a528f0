#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hardmeta {

enum class Pos { kNoun, kVerb, kAdj, kAdv, kAdp, kDet, kPron, kOther };

enum class MetaphorLabel { kMetaphorical, kLiteral, kUnknown };

/// Case-insensitive parse. Returns nullopt for unknown tokens.
std::optional<Pos> parse_pos(std::string_view token);
std::optional<MetaphorLabel> parse_metaphor_label(std::string_view token);

/// Canonical (uppercase) spelling.
std::string_view to_string(Pos pos);
std::string_view to_string(MetaphorLabel label);

/// One occurrence of a target word in a passage, with its gold sense.
struct Instance {
  std::string instance_id;
  std::string lemma;
  std::string word_form;
  Pos pos = Pos::kOther;
  std::string sense_id;
  std::vector<std::string> tokens;
  std::size_t target_index = 0;

  bool operator==(const Instance&) const = default;
};

struct SenseEntry {
  std::string sense_id;
  std::string lemma;
  std::string gloss;
  MetaphorLabel metaphor_label = MetaphorLabel::kUnknown;

  bool operator==(const SenseEntry&) const = default;
};

/// Sense catalog with metaphor/literal labels. Entries keep file order;
/// lookup is by sense id.
class SenseInventory {
 public:
  SenseInventory() = default;

  /// Throws DataError on a duplicate sense id or an empty gloss.
  void add(SenseEntry entry);

  const SenseEntry* find(std::string_view sense_id) const;
  bool contains(std::string_view sense_id) const {
    return find(sense_id) != nullptr;
  }

  /// Label of `sense_id`, or kUnknown when the sense is not in the inventory.
  MetaphorLabel label_of(std::string_view sense_id) const;

  const std::vector<SenseEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t count(MetaphorLabel label) const;

 private:
  std::vector<SenseEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Corpus {
  std::vector<Instance> instances;
  std::string source_name;
};

struct ValidationReport {
  std::size_t n_instances = 0;
  std::size_t n_words = 0;
  std::size_t n_senses = 0;
  /// Sorted, unique.
  std::vector<std::string> unresolved_sense_ids;
  /// (sense_id, count) for resolved senses below the support minimum,
  /// sorted by sense id.
  std::vector<std::pair<std::string, std::size_t>> senses_below_min;

  bool ok() const {
    return unresolved_sense_ids.empty() && senses_below_min.empty();
  }
};

/// Non-fatal loader diagnostics (unknown keys and the like).
using Warnings = std::vector<std::string>;

Corpus parse_corpus(std::istream& in, const std::string& source_name,
                    Warnings* warnings = nullptr);
Corpus load_corpus(const std::filesystem::path& path,
                   Warnings* warnings = nullptr);

SenseInventory parse_sense_inventory(std::istream& in,
                                     const std::string& source_name,
                                     Warnings* warnings = nullptr);
SenseInventory load_sense_inventory(const std::filesystem::path& path,
                                    Warnings* warnings = nullptr);

/// Canonical line for one instance (no trailing newline).
std::string format_instance(const Instance& instance);
std::string format_sense(const SenseEntry& entry);

void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);
void write_sense_inventory(std::ostream& out, const SenseInventory& inventory);
void save_sense_inventory(const std::filesystem::path& path,
                          const SenseInventory& inventory);

/// Instances per sense id, over the whole corpus.
std::unordered_map<std::string, std::size_t> sense_counts(const Corpus& corpus);

ValidationReport validate(const Corpus& corpus, const SenseInventory& inventory,
                          std::size_t min_examples);

/// Keeps instances whose sense resolves in `inventory` and has at least
/// `min_examples` instances in `corpus`. Order is preserved.
Corpus filter_senses(const Corpus& corpus, const SenseInventory& inventory,
                     std::size_t min_examples);

}  // namespace hardmeta
