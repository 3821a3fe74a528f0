#include "hardmeta/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <unordered_set>

#include "hardmeta/error.hpp"
#include "jsonl.hpp"

namespace hardmeta {

namespace {

constexpr std::array<std::pair<Pos, std::string_view>, 8> kPosNames{{
    {Pos::kNoun, "NOUN"},
    {Pos::kVerb, "VERB"},
    {Pos::kAdj, "ADJ"},
    {Pos::kAdv, "ADV"},
    {Pos::kAdp, "ADP"},
    {Pos::kDet, "DET"},
    {Pos::kPron, "PRON"},
    {Pos::kOther, "OTHER"},
}};

constexpr std::array<std::pair<MetaphorLabel, std::string_view>, 3> kLabelNames{{
    {MetaphorLabel::kMetaphorical, "METAPHORICAL"},
    {MetaphorLabel::kLiteral, "LITERAL"},
    {MetaphorLabel::kUnknown, "UNKNOWN"},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) ==
                  std::toupper(static_cast<unsigned char>(y));
         });
}

Instance parse_instance(const detail::json& r, const std::string& source,
                        std::size_t line, Warnings* warnings) {
  detail::check_keys(r, {"id", "lemma", "word", "pos", "sense", "tokens", "target"},
                     source, line, warnings);
  Instance inst;
  inst.instance_id = detail::get_string(r, "id", source, line);
  if (inst.instance_id.empty()) throw ParseError(source, line, "empty id");
  inst.lemma = detail::get_string(r, "lemma", source, line);
  inst.word_form = detail::get_string(r, "word", source, line);
  const std::string pos = detail::get_string(r, "pos", source, line);
  auto parsed_pos = parse_pos(pos);
  if (!parsed_pos) throw ParseError(source, line, "unknown pos '" + pos + "'");
  inst.pos = *parsed_pos;
  inst.sense_id = detail::get_string(r, "sense", source, line);

  auto tokens = r.find("tokens");
  if (tokens == r.end() || !tokens->is_array()) {
    throw ParseError(source, line, "key 'tokens' must be an array of strings");
  }
  for (const auto& t : *tokens) {
    if (!t.is_string()) {
      throw ParseError(source, line, "key 'tokens' must be an array of strings");
    }
    inst.tokens.push_back(t.get<std::string>());
  }
  if (inst.tokens.empty()) throw ParseError(source, line, "empty tokens");

  const long long target = detail::get_integer(r, "target", source, line);
  if (target < 0 || static_cast<unsigned long long>(target) >= inst.tokens.size()) {
    throw ParseError(source, line,
                     "target index " + std::to_string(target) + " out of range for " +
                         std::to_string(inst.tokens.size()) + " tokens");
  }
  inst.target_index = static_cast<std::size_t>(target);
  return inst;
}

}  // namespace

std::optional<Pos> parse_pos(std::string_view token) {
  for (const auto& [pos, name] : kPosNames) {
    if (iequals(token, name)) return pos;
  }
  return std::nullopt;
}

std::optional<MetaphorLabel> parse_metaphor_label(std::string_view token) {
  for (const auto& [label, name] : kLabelNames) {
    if (iequals(token, name)) return label;
  }
  return std::nullopt;
}

std::string_view to_string(Pos pos) {
  for (const auto& [p, name] : kPosNames) {
    if (p == pos) return name;
  }
  return "OTHER";
}

std::string_view to_string(MetaphorLabel label) {
  for (const auto& [l, name] : kLabelNames) {
    if (l == label) return name;
  }
  return "UNKNOWN";
}

void SenseInventory::add(SenseEntry entry) {
  if (entry.sense_id.empty()) throw DataError("sense entry with empty sense id");
  if (entry.gloss.empty()) {
    throw DataError("sense '" + entry.sense_id + "' has an empty gloss");
  }
  if (index_.contains(entry.sense_id)) {
    throw DataError("duplicate sense id '" + entry.sense_id + "'");
  }
  index_.emplace(entry.sense_id, entries_.size());
  entries_.push_back(std::move(entry));
}

const SenseEntry* SenseInventory::find(std::string_view sense_id) const {
  auto it = index_.find(std::string(sense_id));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

MetaphorLabel SenseInventory::label_of(std::string_view sense_id) const {
  const SenseEntry* e = find(sense_id);
  return e ? e->metaphor_label : MetaphorLabel::kUnknown;
}

std::size_t SenseInventory::count(MetaphorLabel label) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(),
      [label](const SenseEntry& e) { return e.metaphor_label == label; }));
}

Corpus parse_corpus(std::istream& in, const std::string& source_name,
                    Warnings* warnings) {
  Corpus corpus;
  corpus.source_name = source_name;
  std::unordered_set<std::string> seen;
  detail::for_each_record(in, source_name, [&](const detail::json& r, std::size_t line) {
    Instance inst = parse_instance(r, source_name, line, warnings);
    if (!seen.insert(inst.instance_id).second) {
      throw ParseError(source_name, line, "duplicate instance id '" + inst.instance_id + "'");
    }
    corpus.instances.push_back(std::move(inst));
  });
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, Warnings* warnings) {
  auto in = detail::open_input(path);
  return parse_corpus(in, path.string(), warnings);
}

SenseInventory parse_sense_inventory(std::istream& in, const std::string& source_name,
                                     Warnings* warnings) {
  SenseInventory inventory;
  detail::for_each_record(in, source_name, [&](const detail::json& r, std::size_t line) {
    detail::check_keys(r, {"sense", "lemma", "gloss", "label"}, source_name, line, warnings);
    SenseEntry e;
    e.sense_id = detail::get_string(r, "sense", source_name, line);
    e.lemma = detail::get_string(r, "lemma", source_name, line);
    e.gloss = detail::get_string(r, "gloss", source_name, line);
    const std::string label = detail::get_string(r, "label", source_name, line);
    auto parsed = parse_metaphor_label(label);
    if (!parsed) throw ParseError(source_name, line, "unknown metaphor label '" + label + "'");
    e.metaphor_label = *parsed;
    if (e.sense_id.empty()) throw ParseError(source_name, line, "empty sense id");
    if (e.gloss.empty()) throw ParseError(source_name, line, "empty gloss for sense '" + e.sense_id + "'");
    if (inventory.contains(e.sense_id)) {
      throw ParseError(source_name, line, "duplicate sense id '" + e.sense_id + "'");
    }
    inventory.add(std::move(e));
  });
  return inventory;
}

SenseInventory load_sense_inventory(const std::filesystem::path& path, Warnings* warnings) {
  auto in = detail::open_input(path);
  return parse_sense_inventory(in, path.string(), warnings);
}

std::string format_instance(const Instance& inst) {
  detail::ordered_json r;
  r["id"] = inst.instance_id;
  r["lemma"] = inst.lemma;
  r["word"] = inst.word_form;
  r["pos"] = to_string(inst.pos);
  r["sense"] = inst.sense_id;
  r["tokens"] = inst.tokens;
  r["target"] = inst.target_index;
  return r.dump();
}

std::string format_sense(const SenseEntry& e) {
  detail::ordered_json r;
  r["sense"] = e.sense_id;
  r["lemma"] = e.lemma;
  r["gloss"] = e.gloss;
  r["label"] = to_string(e.metaphor_label);
  return r.dump();
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& inst : corpus.instances) out << format_instance(inst) << '\n';
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  auto out = detail::open_output(path);
  write_corpus(out, corpus);
  if (!out) throw DataError("write failure on " + path.string());
}

void write_sense_inventory(std::ostream& out, const SenseInventory& inventory) {
  for (const auto& e : inventory.entries()) out << format_sense(e) << '\n';
}

void save_sense_inventory(const std::filesystem::path& path,
                          const SenseInventory& inventory) {
  auto out = detail::open_output(path);
  write_sense_inventory(out, inventory);
  if (!out) throw DataError("write failure on " + path.string());
}

std::unordered_map<std::string, std::size_t> sense_counts(const Corpus& corpus) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& inst : corpus.instances) ++counts[inst.sense_id];
  return counts;
}

ValidationReport validate(const Corpus& corpus, const SenseInventory& inventory,
                          std::size_t min_examples) {
  ValidationReport report;
  report.n_instances = corpus.instances.size();

  std::set<std::string> lemmas;
  std::set<std::string> unresolved;
  for (const auto& inst : corpus.instances) {
    lemmas.insert(inst.lemma);
    if (!inventory.contains(inst.sense_id)) unresolved.insert(inst.sense_id);
  }
  auto counts = sense_counts(corpus);
  report.n_words = lemmas.size();
  report.n_senses = counts.size();
  report.unresolved_sense_ids.assign(unresolved.begin(), unresolved.end());

  for (const auto& [sense, count] : counts) {
    if (count < min_examples && !unresolved.contains(sense)) {
      report.senses_below_min.emplace_back(sense, count);
    }
  }
  std::sort(report.senses_below_min.begin(), report.senses_below_min.end());
  return report;
}

Corpus filter_senses(const Corpus& corpus, const SenseInventory& inventory,
                     std::size_t min_examples) {
  auto counts = sense_counts(corpus);
  Corpus out;
  out.source_name = corpus.source_name;
  for (const auto& inst : corpus.instances) {
    if (!inventory.contains(inst.sense_id)) continue;
    if (counts[inst.sense_id] < min_examples) continue;
    out.instances.push_back(inst);
  }
  return out;
}

}  // namespace hardmeta
