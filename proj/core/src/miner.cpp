#include "hardmeta/miner.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <unordered_map>

#include "hardmeta/error.hpp"
#include "hardmeta/sortrain.hpp"
#include "jsonl.hpp"

namespace hardmeta {

namespace {

bool is_zero(std::span<const float> v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; });
}

}  // namespace

std::optional<Pairing> parse_pairing(std::string_view token) {
  std::string upper(token);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "WITHOUT_REPLACEMENT") return Pairing::kWithoutReplacement;
  if (upper == "WITH_REPLACEMENT") return Pairing::kWithReplacement;
  return std::nullopt;
}

std::string_view to_string(Pairing pairing) {
  return pairing == Pairing::kWithoutReplacement ? "WITHOUT_REPLACEMENT" : "WITH_REPLACEMENT";
}

void MineConfig::validate() const {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ConfigError("threshold must lie in (0, 1], got " + std::to_string(threshold));
  }
}

std::set<std::string> flag_hard(const ScoreTable& scores, double threshold) {
  MineConfig{threshold}.validate();
  std::set<std::string> hard;
  for (const auto& s : scores.scores) {
    if (s.phi < threshold) hard.insert(s.instance_id);
  }
  return hard;
}

std::vector<std::string> select_hard_metaphors(const std::set<std::string>& hard_ids,
                                               const Corpus& corpus,
                                               const SenseInventory& inventory) {
  std::vector<std::string> out;
  for (const auto& inst : corpus.instances) {
    if (hard_ids.contains(inst.instance_id) &&
        inventory.label_of(inst.sense_id) == MetaphorLabel::kMetaphorical) {
      out.push_back(inst.instance_id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

PairingResult pair_literals(const std::vector<std::string>& hard_metaphors,
                            const ScoreTable& scores, const EmbeddingMatrix& sor,
                            const Corpus& corpus, const SenseInventory& inventory,
                            const MineConfig& cfg) {
  cfg.validate();
  std::unordered_map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < sor.rows(); ++i) row.emplace(sor.ids[i], i);
  std::unordered_map<std::string, const Instance*> by_id;
  for (const auto& inst : corpus.instances) by_id.emplace(inst.instance_id, &inst);
  std::unordered_map<std::string, double> phi_of;
  for (const auto& s : scores.scores) phi_of.emplace(s.instance_id, s.phi);

  // Literal candidates per lemma, ascending id.
  std::map<std::string, std::vector<const Instance*>> literals;
  for (const auto& inst : corpus.instances) {
    if (inventory.label_of(inst.sense_id) != MetaphorLabel::kLiteral) continue;
    auto r = row.find(inst.instance_id);
    if (r == row.end() || is_zero(sor.row(r->second))) continue;
    literals[inst.lemma].push_back(&inst);
  }
  for (auto& [lemma, list] : literals) {
    std::sort(list.begin(), list.end(), [](const Instance* a, const Instance* b) {
      return a->instance_id < b->instance_id;
    });
  }

  std::vector<std::string> order = hard_metaphors;
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  std::set<std::string> taken;
  PairingResult result;
  for (const auto& id : order) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      result.unpairable.push_back({id, "instance not in corpus"});
      continue;
    }
    const Instance& meta = *it->second;
    if (inventory.label_of(meta.sense_id) != MetaphorLabel::kMetaphorical) {
      result.unpairable.push_back({id, "sense '" + meta.sense_id + "' is not METAPHORICAL"});
      continue;
    }
    auto phi = phi_of.find(id);
    if (phi == phi_of.end()) {
      result.unpairable.push_back({id, "no overlap score"});
      continue;
    }
    auto meta_row = row.find(id);
    if (meta_row == row.end() || is_zero(sor.row(meta_row->second))) {
      result.unpairable.push_back({id, "missing or zero-norm embedding"});
      continue;
    }
    auto pool = literals.find(meta.lemma);
    if (pool == literals.end()) {
      result.unpairable.push_back({id, "no literal instance of lemma '" + meta.lemma + "'"});
      continue;
    }
    const Instance* best = nullptr;
    double best_distance = std::numeric_limits<double>::infinity();
    for (const Instance* lit : pool->second) {
      if (cfg.pairing == Pairing::kWithoutReplacement && taken.contains(lit->instance_id)) continue;
      const double d = 1.0 - cosine_sim(sor.row(meta_row->second), sor.row(row.at(lit->instance_id)));
      // Candidates are visited in ascending id, so strict < keeps the id tie-break.
      if (d < best_distance) {
        best_distance = d;
        best = lit;
      }
    }
    if (!best) {
      result.unpairable.push_back({id, "literal pool of lemma '" + meta.lemma + "' exhausted"});
      continue;
    }
    if (cfg.pairing == Pairing::kWithoutReplacement) taken.insert(best->instance_id);
    const SenseEntry* entry = inventory.find(meta.sense_id);
    result.pairs.push_back({id, best->instance_id, phi->second, meta.sense_id, entry->gloss,
                            meta.lemma, best->sense_id, best_distance});
  }
  return result;
}

void emit_dataset(std::ostream& out, const std::vector<HardPair>& pairs, const Corpus& corpus,
                  const SenseInventory& inventory) {
  std::unordered_map<std::string, const Instance*> by_id;
  for (const auto& inst : corpus.instances) by_id.emplace(inst.instance_id, &inst);
  auto lookup = [&](const std::string& id) -> const Instance& {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("emit_dataset: instance '" + id + "' not in corpus");
    return *it->second;
  };
  auto gloss_of = [&](const std::string& sense) -> const std::string& {
    const SenseEntry* e = inventory.find(sense);
    if (!e) throw DataError("emit_dataset: sense '" + sense + "' not in inventory");
    return e->gloss;
  };

  detail::ordered_json header;
  header["format"] = "HMD";
  header["version"] = 1;
  header["pairs"] = pairs.size();
  detail::write_line(out, header);

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const HardPair& pair = pairs[p];
    for (bool meta_side : {true, false}) {
      const Instance& inst = lookup(meta_side ? pair.metaphor_instance_id : pair.literal_instance_id);
      detail::ordered_json r;
      r["pair"] = p;
      r["side"] = meta_side ? "meta" : "literal";
      r["id"] = inst.instance_id;
      r["lemma"] = inst.lemma;
      r["word"] = inst.word_form;
      r["sense"] = inst.sense_id;
      r["gloss"] = gloss_of(inst.sense_id);
      if (meta_side) r["phi"] = pair.phi;
      r["tokens"] = inst.tokens;
      r["target"] = inst.target_index;
      detail::write_line(out, r);
    }
  }
  if (!out) throw DataError("write failure while writing dataset");
}

void emit_dataset(const std::filesystem::path& path, const std::vector<HardPair>& pairs,
                  const Corpus& corpus, const SenseInventory& inventory) {
  auto out = detail::open_output(path);
  emit_dataset(out, pairs, corpus, inventory);
}

void write_unpairable(std::ostream& out, const std::vector<Unpairable>& unpairable) {
  for (const auto& u : unpairable) {
    detail::ordered_json r;
    r["id"] = u.instance_id;
    r["reason"] = u.reason;
    detail::write_line(out, r);
  }
}

}  // namespace hardmeta
