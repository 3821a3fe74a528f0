#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "hardmeta/error.hpp"

namespace hardmeta::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& dst, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_unsigned()) throw ConfigError("");
    }
    dst = it->get<T>();
  } catch (const std::exception&) {
    throw ConfigError(where + ": bad value for '" + key + "'");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void read_path(const json& obj, const char* key, std::filesystem::path& dst,
               const std::filesystem::path& base, const std::string& where) {
  std::string s;
  read(obj, key, s, where);
  if (!s.empty()) dst = resolve(base, s);
}

void read_opt_path(const json& obj, const char* key, std::optional<std::filesystem::path>& dst,
                   const std::filesystem::path& base, const std::string& where) {
  std::string s;
  read(obj, key, s, where);
  if (!s.empty()) dst = resolve(base, s);
}

template <typename Enum, typename Parser>
void read_enum(const json& obj, const char* key, Enum& dst, Parser parse, const std::string& where) {
  std::string s;
  read(obj, key, s, where);
  if (s.empty()) return;
  auto v = parse(s);
  if (!v) throw ConfigError(where + ": bad value '" + s + "' for '" + key + "'");
  dst = *v;
}

const char* getenv_nonempty(const char* name) {
  const char* v = std::getenv(name);
  return v && *v ? v : nullptr;
}

std::uint64_t env_u64(const char* name, const char* value) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(value, &pos);
    if (pos != std::string(value).size()) throw std::invalid_argument(name);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("environment variable ") + name + " is not an unsigned integer");
  }
}

}  // namespace

PipelineConfig parse_config(const json& doc, const std::filesystem::path& base) {
  if (!doc.is_object()) throw ConfigError("config must be an object");
  reject_unknown(doc,
                 {"corpus", "inventory", "embeddings", "sor", "workdir", "seed", "threads", "min_examples",
                  "group_by_lemma", "train", "mine", "report", "synth"},
                 "config");
  PipelineConfig cfg;
  read_path(doc, "corpus", cfg.corpus, base, "config");
  read_path(doc, "inventory", cfg.inventory, base, "config");
  read_path(doc, "embeddings", cfg.embeddings, base, "config");
  read_opt_path(doc, "sor", cfg.sor, base, "config");
  read_path(doc, "workdir", cfg.workdir, base, "config");
  read(doc, "seed", cfg.seed, "config");
  read(doc, "threads", cfg.threads, "config");
  read(doc, "min_examples", cfg.min_examples, "config");
  read(doc, "group_by_lemma", cfg.group_by_lemma, "config");

  if (auto t = doc.find("train"); t != doc.end()) {
    if (!t->is_object()) throw ConfigError("config.train must be an object");
    reject_unknown(*t,
                   {"batch_size", "steps", "temperature", "output_dim", "hidden_layers", "learning_rate",
                    "adam_beta1", "adam_beta2", "adam_epsilon", "anchor_mode", "negative_sampling"},
                   "config.train");
    auto& tc = cfg.train;
    read(*t, "batch_size", tc.batch_size, "config.train");
    read(*t, "steps", tc.steps, "config.train");
    read(*t, "temperature", tc.temperature, "config.train");
    read(*t, "output_dim", tc.output_dim, "config.train");
    read(*t, "hidden_layers", tc.hidden_layers, "config.train");
    read(*t, "learning_rate", tc.learning_rate, "config.train");
    read(*t, "adam_beta1", tc.adam_beta1, "config.train");
    read(*t, "adam_beta2", tc.adam_beta2, "config.train");
    read(*t, "adam_epsilon", tc.adam_epsilon, "config.train");
    read_enum(*t, "anchor_mode", tc.anchor_mode, parse_anchor_mode, "config.train");
    read_enum(*t, "negative_sampling", tc.negative_sampling, parse_negative_sampling, "config.train");
  }
  if (auto m = doc.find("mine"); m != doc.end()) {
    if (!m->is_object()) throw ConfigError("config.mine must be an object");
    reject_unknown(*m, {"threshold", "pairing"}, "config.mine");
    read(*m, "threshold", cfg.mine.threshold, "config.mine");
    read_enum(*m, "pairing", cfg.mine.pairing, parse_pairing, "config.mine");
  }
  if (auto r = doc.find("report"); r != doc.end()) {
    if (!r->is_object()) throw ConfigError("config.report must be an object");
    reject_unknown(*r, {"format", "histogram_bins", "bin_edges", "predictions", "gold", "pca_lemma"},
                   "config.report");
    auto& ro = cfg.report;
    read_enum(*r, "format", ro.format, parse_report_format, "config.report");
    read(*r, "histogram_bins", ro.histogram_bins, "config.report");
    if (auto e = r->find("bin_edges"); e != r->end()) {
      if (!e->is_array()) throw ConfigError("config.report.bin_edges must be an array");
      ro.bin_edges.clear();
      for (const auto& v : *e) {
        if (!v.is_number()) throw ConfigError("config.report.bin_edges must hold numbers");
        ro.bin_edges.push_back(v.get<double>());
      }
    }
    read_opt_path(*r, "predictions", ro.predictions, base, "config.report");
    read_opt_path(*r, "gold", ro.gold, base, "config.report");
    std::string lemma;
    read(*r, "pca_lemma", lemma, "config.report");
    if (!lemma.empty()) ro.pca_lemma = lemma;
  }
  if (auto s = doc.find("synth"); s != doc.end()) {
    if (!s->is_object()) throw ConfigError("config.synth must be an object");
    reject_unknown(*s,
                   {"n_lemmas", "senses_per_lemma", "instances_per_sense", "dim", "noise_sigma", "hard_fraction",
                    "metaphor_fraction", "margin_degrees", "mixing", "mixing_rank", "mixing_epsilon"},
                   "config.synth");
    auto& sc = cfg.synth;
    read(*s, "n_lemmas", sc.n_lemmas, "config.synth");
    read(*s, "senses_per_lemma", sc.senses_per_lemma, "config.synth");
    read(*s, "instances_per_sense", sc.instances_per_sense, "config.synth");
    read(*s, "dim", sc.dim, "config.synth");
    read(*s, "noise_sigma", sc.noise_sigma, "config.synth");
    read(*s, "hard_fraction", sc.hard_fraction, "config.synth");
    read(*s, "metaphor_fraction", sc.metaphor_fraction, "config.synth");
    read(*s, "margin_degrees", sc.margin_degrees, "config.synth");
    read_enum(*s, "mixing", sc.mixing, parse_mixing, "config.synth");
    read(*s, "mixing_rank", sc.mixing_rank, "config.synth");
    read(*s, "mixing_epsilon", sc.mixing_epsilon, "config.synth");
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

void apply_env_overrides(PipelineConfig& cfg) {
  if (auto v = getenv_nonempty("HARDMETA_SEED")) cfg.seed = env_u64("HARDMETA_SEED", v);
  if (auto v = getenv_nonempty("HARDMETA_THREADS")) cfg.threads = env_u64("HARDMETA_THREADS", v);
  if (auto v = getenv_nonempty("HARDMETA_WORKDIR")) cfg.workdir = v;
  if (auto v = getenv_nonempty("HARDMETA_CORPUS")) cfg.corpus = v;
  if (auto v = getenv_nonempty("HARDMETA_INVENTORY")) cfg.inventory = v;
  if (auto v = getenv_nonempty("HARDMETA_EMBEDDINGS")) cfg.embeddings = v;
  if (auto v = getenv_nonempty("HARDMETA_SOR")) cfg.sor = std::filesystem::path(v);
  if (auto v = getenv_nonempty("HARDMETA_MIN_EXAMPLES")) cfg.min_examples = env_u64("HARDMETA_MIN_EXAMPLES", v);
  if (auto v = getenv_nonempty("HARDMETA_STEPS")) cfg.train.steps = env_u64("HARDMETA_STEPS", v);
  if (auto v = getenv_nonempty("HARDMETA_BATCH_SIZE")) cfg.train.batch_size = env_u64("HARDMETA_BATCH_SIZE", v);
  if (auto v = getenv_nonempty("HARDMETA_THRESHOLD")) {
    try {
      cfg.mine.threshold = std::stod(v);
    } catch (const std::exception&) {
      throw ConfigError("environment variable HARDMETA_THRESHOLD is not a number");
    }
  }
  if (auto v = getenv_nonempty("HARDMETA_FORMAT")) {
    auto f = parse_report_format(v);
    if (!f) throw ConfigError("environment variable HARDMETA_FORMAT must be jsonl or csv");
    cfg.report.format = *f;
  }
}

nlohmann::ordered_json PipelineConfig::snapshot() const {
  nlohmann::ordered_json j;
  j["corpus"] = corpus.generic_string();
  j["inventory"] = inventory.generic_string();
  j["embeddings"] = embeddings.generic_string();
  j["sor"] = sor ? nlohmann::ordered_json(sor->generic_string()) : nlohmann::ordered_json(nullptr);
  j["seed"] = seed;
  j["min_examples"] = min_examples;
  j["group_by_lemma"] = group_by_lemma;
  auto& t = j["train"];
  t["batch_size"] = train.batch_size;
  t["steps"] = train.steps;
  t["temperature"] = train.temperature;
  t["output_dim"] = train.output_dim;
  t["hidden_layers"] = train.hidden_layers;
  t["learning_rate"] = train.learning_rate;
  t["adam_beta1"] = train.adam_beta1;
  t["adam_beta2"] = train.adam_beta2;
  t["adam_epsilon"] = train.adam_epsilon;
  t["anchor_mode"] = to_string(train.anchor_mode);
  t["negative_sampling"] = to_string(train.negative_sampling);
  auto& m = j["mine"];
  m["threshold"] = mine.threshold;
  m["pairing"] = to_string(mine.pairing);
  auto& r = j["report"];
  r["format"] = report.format == ReportFormat::kCsv ? "csv" : "jsonl";
  r["histogram_bins"] = report.histogram_bins;
  r["bin_edges"] = report.bin_edges;
  r["predictions"] = report.predictions ? nlohmann::ordered_json(report.predictions->generic_string())
                                        : nlohmann::ordered_json(nullptr);
  r["gold"] = report.gold ? nlohmann::ordered_json(report.gold->generic_string()) : nlohmann::ordered_json(nullptr);
  r["pca_lemma"] = report.pca_lemma ? nlohmann::ordered_json(*report.pca_lemma) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace hardmeta::cli
