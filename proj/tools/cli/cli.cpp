#include "cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "hardmeta/corpus.hpp"
#include "hardmeta/embedstore.hpp"
#include "hardmeta/error.hpp"
#include "hardmeta/miner.hpp"
#include "hardmeta/overlap.hpp"
#include "hardmeta/report.hpp"
#include "hardmeta/sortrain.hpp"
#include "hardmeta/synth.hpp"
#include "hardmeta/version.hpp"

namespace hardmeta::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path + " for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw DataError("sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  return out;
}

fs::path require_file(const fs::path& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path is not configured");
  if (!fs::is_regular_file(path)) throw DataError("missing " + what + " file: " + path.string());
  return path;
}

class Runner {
 public:
  Runner(PipelineConfig cfg, std::string command, std::ostream& out, std::ostream& err)
      : cfg_(std::move(cfg)), command_(std::move(command)), out_(out), err_(err) {
    cfg_.train.seed = cfg_.seed;
    cfg_.synth.seed = cfg_.seed;
  }

  const std::string& stage() const { return stage_; }

  void run() {
    if (command_ == "synth") {
      synth();
      return;
    }
    fs::create_directories(cfg_.workdir);
    if (command_ == "validate") {
      validate();
    } else if (command_ == "train") {
      train();
    } else if (command_ == "project") {
      project();
    } else if (command_ == "score") {
      score();
    } else if (command_ == "mine") {
      mine();
    } else if (command_ == "report") {
      report();
    } else if (command_ == "pipeline") {
      validate();
      if (!cfg_.sor) {
        train();
        project();
      }
      score();
      mine();
      report();
    } else {
      throw ConfigError("unknown subcommand '" + command_ + "'");
    }
    stage_ = "manifest";
    write_manifest(cfg_.workdir);
  }

 private:
  fs::path work(const char* name) const { return cfg_.workdir / name; }

  void note_input(const std::string& name, const fs::path& path) { inputs_[name] = path; }

  const Corpus& corpus() {
    if (!corpus_) {
      Warnings w;
      corpus_ = load_corpus(require_file(cfg_.corpus, "corpus"), &w);
      for (const auto& m : w) err_ << "warning: " << m << '\n';
      note_input("corpus", cfg_.corpus);
    }
    return *corpus_;
  }

  const SenseInventory& inventory() {
    if (!inventory_) {
      Warnings w;
      inventory_ = load_sense_inventory(require_file(cfg_.inventory, "inventory"), &w);
      for (const auto& m : w) err_ << "warning: " << m << '\n';
      note_input("inventory", cfg_.inventory);
    }
    return *inventory_;
  }

  const EmbeddingMatrix& embeddings() {
    if (!embeddings_) {
      embeddings_ = read_embeddings(require_file(cfg_.embeddings, "embeddings"));
      note_input("embeddings", cfg_.embeddings);
    }
    return *embeddings_;
  }

  fs::path sor_path() {
    if (cfg_.sor) {
      note_input("sor", *cfg_.sor);
      return require_file(*cfg_.sor, "SOR embeddings");
    }
    return require_file(work(kSorFile), "SOR embeddings (run `project` first)");
  }

  void validate() {
    stage_ = "validate";
    const auto report = hardmeta::validate(corpus(), inventory(), cfg_.min_examples);
    ojson j;
    j["n_instances"] = report.n_instances;
    j["n_words"] = report.n_words;
    j["n_senses"] = report.n_senses;
    j["min_examples"] = cfg_.min_examples;
    j["unresolved_sense_ids"] = report.unresolved_sense_ids;
    j["senses_below_min"] = ojson::array();
    for (const auto& [sense, count] : report.senses_below_min) {
      j["senses_below_min"].push_back(ojson{{"sense", sense}, {"count", count}});
    }
    j["inventory_senses"] = inventory().size();
    j["inventory_metaphorical"] = inventory().count(MetaphorLabel::kMetaphorical);
    auto out = open_out(work(kValidationFile));
    out << j.dump(2) << '\n';
    out_ << "validate: " << report.n_instances << " instances, " << report.n_words << " words, "
         << report.n_senses << " senses; " << report.unresolved_sense_ids.size() << " unresolved, "
         << report.senses_below_min.size() << " below min_examples=" << cfg_.min_examples << '\n';
  }

  void train() {
    stage_ = "train";
    AlignedDataset aligned = align(corpus(), embeddings());
    // Train on the same support-filtered instances that get scored.
    aligned.corpus = filter_senses(aligned.corpus, inventory(), cfg_.min_examples);
    const auto started = std::chrono::steady_clock::now();
    const TrainResult result = hardmeta::train(aligned, inventory(), cfg_.train);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    save_head(work(kHeadFile), result.head);
    auto log = open_out(work(kTrainingLogFile));
    for (std::size_t i = 0; i < result.log.losses.size(); ++i) {
      log << ojson{{"step", i}, {"loss", result.log.losses[i]}}.dump() << '\n';
    }
    out_ << "train: " << result.log.losses.size() << " steps";
    if (!result.log.losses.empty()) out_ << ", final loss " << result.log.losses.back();
    out_ << " (" << std::fixed << std::setprecision(2) << seconds << " s)" << std::defaultfloat << '\n';
  }

  void project() {
    stage_ = "project";
    const ProjectionHead head = load_head(require_file(work(kHeadFile), "head (run `train` first)"));
    const EmbeddingMatrix sor = hardmeta::project(head, embeddings(), cfg_.threads);
    write_embeddings(work(kSorFile), sor);
    out_ << "project: " << sor.rows() << " vectors, dim " << sor.dim << '\n';
  }

  const EmbeddingMatrix& sor() {
    if (!sor_) {
      sor_ = read_embeddings(sor_path());
      // Exact id-set equality; nothing is dropped silently.
      align(corpus(), *sor_);
    }
    return *sor_;
  }

  void score() {
    stage_ = "score";
    ScoreOptions opts;
    opts.min_examples = cfg_.min_examples;
    opts.group_by_lemma = cfg_.group_by_lemma;
    opts.threads = cfg_.threads;
    const ScoreTable table = score_all(sor(), corpus(), inventory(), opts);
    save_scores(work(kScoresFile), table);
    auto skipped = open_out(work(kSkippedFile));
    write_skipped(skipped, table.skipped);
    out_ << "score: " << table.scores.size() << " scored, " << table.skipped.size() << " skipped\n";
  }

  void mine() {
    stage_ = "mine";
    const fs::path scores_path = work(kScoresFile);
    if (!fs::is_regular_file(scores_path)) {
      throw DataError("missing score file: " + scores_path.string() + " (run `score` first)");
    }
    const ScoreTable table = load_scores(scores_path);
    const auto hard = flag_hard(table, cfg_.mine.threshold);
    const auto metaphors = select_hard_metaphors(hard, corpus(), inventory());
    const PairingResult pairs = pair_literals(metaphors, table, sor(), corpus(), inventory(), cfg_.mine);
    emit_dataset(work(kDatasetFile), pairs.pairs, corpus(), inventory());
    auto unpairable = open_out(work(kUnpairableFile));
    write_unpairable(unpairable, pairs.unpairable);
    out_ << "mine: " << hard.size() << " hard, " << metaphors.size() << " hard metaphors, " << pairs.pairs.size()
         << " pairs, " << pairs.unpairable.size() << " unpairable\n";
  }

  void report() {
    stage_ = "report";
    const auto& rc = cfg_.report;
    const char* ext = rc.format == ReportFormat::kCsv ? ".csv" : ".jsonl";

    {
      auto out = open_out(work(kStatsFile));
      auto emit = [&](const char* name, const StatsSummary& st) {
        std::ostringstream line;
        write_stats(line, st);
        auto j = ojson::parse(line.str());
        ojson tagged;
        tagged["dataset"] = name;
        for (auto& [k, v] : j.items()) tagged[k] = v;
        out << tagged.dump() << '\n';
      };
      emit("corpus", corpus_stats(corpus(), inventory()));
      const fs::path hmd = work(kDatasetFile);
      if (fs::is_regular_file(hmd)) emit("hmd", corpus_stats(dataset_corpus(hmd), inventory()));
    }

    const fs::path scores_path = work(kScoresFile);
    if (!fs::is_regular_file(scores_path)) {
      throw DataError("missing score file: " + scores_path.string() + " (run `score` first)");
    }
    const ScoreTable table = load_scores(scores_path);
    {
      auto out = open_out(cfg_.workdir / (std::string("phi_histogram") + ext));
      write_histogram(out, phi_histogram(table, rc.histogram_bins), rc.format);
    }

    if (rc.predictions) {
      const LabelMap predictions = load_predictions(require_file(*rc.predictions, "predictions"));
      note_input("predictions", *rc.predictions);
      LabelMap gold;
      if (rc.gold) {
        gold = load_predictions(require_file(*rc.gold, "gold labels"));
        note_input("gold", *rc.gold);
      } else {
        for (const auto& inst : corpus().instances) {
          gold[inst.instance_id] = inventory().label_of(inst.sense_id) == MetaphorLabel::kMetaphorical;
        }
      }
      auto out = open_out(cfg_.workdir / (std::string("bin_recall") + ext));
      write_bin_report(out, bin_recall(table, predictions, gold, rc.bin_edges), rc.format);
    }

    // Scatter of one lemma's scored instances, before and after projection.
    std::map<std::string, std::vector<std::string>> by_lemma;
    std::unordered_map<std::string, std::string> sense_of;
    std::unordered_map<std::string, const Instance*> inst_of;
    for (const auto& inst : corpus().instances) inst_of.emplace(inst.instance_id, &inst);
    std::vector<std::string> lemma_order;
    for (const auto& s : table.scores) {
      const Instance* inst = inst_of.at(s.instance_id);
      if (!by_lemma.contains(inst->lemma)) lemma_order.push_back(inst->lemma);
      by_lemma[inst->lemma].push_back(s.instance_id);
      sense_of[s.instance_id] = s.sense_id;
    }
    std::optional<std::string> lemma = rc.pca_lemma;
    if (!lemma) {
      for (const auto& l : lemma_order) {
        if (by_lemma[l].size() >= 2) {
          lemma = l;
          break;
        }
      }
    }
    if (lemma && by_lemma[*lemma].size() >= 2) {
      const auto& ids = by_lemma[*lemma];
      {
        auto out = open_out(cfg_.workdir / (std::string("pca_sor") + ext));
        write_pca(out, pca_scatter(sor(), ids, sense_of), rc.format);
      }
      if (!cfg_.embeddings.empty() && fs::is_regular_file(cfg_.embeddings)) {
        auto out = open_out(cfg_.workdir / (std::string("pca_raw") + ext));
        write_pca(out, pca_scatter(embeddings(), ids, sense_of), rc.format);
      }
    }
    out_ << "report: written to " << cfg_.workdir.string() << '\n';
  }

  // Instances referenced by an emitted dataset, rebuilt from its records.
  Corpus dataset_corpus(const fs::path& path) {
    Corpus c;
    c.source_name = path.string();
    std::ifstream in(path, std::ios::binary);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto r = nlohmann::json::parse(line);
      if (header) {
        header = false;
        continue;
      }
      Instance inst;
      inst.instance_id = r.at("id").get<std::string>();
      inst.lemma = r.at("lemma").get<std::string>();
      inst.word_form = r.at("word").get<std::string>();
      inst.sense_id = r.at("sense").get<std::string>();
      inst.tokens = r.at("tokens").get<std::vector<std::string>>();
      inst.target_index = r.at("target").get<std::size_t>();
      c.instances.push_back(std::move(inst));
    }
    return c;
  }

  void synth() {
    stage_ = "synth";
    const SynthOutput generated = generate(cfg_.synth);
    save_synth(cfg_.workdir, generated);
    out_ << "synth: " << generated.corpus.instances.size() << " instances, " << generated.inventory.size()
         << " senses, " << generated.truth.planted_hard_ids.size() << " planted hard, written to "
         << cfg_.workdir.string() << '\n';
    stage_ = "manifest";
    write_manifest(cfg_.workdir);
  }

  void write_manifest(const fs::path& dir) {
    ojson m;
    m["tool"] = "hardmeta";
    m["version"] = kVersion;
    m["sore_version"] = kSoreVersion;
    m["command"] = command_;
    m["seed"] = cfg_.seed;
    m["config"] = cfg_.snapshot();
    if (command_ == "synth") {
      ojson s;
      s["description"] = cfg_.synth.describe();
      m["synth"] = s;
    }
    ojson inputs = ojson::object();
    for (const auto& [name, path] : inputs_) {
      inputs[name] = ojson{{"path", path.generic_string()}, {"sha256", file_digest(path.string())}};
    }
    m["inputs"] = inputs;
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().filename() != kManifestFile) {
        names.push_back(entry.path().filename().string());
      }
    }
    std::sort(names.begin(), names.end());
    ojson outputs = ojson::object();
    for (const auto& n : names) outputs[n] = file_digest((dir / n).string());
    m["outputs"] = outputs;
    auto out = open_out(dir / kManifestFile);
    out << m.dump(2) << '\n';
  }

  PipelineConfig cfg_;
  std::string command_;
  std::ostream& out_;
  std::ostream& err_;
  std::string stage_ = "startup";
  std::map<std::string, fs::path> inputs_;
  std::optional<Corpus> corpus_;
  std::optional<SenseInventory> inventory_;
  std::optional<EmbeddingMatrix> embeddings_;
  std::optional<EmbeddingMatrix> sor_;
};

void error_record(std::ostream& err, const std::string& stage, int code, const std::string& message) {
  ojson r;
  r["error"] = message;
  r["stage"] = stage;
  r["exit_code"] = code;
  err << r.dump() << '\n';
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hard-metaphor mining over sense-annotated embeddings", "hardmeta"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads, min_examples, steps, batch_size;
  std::optional<double> threshold;
  std::string workdir, corpus, inventory, embeddings, sor, format;
  app.add_option("-c,--config", config_path, "pipeline config file (JSON)");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--threads", threads, "worker threads for scoring and projection");
  app.add_option("-w,--workdir", workdir, "stage output directory");
  app.add_option("--corpus", corpus, "corpus line file");
  app.add_option("--inventory", inventory, "sense inventory line file");
  app.add_option("--embeddings", embeddings, "input embeddings (SORE)");
  app.add_option("--sor", sor, "externally produced SOR embeddings (SORE); skips train/project");
  app.add_option("--format", format, "report format: jsonl or csv");
  app.add_option("--min-examples", min_examples, "minimum instances per sense");
  app.add_option("--steps", steps, "training steps");
  app.add_option("--batch-size", batch_size, "training batch size (even, >= 4)");
  app.add_option("--threshold", threshold, "hard-example threshold on phi");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"validate", "check corpus against the sense inventory"},
      {"train", "train the projection head"},
      {"project", "project embeddings through the trained head"},
      {"score", "compute overlap ratios"},
      {"mine", "select hard metaphors and pair them with literals"},
      {"report", "statistics, histograms, PCA scatter and recall per bin"},
      {"synth", "generate a synthetic corpus, inventory and embeddings into the workdir"},
      {"pipeline", "validate, train, project, score, mine and report"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) subs[name] = app.add_subcommand(name, help);

  std::optional<std::size_t> n_lemmas, senses_per_lemma, instances_per_sense, dim;
  std::optional<double> noise, hard_fraction, metaphor_fraction;
  std::string mixing;
  CLI::App* synth_cmd = subs["synth"];
  synth_cmd->add_option("--lemmas", n_lemmas, "number of lemmas");
  synth_cmd->add_option("--senses", senses_per_lemma, "senses per lemma");
  synth_cmd->add_option("--instances", instances_per_sense, "instances per sense (>= 4)");
  synth_cmd->add_option("--dim", dim, "embedding dimension");
  synth_cmd->add_option("--noise", noise, "per-coordinate Gaussian noise sigma");
  synth_cmd->add_option("--hard-fraction", hard_fraction, "fraction of each sense relocated to another sense");
  synth_cmd->add_option("--metaphor-fraction", metaphor_fraction, "fraction of senses labeled METAPHORICAL");
  synth_cmd->add_option("--mixing", mixing, "NONE, ORTHOGONAL or ANISOTROPIC");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  std::string stage = "startup";
  try {
    if (!args.empty() && !args.front().starts_with("-") && !subs.contains(args.front())) {
      throw ConfigError("unknown subcommand '" + args.front() + "'");
    }
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::ParseError& e) {
      throw ConfigError(e.what());
    }
    std::string command;
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) command = name;
    }

    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    apply_env_overrides(cfg);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (!workdir.empty()) cfg.workdir = workdir;
    if (!corpus.empty()) cfg.corpus = corpus;
    if (!inventory.empty()) cfg.inventory = inventory;
    if (!embeddings.empty()) cfg.embeddings = embeddings;
    if (!sor.empty()) cfg.sor = fs::path(sor);
    if (!format.empty()) {
      auto f = parse_report_format(format);
      if (!f) throw ConfigError("--format must be jsonl or csv");
      cfg.report.format = *f;
    }
    if (min_examples) cfg.min_examples = *min_examples;
    if (steps) cfg.train.steps = *steps;
    if (batch_size) cfg.train.batch_size = *batch_size;
    if (threshold) cfg.mine.threshold = *threshold;
    if (n_lemmas) cfg.synth.n_lemmas = *n_lemmas;
    if (senses_per_lemma) cfg.synth.senses_per_lemma = *senses_per_lemma;
    if (instances_per_sense) cfg.synth.instances_per_sense = *instances_per_sense;
    if (dim) cfg.synth.dim = *dim;
    if (noise) cfg.synth.noise_sigma = *noise;
    if (hard_fraction) cfg.synth.hard_fraction = *hard_fraction;
    if (metaphor_fraction) cfg.synth.metaphor_fraction = *metaphor_fraction;
    if (!mixing.empty()) {
      auto m = parse_mixing(mixing);
      if (!m) throw ConfigError("--mixing must be NONE, ORTHOGONAL or ANISOTROPIC");
      cfg.synth.mixing = *m;
    }
    cfg.train.validate();
    cfg.mine.validate();

    Runner runner(std::move(cfg), command, out, err);
    try {
      runner.run();
    } catch (...) {
      stage = runner.stage();
      throw;
    }
    return 0;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    error_record(err, stage, code, e.what());
    return code;
  } catch (const fs::filesystem_error& e) {
    error_record(err, stage, 3, e.what());
    return 3;
  } catch (const std::exception& e) {
    error_record(err, stage, 3, e.what());
    return 3;
  }
}

int run_subcommand(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_subcommand(args, std::cout, std::cerr);
}

}  // namespace hardmeta::cli
