#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hardmeta/miner.hpp"
#include "hardmeta/report.hpp"
#include "hardmeta/sortrain.hpp"
#include "hardmeta/synth.hpp"
#include "json.hpp"

namespace hardmeta::cli {

struct ReportOptions {
  ReportFormat format = ReportFormat::kJsonl;
  std::size_t histogram_bins = 10;
  std::vector<double> bin_edges = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::optional<std::filesystem::path> predictions;
  std::optional<std::filesystem::path> gold;  // defaults to METAPHORICAL labels
  std::optional<std::string> pca_lemma;
};

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path inventory;
  std::filesystem::path embeddings;
  std::optional<std::filesystem::path> sor;  // external SOR; bypasses train/project
  std::filesystem::path workdir = "work";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t min_examples = 4;
  bool group_by_lemma = true;
  TrainConfig train;
  MineConfig mine;
  ReportOptions report;
  SynthConfig synth;

  /// Snapshot for the run manifest. The workdir is left out so that runs
  /// into different directories can be compared.
  nlohmann::ordered_json snapshot() const;
};

/// Parses a config object; relative paths resolve against `base_dir`.
/// Throws ConfigError on unknown keys or bad values.
PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// Applies HARDMETA_* environment variables (SEED, THREADS, WORKDIR,
/// CORPUS, INVENTORY, EMBEDDINGS, SOR, MIN_EXAMPLES, STEPS, BATCH_SIZE,
/// THRESHOLD, FORMAT).
void apply_env_overrides(PipelineConfig& cfg);

}  // namespace hardmeta::cli
