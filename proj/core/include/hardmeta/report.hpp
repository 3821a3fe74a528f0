#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hardmeta/corpus.hpp"
#include "hardmeta/embedstore.hpp"
#include "hardmeta/overlap.hpp"

namespace hardmeta {

enum class ReportFormat { kJsonl, kCsv };

std::optional<ReportFormat> parse_report_format(std::string_view token);

/// Corpus statistics in the layout of the usual WSD dataset tables. Ratios
/// are absent when their denominator is zero.
struct StatsSummary {
  std::size_t n_words = 0;
  std::size_t n_senses = 0;
  std::size_t n_examples = 0;
  std::size_t n_tokens = 0;
  std::optional<double> senses_per_word;
  std::optional<double> examples_per_word;
  std::optional<double> tokens_per_example;
  std::size_t n_metaphorical_senses = 0;  // distinct corpus senses labeled METAPHORICAL
};

StatsSummary corpus_stats(const Corpus& corpus, const SenseInventory& inventory);

/// Bin of `value` given ascending edges e0 < e1 < ... < en. Bins are
/// [e_i, e_{i+1}) except the last, which is closed.
std::size_t bin_of(double value, std::span<const double> edges);

/// n equal-width bins over [0, 1]: edges i/n.
std::vector<double> uniform_edges(std::size_t n_bins);

std::vector<std::size_t> phi_histogram(const ScoreTable& scores, std::size_t n_bins);

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct BinReport {
  std::vector<double> bin_edges;
  std::vector<std::size_t> counts;            // gold positives per bin
  std::vector<std::size_t> hits;              // ... predicted positive
  std::vector<std::optional<double>> recall;  // absent for empty bins
  /// Spearman between phi and per-instance correctness over gold positives.
  double rank_correlation = 0.0;
  /// Spearman between bin index and recall over populated bins.
  double bin_trend = 0.0;
};

using LabelMap = std::unordered_map<std::string, bool>;  // id -> positive?

/// Recall per phi bin among gold-positive scored instances. A missing
/// prediction counts as negative; a scored id without a gold label is a
/// DataError.
BinReport bin_recall(const ScoreTable& scores, const LabelMap& predictions, const LabelMap& gold,
                     const std::vector<double>& bin_edges);

/// Reads `id`/`pred` lines; pred may be "positive"/"negative", a boolean, or 0/1.
LabelMap load_predictions(const std::filesystem::path& path);

struct PcaPoint {
  std::string instance_id;
  std::string sense_id;
  double x = 0.0;
  double y = 0.0;
};

/// Mean-centred projection onto the top two covariance eigenvectors, each
/// signed so its largest-magnitude loading is positive.
std::vector<PcaPoint> pca_scatter(const EmbeddingMatrix& sor, const std::vector<std::string>& ids,
                                  const std::unordered_map<std::string, std::string>& sense_of);

void write_stats(std::ostream& out, const StatsSummary& stats);
void write_histogram(std::ostream& out, const std::vector<std::size_t>& counts, ReportFormat format);
void write_bin_report(std::ostream& out, const BinReport& report, ReportFormat format);
void write_pca(std::ostream& out, const std::vector<PcaPoint>& points, ReportFormat format);

}  // namespace hardmeta
