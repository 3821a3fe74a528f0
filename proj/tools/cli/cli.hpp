#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hardmeta::cli {

// Stage output names inside the workdir.
inline constexpr const char* kValidationFile = "validation.json";
inline constexpr const char* kHeadFile = "head.txt";
inline constexpr const char* kTrainingLogFile = "training_log.jsonl";
inline constexpr const char* kSorFile = "sor.sore";
inline constexpr const char* kScoresFile = "scores.jsonl";
inline constexpr const char* kSkippedFile = "scores_skipped.jsonl";
inline constexpr const char* kDatasetFile = "hmd.jsonl";
inline constexpr const char* kUnpairableFile = "unpairable.jsonl";
inline constexpr const char* kStatsFile = "stats.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";

/// Runs one subcommand: validate, train, project, score, mine, report,
/// synth or pipeline. Returns the process exit code (0 ok, 2 config,
/// 3 data, 4 numerical). Failures also print a one-line JSON error record
/// to `err`.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_subcommand(int argc, char** argv);

/// Hex SHA-256 of a file's contents.
std::string file_digest(const std::string& path);

}  // namespace hardmeta::cli
