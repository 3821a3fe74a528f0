#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <unistd.h>
#include <utility>
#include <vector>

#include "hardmeta/corpus.hpp"
#include "hardmeta/embedstore.hpp"

namespace fixtures {

inline hardmeta::Instance instance(std::string id, std::string lemma, std::string sense,
                                   std::size_t n_tokens = 3) {
  hardmeta::Instance inst;
  inst.instance_id = std::move(id);
  inst.lemma = lemma;
  inst.word_form = std::move(lemma);
  inst.pos = hardmeta::Pos::kNoun;
  inst.sense_id = std::move(sense);
  for (std::size_t i = 0; i < n_tokens; ++i) inst.tokens.push_back("t" + std::to_string(i));
  inst.target_index = 0;
  return inst;
}

inline hardmeta::SenseEntry sense(std::string id, std::string lemma, hardmeta::MetaphorLabel label) {
  return {id, std::move(lemma), "gloss of " + id, label};
}

/// Unit 2-D vector at `degrees`.
inline std::vector<float> at_angle(double degrees) {
  const double r = degrees * std::numbers::pi / 180.0;
  return {static_cast<float>(std::cos(r)), static_cast<float>(std::sin(r))};
}

inline hardmeta::EmbeddingMatrix matrix(const std::vector<std::pair<std::string, std::vector<float>>>& rows) {
  hardmeta::EmbeddingMatrix m;
  m.dim = rows.empty() ? 0 : rows.front().second.size();
  for (const auto& [id, v] : rows) {
    m.ids.push_back(id);
    m.values.insert(m.values.end(), v.begin(), v.end());
  }
  return m;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "hm") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace fixtures
