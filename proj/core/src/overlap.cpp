#include "hardmeta/overlap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "hardmeta/error.hpp"
#include "jsonl.hpp"

namespace hardmeta {

namespace {

// Unit vectors for one neighbour pool, members sorted by id so that the
// member position doubles as the id tie-break.
class PoolIndex {
 public:
  PoolIndex(const EmbeddingMatrix& sor, std::vector<std::size_t> rows_sorted_by_id)
      : dim_(sor.dim), rows_(std::move(rows_sorted_by_id)), unit_(rows_.size() * dim_) {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      auto v = sor.row(rows_[i]);
      double sq = 0.0;
      for (float x : v) sq += static_cast<double>(x) * x;
      if (sq == 0.0) throw NumericalError("zero-norm vector for id '" + sor.ids[rows_[i]] + "'");
      const double norm = std::sqrt(sq);
      for (std::size_t d = 0; d < dim_; ++d) unit_[i * dim_ + d] = v[d] / norm;
    }
  }

  std::size_t size() const { return rows_.size(); }
  std::size_t row(std::size_t pos) const { return rows_[pos]; }

  double distance(std::size_t a, std::size_t b) const {
    const double* u = &unit_[a * dim_];
    const double* v = &unit_[b * dim_];
    double dot = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) dot += u[d] * v[d];
    return 1.0 - std::clamp(dot, -1.0, 1.0);
  }

  /// Positions of the k nearest members to `query`, excluding it.
  std::vector<std::size_t> nearest(std::size_t query, std::size_t k,
                                   std::vector<std::pair<double, std::size_t>>& scratch) const {
    scratch.clear();
    for (std::size_t c = 0; c < rows_.size(); ++c) {
      if (c != query) scratch.emplace_back(distance(query, c), c);
    }
    auto mid = scratch.begin() + static_cast<std::ptrdiff_t>(k);
    std::partial_sort(scratch.begin(), mid, scratch.end());
    std::vector<std::size_t> out;
    out.reserve(k);
    for (auto it = scratch.begin(); it != mid; ++it) out.push_back(it->second);
    return out;
  }

 private:
  std::size_t dim_;
  std::vector<std::size_t> rows_;
  std::vector<double> unit_;
};

std::unordered_map<std::string, std::size_t> row_index(const EmbeddingMatrix& sor) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(sor.rows());
  for (std::size_t i = 0; i < sor.rows(); ++i) index.emplace(sor.ids[i], i);
  return index;
}

std::vector<std::size_t> rows_sorted_by_id(const EmbeddingMatrix& sor,
                                           const std::vector<std::string>& pool,
                                           const std::unordered_map<std::string, std::size_t>& index) {
  std::vector<std::string> ids = pool;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ConfigError("knn: duplicate id in pool");
  }
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw DataError("knn: no embedding for pool id '" + id + "'");
    rows.push_back(it->second);
  }
  (void)sor;
  return rows;
}

}  // namespace

const OverlapScore* ScoreTable::find(const std::string& instance_id) const {
  for (const auto& s : scores) {
    if (s.instance_id == instance_id) return &s;
  }
  return nullptr;
}

std::vector<std::string> knn(const EmbeddingMatrix& sor, const std::vector<std::string>& pool,
                             const std::string& query_id, std::size_t k) {
  const auto index = row_index(sor);
  PoolIndex pool_index(sor, rows_sorted_by_id(sor, pool, index));
  std::size_t query = pool_index.size();
  for (std::size_t p = 0; p < pool_index.size(); ++p) {
    if (sor.ids[pool_index.row(p)] == query_id) query = p;
  }
  if (query == pool_index.size()) throw ConfigError("knn: query '" + query_id + "' not in pool");
  if (k + 1 > pool_index.size()) {
    throw ConfigError("knn: k = " + std::to_string(k) + " exceeds pool size - 1 = " +
                      std::to_string(pool_index.size() - 1));
  }
  std::vector<std::pair<double, std::size_t>> scratch;
  std::vector<std::string> out;
  for (std::size_t p : pool_index.nearest(query, k, scratch)) out.push_back(sor.ids[pool_index.row(p)]);
  return out;
}

OverlapScore overlap_ratio(const EmbeddingMatrix& sor, const std::vector<std::string>& pool,
                           const std::unordered_map<std::string, std::string>& sense_of,
                           const std::string& query_id) {
  auto sense = [&](const std::string& id) -> const std::string& {
    auto it = sense_of.find(id);
    if (it == sense_of.end()) throw DataError("overlap_ratio: no sense for id '" + id + "'");
    return it->second;
  };
  OverlapScore score;
  score.instance_id = query_id;
  score.sense_id = sense(query_id);
  std::size_t same = 0;
  for (const auto& id : pool) {
    if (id != query_id && sense(id) == score.sense_id) ++same;
  }
  if (same == 0) {
    throw DataError("overlap_ratio: sense '" + score.sense_id + "' of '" + query_id +
                    "' is a singleton in the pool");
  }
  score.k = same;
  score.neighbor_ids = knn(sor, pool, query_id, score.k);
  for (const auto& id : score.neighbor_ids) {
    if (sense(id) == score.sense_id) ++score.s;
  }
  score.phi = static_cast<double>(score.s) / static_cast<double>(score.k);
  return score;
}

ScoreTable score_all(const EmbeddingMatrix& sor, const Corpus& corpus,
                     const SenseInventory& inventory, const ScoreOptions& options) {
  ScoreTable table;
  table.scope = options.group_by_lemma ? "lemma" : "corpus";
  const auto index = row_index(sor);
  const auto counts = sense_counts(corpus);
  const auto& instances = corpus.instances;

  std::vector<std::string> missing;
  for (const auto& inst : instances) {
    if (!index.contains(inst.instance_id)) missing.push_back(inst.instance_id);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    throw AlignmentError(AlignmentError::Kind::kMissingEmbedding, std::move(missing));
  }

  // Reason per corpus position; empty means still eligible.
  std::vector<std::string> reason(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    if (!inventory.contains(inst.sense_id)) {
      reason[i] = "unresolved sense '" + inst.sense_id + "'";
      continue;
    }
    const std::size_t n = counts.at(inst.sense_id);
    if (n < options.min_examples) {
      reason[i] = "sense '" + inst.sense_id + "' has " + std::to_string(n) +
                  " instances, below min_examples " + std::to_string(options.min_examples);
      continue;
    }
    bool zero = true;
    for (float v : sor.row(index.at(inst.instance_id))) {
      if (v != 0.0f) {
        zero = false;
        break;
      }
    }
    if (zero) reason[i] = "zero-norm embedding";
  }

  // Pools of eligible corpus positions, members sorted by id.
  std::map<std::string, std::vector<std::size_t>> pool_members;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!reason[i].empty()) continue;
    pool_members[options.group_by_lemma ? instances[i].lemma : std::string()].push_back(i);
  }

  struct Query {
    std::size_t pool;
    std::size_t position;
  };
  std::vector<PoolIndex> pools;
  std::vector<std::vector<std::size_t>> pool_corpus_pos;
  std::vector<std::vector<std::size_t>> pool_same_sense;  // same-sense count per member
  std::vector<Query> query_of(instances.size(), Query{SIZE_MAX, 0});
  for (auto& [key, members] : pool_members) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return instances[a].instance_id < instances[b].instance_id;
    });
    std::vector<std::size_t> rows;
    rows.reserve(members.size());
    std::unordered_map<std::string, std::size_t> per_sense;
    for (std::size_t m : members) {
      rows.push_back(index.at(instances[m].instance_id));
      ++per_sense[instances[m].sense_id];
    }
    std::vector<std::size_t> same(members.size());
    for (std::size_t p = 0; p < members.size(); ++p) {
      same[p] = per_sense[instances[members[p]].sense_id];
      query_of[members[p]] = Query{pools.size(), p};
    }
    pools.emplace_back(sor, std::move(rows));
    pool_corpus_pos.push_back(members);
    pool_same_sense.push_back(std::move(same));
  }

  std::vector<std::size_t> queries;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!reason[i].empty()) continue;
    const Query q = query_of[i];
    if (pool_same_sense[q.pool][q.position] < 2) {
      reason[i] = "sense '" + instances[i].sense_id + "' is a singleton in its pool";
      continue;
    }
    queries.push_back(i);
  }

  std::vector<OverlapScore> results(queries.size());
  auto score_one = [&](std::size_t qi, std::vector<std::pair<double, std::size_t>>& scratch) {
    const std::size_t i = queries[qi];
    const Query q = query_of[i];
    const PoolIndex& pool = pools[q.pool];
    const auto& members = pool_corpus_pos[q.pool];
    OverlapScore& score = results[qi];
    score.instance_id = instances[i].instance_id;
    score.sense_id = instances[i].sense_id;
    score.k = pool_same_sense[q.pool][q.position] - 1;
    for (std::size_t p : pool.nearest(q.position, score.k, scratch)) {
      const Instance& neighbor = instances[members[p]];
      if (neighbor.sense_id == score.sense_id) ++score.s;
      score.neighbor_ids.push_back(neighbor.instance_id);
    }
    score.phi = static_cast<double>(score.s) / static_cast<double>(score.k);
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, queries.size()));
  if (threads <= 1) {
    std::vector<std::pair<double, std::size_t>> scratch;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) score_one(qi, scratch);
  } else {
    std::atomic<std::size_t> next{0};
    constexpr std::size_t kChunk = 256;
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        std::vector<std::pair<double, std::size_t>> scratch;
        for (;;) {
          const std::size_t begin = next.fetch_add(kChunk);
          if (begin >= queries.size()) break;
          const std::size_t end = std::min(queries.size(), begin + kChunk);
          for (std::size_t qi = begin; qi < end; ++qi) score_one(qi, scratch);
        }
      });
    }
    for (auto& w : workers) w.join();
  }

  table.scores = std::move(results);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!reason[i].empty()) table.skipped.push_back({instances[i].instance_id, reason[i]});
  }
  return table;
}

void write_scores(std::ostream& out, const ScoreTable& table) {
  for (const auto& s : table.scores) {
    detail::ordered_json r;
    r["id"] = s.instance_id;
    r["sense"] = s.sense_id;
    r["k"] = s.k;
    r["s"] = s.s;
    r["phi"] = s.phi;
    r["neighbors"] = s.neighbor_ids;
    detail::write_line(out, r);
  }
  if (!out) throw DataError("write failure while writing scores");
}

void save_scores(const std::filesystem::path& path, const ScoreTable& table) {
  auto out = detail::open_output(path);
  write_scores(out, table);
}

ScoreTable read_scores(std::istream& in, const std::string& source) {
  ScoreTable table;
  std::unordered_set<std::string> seen;
  detail::for_each_record(in, source, [&](const detail::json& r, std::size_t line) {
    detail::check_keys(r, {"id", "sense", "k", "s", "phi", "neighbors"}, source, line, nullptr);
    OverlapScore s;
    s.instance_id = detail::get_string(r, "id", source, line);
    s.sense_id = detail::get_string(r, "sense", source, line);
    const long long k = detail::get_integer(r, "k", source, line);
    const long long hits = detail::get_integer(r, "s", source, line);
    if (k <= 0 || hits < 0 || hits > k) throw ParseError(source, line, "invalid k/s");
    s.k = static_cast<std::size_t>(k);
    s.s = static_cast<std::size_t>(hits);
    s.phi = detail::get_number(r, "phi", source, line);
    if (s.phi != static_cast<double>(s.s) / static_cast<double>(s.k)) {
      throw ParseError(source, line, "phi does not equal s/k");
    }
    auto nb = r.find("neighbors");
    if (nb == r.end() || !nb->is_array()) throw ParseError(source, line, "key 'neighbors' must be an array");
    for (const auto& id : *nb) {
      if (!id.is_string()) throw ParseError(source, line, "neighbor ids must be strings");
      s.neighbor_ids.push_back(id.get<std::string>());
    }
    if (s.neighbor_ids.size() != s.k) throw ParseError(source, line, "neighbors length differs from k");
    if (!seen.insert(s.instance_id).second) throw ParseError(source, line, "duplicate score for '" + s.instance_id + "'");
    table.scores.push_back(std::move(s));
  });
  return table;
}

ScoreTable load_scores(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_scores(in, path.string());
}

void write_skipped(std::ostream& out, const std::vector<SkippedInstance>& skipped) {
  for (const auto& s : skipped) {
    detail::ordered_json r;
    r["id"] = s.instance_id;
    r["reason"] = s.reason;
    detail::write_line(out, r);
  }
}

}  // namespace hardmeta
