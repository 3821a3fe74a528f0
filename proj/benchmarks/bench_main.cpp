#include <benchmark/benchmark.h>

#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hardmeta/overlap.hpp"
#include "hardmeta/rng.hpp"
#include "hardmeta/sortrain.hpp"
#include "hardmeta/synth.hpp"

namespace {

using namespace hardmeta;

SynthOutput make_corpus(std::size_t lemmas, std::size_t per_sense, std::size_t dim) {
  SynthConfig cfg;
  cfg.n_lemmas = lemmas;
  cfg.senses_per_lemma = 3;
  cfg.instances_per_sense = per_sense;
  cfg.dim = dim;
  cfg.noise_sigma = 0.2;
  cfg.hard_fraction = 0.1;
  return generate(cfg);
}

// Per-lemma pools; range(0) lemmas, range(1) instances per sense.
void BM_ScoreAll(benchmark::State& state) {
  const auto s = make_corpus(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 256);
  ScoreOptions opt;
  opt.threads = static_cast<std::size_t>(state.range(2));
  for (auto _ : state) {
    ScoreTable t = score_all(s.embeddings, s.corpus, s.inventory, opt);
    benchmark::DoNotOptimize(t.scores.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.corpus.instances.size()));
}
BENCHMARK(BM_ScoreAll)
    ->Args({500, 10, 1})
    ->Args({50, 100, 1})
    ->Args({500, 10, 4})
    ->Unit(benchmark::kMillisecond);

void BM_ScoreAllCorpusWide(benchmark::State& state) {
  const auto s = make_corpus(20, static_cast<std::size_t>(state.range(0)), 64);
  ScoreOptions opt;
  opt.group_by_lemma = false;
  for (auto _ : state) {
    ScoreTable t = score_all(s.embeddings, s.corpus, s.inventory, opt);
    benchmark::DoNotOptimize(t.scores.data());
  }
}
BENCHMARK(BM_ScoreAllCorpusWide)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_LossGradient(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto in_dim = static_cast<std::size_t>(state.range(1));
  Rng rng(1);
  TrainConfig cfg;
  cfg.batch_size = n;
  ProjectionHead head = ProjectionHead::initialize(in_dim, cfg, rng);
  Eigen::MatrixXd x(static_cast<long>(n), static_cast<long>(in_dim));
  for (long i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<std::string> senses;
  for (std::size_t p = 0; p < n / 2; ++p) senses.push_back("s" + std::to_string(p));
  const Batch batch = make_paired_batch(rows, senses);
  for (auto _ : state) {
    HeadGradient g = loss_gradient(x, head, batch, cfg.temperature, AnchorMode::kAllAnchors);
    benchmark::DoNotOptimize(g.loss);
  }
}
BENCHMARK(BM_LossGradient)->Args({64, 256})->Args({64, 768})->Args({16, 256});

void BM_Knn(benchmark::State& state) {
  const auto s = make_corpus(1, static_cast<std::size_t>(state.range(0)), 256);
  const std::vector<std::string>& pool = s.embeddings.ids;
  for (auto _ : state) {
    auto nn = knn(s.embeddings, pool, pool.front(), 10);
    benchmark::DoNotOptimize(nn.data());
  }
}
BENCHMARK(BM_Knn)->Arg(100)->Arg(1000);

void BM_SoreRoundTrip(benchmark::State& state) {
  const auto s = make_corpus(static_cast<std::size_t>(state.range(0)), 10, 256);
  for (auto _ : state) {
    std::stringstream buf;
    write_embeddings(buf, s.embeddings);
    EmbeddingMatrix back = read_embeddings(buf);
    benchmark::DoNotOptimize(back.values.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(s.embeddings.values.size() * sizeof(float)));
}
BENCHMARK(BM_SoreRoundTrip)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
