#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "hardmeta/error.hpp"
#include "hardmeta/overlap.hpp"
#include "hardmeta/rng.hpp"
#include "hardmeta/synth.hpp"
#include "oracles.hpp"

namespace {

using namespace hardmeta;

TEST(Synth, ShapesIdsAndLabels) {
  SynthConfig cfg;
  SynthOutput s = generate(cfg);
  EXPECT_EQ(s.corpus.instances.size(), 10u * 3u * 20u);
  EXPECT_EQ(s.inventory.size(), 30u);
  EXPECT_EQ(s.inventory.count(MetaphorLabel::kMetaphorical), 10u);
  EXPECT_EQ(s.embeddings.rows(), s.corpus.instances.size());
  EXPECT_EQ(s.embeddings.dim, 32u);
  EXPECT_NO_THROW(align(s.corpus, s.embeddings));
  EXPECT_TRUE(s.truth.planted_hard_ids.empty());
  std::set<std::string> lemmas;
  for (const auto& inst : s.corpus.instances) {
    lemmas.insert(inst.lemma);
    EXPECT_LT(inst.target_index, inst.tokens.size());
    EXPECT_EQ(inst.tokens[inst.target_index], inst.lemma);
    EXPECT_TRUE(s.inventory.contains(inst.sense_id));
  }
  EXPECT_EQ(lemmas.size(), 10u);
}

TEST(Synth, NoNoiseCollapsesOntoCentroids) {
  SynthConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.n_lemmas = 3;
  SynthOutput s = generate(cfg);
  std::map<std::string, std::size_t> first_row;
  for (std::size_t r = 0; r < s.embeddings.rows(); ++r) {
    const std::string& sense = s.corpus.instances[r].sense_id;
    ASSERT_EQ(s.corpus.instances[r].instance_id, s.embeddings.ids[r]);
    auto [it, inserted] = first_row.emplace(sense, r);
    if (inserted) continue;
    auto a = s.embeddings.row(it->second);
    auto b = s.embeddings.row(r);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
  for (const auto& sc : score_all(s.embeddings, s.corpus, s.inventory).scores) EXPECT_EQ(sc.phi, 1.0);
}

TEST(Synth, PlantedInstancesGetLowestPhi) {
  SynthConfig cfg;
  cfg.n_lemmas = 1;
  cfg.senses_per_lemma = 2;
  cfg.instances_per_sense = 10;
  cfg.hard_fraction = 0.1;
  cfg.noise_sigma = 0.05;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    SynthOutput s = generate(cfg);
    ASSERT_EQ(s.truth.planted_hard_ids.size(), 2u);
    auto brute = oracle::brute_force_scores(s.embeddings, s.corpus, true);
    ASSERT_EQ(brute.size(), 20u);
    std::sort(brute.begin(), brute.end(), [](const auto& a, const auto& b) { return a.phi < b.phi; });
    EXPECT_TRUE(s.truth.planted_hard_ids.contains(brute[0].id));
    EXPECT_TRUE(s.truth.planted_hard_ids.contains(brute[1].id));
    EXPECT_LT(brute[1].phi, brute[2].phi);
  }
}

TEST(Synth, WellSeparatedRegimeScoresHigh) {
  SynthConfig cfg;
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    cfg.seed = seed;
    SynthOutput s = generate(cfg);
    auto scores = score_all(s.embeddings, s.corpus, s.inventory).scores;
    const auto high = std::count_if(scores.begin(), scores.end(), [](const auto& x) { return x.phi >= 0.9; });
    EXPECT_GE(static_cast<double>(high), 0.99 * static_cast<double>(scores.size()));
  }
}

// Every cluster takes in as many relocated instances as it gives away.
TEST(Synth, RelocationsBalancedAcrossSenses) {
  SynthConfig cfg;
  cfg.hard_fraction = 0.2;
  cfg.senses_per_lemma = 4;
  cfg.n_lemmas = 5;
  cfg.noise_sigma = 0.0;
  SynthOutput s = generate(cfg);
  std::map<std::vector<float>, std::string> centroid_owner;
  for (std::size_t r = 0; r < s.embeddings.rows(); ++r) {
    if (s.truth.planted_hard_ids.contains(s.embeddings.ids[r])) continue;
    auto row = s.embeddings.row(r);
    centroid_owner[std::vector<float>(row.begin(), row.end())] = s.corpus.instances[r].sense_id;
  }
  std::map<std::string, int> received, sent;
  for (std::size_t r = 0; r < s.embeddings.rows(); ++r) {
    if (!s.truth.planted_hard_ids.contains(s.embeddings.ids[r])) continue;
    auto row = s.embeddings.row(r);
    auto it = centroid_owner.find(std::vector<float>(row.begin(), row.end()));
    ASSERT_NE(it, centroid_owner.end());
    EXPECT_NE(it->second, s.corpus.instances[r].sense_id);
    EXPECT_EQ(it->second.substr(0, it->second.find('%')), s.corpus.instances[r].lemma);
    ++received[it->second];
    ++sent[s.corpus.instances[r].sense_id];
  }
  EXPECT_EQ(s.truth.planted_hard_ids.size(), 5u * 4u * 4u);
  EXPECT_EQ(received, sent);
  for (const auto& [sense, n] : sent) EXPECT_EQ(n, 4) << sense;
}

TEST(Synth, SameSeedBitwiseIdentical) {
  SynthConfig cfg;
  cfg.hard_fraction = 0.2;
  cfg.mixing = Mixing::kAnisotropic;
  SynthOutput a = generate(cfg);
  SynthOutput b = generate(cfg);
  EXPECT_EQ(a.embeddings, b.embeddings);
  EXPECT_EQ(a.corpus.instances, b.corpus.instances);
  EXPECT_EQ(a.truth.planted_hard_ids, b.truth.planted_hard_ids);
  cfg.seed = 1;
  EXPECT_FALSE(generate(cfg).embeddings == a.embeddings);
}

TEST(Synth, OrthogonalMixingPreservesPhi) {
  SynthConfig cfg;
  cfg.n_lemmas = 4;
  cfg.noise_sigma = 0.3;
  cfg.hard_fraction = 0.1;
  SynthOutput plain = generate(cfg);
  cfg.mixing = Mixing::kOrthogonal;
  SynthOutput rotated = generate(cfg);
  ASSERT_EQ(plain.corpus.instances, rotated.corpus.instances);
  EXPECT_FALSE(plain.embeddings == rotated.embeddings);
  auto a = score_all(plain.embeddings, plain.corpus, plain.inventory).scores;
  auto b = score_all(rotated.embeddings, rotated.corpus, rotated.inventory).scores;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].phi, b[i].phi) << a[i].instance_id;
}

TEST(Synth, AnisotropicMixingLowersPhi) {
  SynthConfig cfg;
  cfg.n_lemmas = 4;
  auto mean_phi = [](const SynthOutput& s) {
    double sum = 0;
    auto scores = score_all(s.embeddings, s.corpus, s.inventory).scores;
    for (const auto& x : scores) sum += x.phi;
    return sum / static_cast<double>(scores.size());
  };
  const double before = mean_phi(generate(cfg));
  cfg.mixing = Mixing::kAnisotropic;
  cfg.mixing_epsilon = 0.02;
  EXPECT_LT(mean_phi(generate(cfg)), before - 0.1);
}

TEST(Synth, ConfigErrors) {
  SynthConfig cfg;
  cfg.instances_per_sense = 3;
  EXPECT_THROW(generate(cfg), ConfigError);
  cfg = {};
  cfg.senses_per_lemma = 1;
  cfg.hard_fraction = 0.1;
  EXPECT_THROW(generate(cfg), ConfigError);
  cfg = {};
  cfg.mixing = Mixing::kAnisotropic;
  cfg.mixing_rank = 40;
  EXPECT_THROW(generate(cfg), ConfigError);
}

TEST(Synth, OvercrowdedSphereReportsConfig) {
  SynthConfig cfg;
  cfg.dim = 2;
  cfg.senses_per_lemma = 20;
  cfg.margin_degrees = 60.0;
  try {
    generate(cfg);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("margin"), std::string::npos);
    EXPECT_NE(what.find(cfg.describe()), std::string::npos);
  }
}

TEST(Synth, SaveAndReload) {
  SynthConfig cfg;
  cfg.n_lemmas = 2;
  cfg.hard_fraction = 0.1;
  SynthOutput s = generate(cfg);
  fixtures::TempDir dir;
  save_synth(dir.path(), s);
  EXPECT_EQ(load_corpus(dir / "corpus.jsonl").instances, s.corpus.instances);
  EXPECT_EQ(load_sense_inventory(dir / "inventory.jsonl").entries(), s.inventory.entries());
  EXPECT_EQ(read_embeddings(dir / "embeddings.sore"), s.embeddings);
  EXPECT_EQ(load_ground_truth(dir / "ground_truth.jsonl").planted_hard_ids, s.truth.planted_hard_ids);
}

TEST(Synth, MixingTokens) {
  EXPECT_EQ(parse_mixing("anisotropic"), Mixing::kAnisotropic);
  EXPECT_EQ(parse_mixing("NONE"), Mixing::kNone);
  EXPECT_FALSE(parse_mixing("shear").has_value());
  EXPECT_EQ(to_string(Mixing::kOrthogonal), "ORTHOGONAL");
}

}  // namespace
