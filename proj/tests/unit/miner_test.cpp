#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "hardmeta/error.hpp"
#include "hardmeta/miner.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace {

using namespace hardmeta;

OverlapScore score(const std::string& id, std::size_t s, std::size_t k) {
  OverlapScore o;
  o.instance_id = id;
  o.sense_id = "x";
  o.k = k;
  o.s = s;
  o.phi = static_cast<double>(s) / static_cast<double>(k);
  return o;
}

ScoreTable table_with_phi(std::initializer_list<std::pair<const char*, double>> values) {
  ScoreTable t;
  for (const auto& [id, phi] : values) {
    OverlapScore o;
    o.instance_id = id;
    o.phi = phi;
    t.scores.push_back(o);
  }
  return t;
}

TEST(FlagHard, StrictThreshold) {
  ScoreTable t = table_with_phi({{"flow", 0.42}, {"edge", 0.8}, {"one", 1.0}});
  EXPECT_EQ(flag_hard(t, 0.8), std::set<std::string>{"flow"});
  EXPECT_TRUE(flag_hard(t, 0.3).empty());
  EXPECT_EQ(flag_hard(t, 1.0), (std::set<std::string>{"edge", "flow"}));
  // 4/5 computed as s/k sits exactly on the boundary
  ScoreTable exact;
  exact.scores.push_back(score("e", 4, 5));
  EXPECT_TRUE(flag_hard(exact, 0.8).empty());
}

TEST(FlagHard, ThresholdRange) {
  ScoreTable t;
  EXPECT_THROW(flag_hard(t, 0.0), ConfigError);
  EXPECT_THROW(flag_hard(t, 1.5), ConfigError);
  EXPECT_NO_THROW(flag_hard(t, 1.0));
}

struct Labeled {
  Corpus corpus;
  SenseInventory inv;
  Labeled() {
    inv.add(fixtures::sense("sit%m", "sit", MetaphorLabel::kMetaphorical));
    inv.add(fixtures::sense("sit%l", "sit", MetaphorLabel::kLiteral));
    inv.add(fixtures::sense("sit%u", "sit", MetaphorLabel::kUnknown));
    corpus.instances = {fixtures::instance("m2", "sit", "sit%m"), fixtures::instance("l1", "sit", "sit%l"),
                        fixtures::instance("u1", "sit", "sit%u"), fixtures::instance("m1", "sit", "sit%m")};
  }
};

TEST(SelectHardMetaphors, LabelFilter) {
  Labeled f;
  EXPECT_EQ(select_hard_metaphors({"m1", "l1", "u1"}, f.corpus, f.inv), std::vector<std::string>{"m1"});
  EXPECT_TRUE(select_hard_metaphors({}, f.corpus, f.inv).empty());
}

TEST(SelectHardMetaphors, SameSenseDifferentPhiBothKept) {
  Labeled f;
  ScoreTable t = table_with_phi({{"m1", 0.0}, {"m2", 0.6}});
  auto hard = select_hard_metaphors(flag_hard(t, 0.8), f.corpus, f.inv);
  EXPECT_EQ(hard, (std::vector<std::string>{"m1", "m2"}));
}

// One lemma in 2-D: metaphors and literals placed at given angles.
struct Geometry {
  Corpus corpus;
  SenseInventory inv;
  EmbeddingMatrix sor;
  ScoreTable scores;
  Geometry() {
    inv.add(fixtures::sense("w%m", "w", MetaphorLabel::kMetaphorical));
    inv.add(fixtures::sense("w%l", "w", MetaphorLabel::kLiteral));
    inv.add(fixtures::sense("w%u", "w", MetaphorLabel::kUnknown));
    sor.dim = 2;
  }
  void add(const std::string& id, const std::string& sense, double degrees, double phi = 0.0) {
    corpus.instances.push_back(fixtures::instance(id, "w", sense));
    sor.ids.push_back(id);
    auto v = fixtures::at_angle(degrees);
    sor.values.insert(sor.values.end(), v.begin(), v.end());
    OverlapScore o;
    o.instance_id = id;
    o.sense_id = sense;
    o.phi = phi;
    scores.scores.push_back(o);
  }
};

double degrees_for_distance(double d) { return std::acos(1.0 - d) * 180.0 / std::numbers::pi; }

TEST(PairLiterals, NearestOfThree) {
  Geometry g;
  g.add("m", "w%m", 0.0, 0.25);
  g.add("l_a", "w%l", degrees_for_distance(0.4));
  g.add("l_b", "w%l", -degrees_for_distance(0.9));
  g.add("l_c", "w%l", degrees_for_distance(0.1));
  g.add("u", "w%u", 0.5);  // closest of all, but UNKNOWN
  // brute-force: the 0.1 literal is nearest among the LITERAL instances
  std::map<double, std::string> by_distance;
  for (const char* id : {"l_a", "l_b", "l_c"}) {
    std::size_t r = 0;
    while (g.sor.ids[r] != id) ++r;
    by_distance[static_cast<double>(oracle::cosine_distance(&g.sor.values[0], &g.sor.values[r * 2], 2))] = id;
  }
  ASSERT_EQ(by_distance.begin()->second, "l_c");
  EXPECT_NEAR(by_distance.begin()->first, 0.1, 1e-6);

  PairingResult r = pair_literals({"m"}, g.scores, g.sor, g.corpus, g.inv, MineConfig{});
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.pairs[0].literal_instance_id, "l_c");
  EXPECT_NEAR(r.pairs[0].pair_distance, 0.1, 1e-6);
  EXPECT_EQ(r.pairs[0].phi, 0.25);
  EXPECT_EQ(r.pairs[0].literal_sense_id, "w%l");
  EXPECT_TRUE(r.unpairable.empty());
}

TEST(PairLiterals, GreedyByIdWithoutReplacement) {
  Geometry g;
  g.add("m_b", "w%m", 1.0);
  g.add("m_a", "w%m", 14.0);
  g.add("lit_near", "w%l", 5.0);
  g.add("lit_next", "w%l", 30.0);
  g.add("lit_far", "w%l", 120.0);
  // m_b is closer to lit_near, but m_a comes first by id.
  PairingResult r = pair_literals({"m_b", "m_a"}, g.scores, g.sor, g.corpus, g.inv, MineConfig{});
  ASSERT_EQ(r.pairs.size(), 2u);
  EXPECT_EQ(r.pairs[0].metaphor_instance_id, "m_a");
  EXPECT_EQ(r.pairs[0].literal_instance_id, "lit_near");
  EXPECT_EQ(r.pairs[1].metaphor_instance_id, "m_b");
  EXPECT_EQ(r.pairs[1].literal_instance_id, "lit_next");

  MineConfig with;
  with.pairing = Pairing::kWithReplacement;
  PairingResult rr = pair_literals({"m_b", "m_a"}, g.scores, g.sor, g.corpus, g.inv, with);
  ASSERT_EQ(rr.pairs.size(), 2u);
  EXPECT_EQ(rr.pairs[0].literal_instance_id, "lit_near");
  EXPECT_EQ(rr.pairs[1].literal_instance_id, "lit_near");
}

TEST(PairLiterals, EquidistantLiteralsTieById) {
  Geometry g;
  g.add("m", "w%m", 0.0);
  g.add("lit_z", "w%l", 40.0);
  g.add("lit_y", "w%l", -40.0);
  PairingResult r = pair_literals({"m"}, g.scores, g.sor, g.corpus, g.inv, MineConfig{});
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.pairs[0].literal_instance_id, "lit_y");
}

TEST(PairLiterals, UnpairableReasons) {
  Geometry g;
  g.add("m1", "w%m", 0.0);
  g.add("m2", "w%m", 3.0);
  g.add("lit", "w%l", 10.0);
  g.add("l2", "w%l", 50.0);
  g.scores.scores.erase(g.scores.scores.begin() + 3);  // l2 unscored: still a candidate
  g.corpus.instances.push_back(fixtures::instance("other", "v", "v%m"));
  g.inv.add(fixtures::sense("v%m", "v", MetaphorLabel::kMetaphorical));
  g.sor.ids.push_back("other");
  g.sor.values.insert(g.sor.values.end(), {1.0f, 0.0f});
  OverlapScore o;
  o.instance_id = "other";
  g.scores.scores.push_back(o);

  PairingResult r = pair_literals({"m1", "m2", "lit", "other", "ghost"}, g.scores, g.sor, g.corpus, g.inv,
                                  MineConfig{});
  ASSERT_EQ(r.pairs.size(), 2u);
  EXPECT_EQ(r.pairs[1].literal_instance_id, "l2");
  ASSERT_EQ(r.unpairable.size(), 3u);
  EXPECT_EQ(r.unpairable[0].instance_id, "ghost");
  EXPECT_EQ(r.unpairable[1].instance_id, "lit");
  EXPECT_EQ(r.unpairable[2].instance_id, "other");
  EXPECT_NE(r.unpairable[2].reason.find("no literal"), std::string::npos);

  // a third metaphor exhausts the two literals
  g.add("m3", "w%m", 7.0);
  PairingResult x = pair_literals({"m1", "m2", "m3"}, g.scores, g.sor, g.corpus, g.inv, MineConfig{});
  EXPECT_EQ(x.pairs.size(), 2u);
  ASSERT_EQ(x.unpairable.size(), 1u);
  EXPECT_NE(x.unpairable[0].reason.find("exhausted"), std::string::npos);
}

std::vector<nlohmann::json> lines_of(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
  return out;
}

TEST(EmitDataset, AlternatingRecordsOneToOne) {
  Geometry g;
  g.add("m1", "w%m", 0.0);
  g.add("m2", "w%m", 10.0);
  g.add("m3", "w%m", 20.0);
  g.add("l1", "w%l", 2.0);
  g.add("l2", "w%l", 12.0);
  g.add("l3", "w%l", 22.0);
  g.scores.scores[0].phi = 0.0;
  g.scores.scores[1].phi = 0.5;
  g.scores.scores[2].phi = 0.75;
  PairingResult r = pair_literals({"m1", "m2", "m3"}, g.scores, g.sor, g.corpus, g.inv, MineConfig{});
  std::ostringstream out;
  emit_dataset(out, r.pairs, g.corpus, g.inv);
  auto recs = lines_of(out.str());
  ASSERT_EQ(recs.size(), 7u);
  EXPECT_EQ(recs[0]["format"], "HMD");
  EXPECT_EQ(recs[0]["pairs"], 3);
  std::size_t meta = 0, literal = 0;
  for (std::size_t i = 1; i < recs.size(); ++i) {
    const bool is_meta = (i % 2 == 1);
    EXPECT_EQ(recs[i]["side"], is_meta ? "meta" : "literal");
    EXPECT_EQ(recs[i]["pair"], (i - 1) / 2);
    (is_meta ? meta : literal)++;
    EXPECT_EQ(recs[i].contains("phi"), is_meta);
    EXPECT_EQ(recs[i]["gloss"], "gloss of " + recs[i]["sense"].get<std::string>());
  }
  EXPECT_EQ(meta, 3u);
  EXPECT_EQ(literal, 3u);
  EXPECT_EQ(recs[1]["phi"].dump(), "0.0");
  EXPECT_EQ(recs[1]["phi"].get<double>(), 0.0);
  EXPECT_EQ(recs[3]["phi"].get<double>(), 0.5);
}

TEST(EmitDataset, EmptyListWritesHeaderOnly) {
  Geometry g;
  std::ostringstream out;
  emit_dataset(out, {}, g.corpus, g.inv);
  EXPECT_EQ(out.str(), "{\"format\":\"HMD\",\"version\":1,\"pairs\":0}\n");
}

TEST(EmitDataset, UnknownIdIsDataError) {
  Geometry g;
  HardPair p;
  p.metaphor_instance_id = "nope";
  p.literal_instance_id = "nope";
  std::ostringstream out;
  EXPECT_THROW(emit_dataset(out, {p}, g.corpus, g.inv), DataError);
}

}  // namespace
