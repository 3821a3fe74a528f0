#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "hardmeta/corpus.hpp"
#include "hardmeta/error.hpp"
#include "hardmeta/rng.hpp"

namespace {

using namespace hardmeta;

const char* kThreeLines =
    R"({"id":"i1","lemma":"run","word":"ran","pos":"VERB","sense":"run%1","tokens":["she","ran","home"],"target":1})"
    "\n"
    R"({"id":"i2","lemma":"run","word":"runs","pos":"VERB","sense":"run%2","tokens":["it","runs"],"target":1})"
    "\n"
    R"({"id":"i0","lemma":"bank","word":"bank","pos":"noun","sense":"bank%1","tokens":["the","bank"],"target":1})"
    "\n";

Corpus parse(const std::string& text, Warnings* warnings = nullptr) {
  std::istringstream in(text);
  return parse_corpus(in, "mem", warnings);
}

SenseInventory parse_inv(const std::string& text) {
  std::istringstream in(text);
  return parse_sense_inventory(in, "inv");
}

TEST(CorpusLoad, KeepsFileOrder) {
  Corpus c = parse(kThreeLines);
  ASSERT_EQ(c.instances.size(), 3u);
  EXPECT_EQ(c.instances[0].instance_id, "i1");
  EXPECT_EQ(c.instances[1].instance_id, "i2");
  EXPECT_EQ(c.instances[2].instance_id, "i0");
  EXPECT_EQ(c.instances[2].pos, Pos::kNoun);
  EXPECT_EQ(c.instances[0].tokens.size(), 3u);
  EXPECT_EQ(c.instances[0].target_index, 1u);
}

TEST(CorpusLoad, EmptyFileGivesEmptyCorpus) {
  EXPECT_TRUE(parse("").instances.empty());
  EXPECT_TRUE(parse("\n\n").instances.empty());
}

TEST(CorpusLoad, TargetOutOfRangeNamesLine) {
  std::string text = std::string(kThreeLines) +
                     R"({"id":"i9","lemma":"x","word":"x","pos":"NOUN","sense":"x%1","tokens":["a","b","c","d","e"],"target":7})"
                     "\n";
  try {
    parse(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("mem:4"), std::string::npos);
  }
}

TEST(CorpusLoad, DuplicateIdIsError) {
  std::string line =
      R"({"id":"a","lemma":"x","word":"x","pos":"NOUN","sense":"x%1","tokens":["a"],"target":0})";
  try {
    parse(line + "\n" + line + "\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(CorpusLoad, MalformedLineReportsLineNumber) {
  try {
    parse(std::string(kThreeLines) + "\n{not json\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
  EXPECT_THROW(parse("[1,2]\n"), ParseError);
  EXPECT_THROW(parse(R"({"id":"a","lemma":"x","word":"x","pos":"NOUN","sense":"x","tokens":["a"]})"), ParseError);
  EXPECT_THROW(parse(R"({"id":"a","lemma":"x","word":"x","pos":"WAT","sense":"x","tokens":["a"],"target":0})"),
               ParseError);
  EXPECT_THROW(parse(R"({"id":"a","lemma":"x","word":"x","pos":"NOUN","sense":"x","tokens":[],"target":0})"),
               ParseError);
  EXPECT_THROW(parse(R"({"id":"a","lemma":"x","word":"x","pos":"NOUN","sense":"x","tokens":["a"],"target":-1})"),
               ParseError);
}

TEST(CorpusLoad, UnknownKeysWarnButLoad) {
  Warnings w;
  Corpus c = parse(
      R"({"id":"a","lemma":"x","word":"x","pos":"NOUN","sense":"x","tokens":["a"],"target":0,"extra":1})", &w);
  EXPECT_EQ(c.instances.size(), 1u);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("extra"), std::string::npos);
}

TEST(CorpusLoad, CanonicalInputRoundTripsByteIdentically) {
  Corpus c = parse(kThreeLines);
  std::ostringstream once;
  write_corpus(once, c);
  // pos was lowercase in the input, so canonicalise first.
  Corpus again = parse(once.str());
  std::ostringstream twice;
  write_corpus(twice, again);
  EXPECT_EQ(once.str(), twice.str());
  EXPECT_EQ(again.instances, c.instances);

  const std::string canonical =
      R"({"id":"i1","lemma":"run","word":"ran","pos":"VERB","sense":"run%1","tokens":["she","ran","home"],"target":1})";
  EXPECT_EQ(format_instance(parse(canonical + "\n").instances[0]), canonical);
}

TEST(CorpusLoad, UnicodeTokensRoundTrip) {
  Corpus c;
  c.instances.push_back(fixtures::instance("ü1", "café", "café%1"));
  c.instances[0].tokens = {"le", "café", "\"quoted\"", "tab\there"};
  std::ostringstream out;
  write_corpus(out, c);
  EXPECT_EQ(parse(out.str()).instances, c.instances);
}

TEST(SenseInventory, CountsMetaphoricalEntries) {
  SenseInventory inv = parse_inv(
      R"({"sense":"a","lemma":"w","gloss":"g","label":"METAPHORICAL"})"
      "\n"
      R"({"sense":"b","lemma":"w","gloss":"g","label":"LITERAL"})"
      "\n"
      R"({"sense":"c","lemma":"w","gloss":"g","label":"metaphorical"})"
      "\n"
      R"({"sense":"d","lemma":"w","gloss":"g","label":"UNKNOWN"})"
      "\n"
      R"({"sense":"e","lemma":"w","gloss":"g","label":"Literal"})"
      "\n");
  EXPECT_EQ(inv.size(), 5u);
  EXPECT_EQ(inv.count(MetaphorLabel::kMetaphorical), 2u);
  EXPECT_EQ(inv.label_of("c"), MetaphorLabel::kMetaphorical);
  EXPECT_EQ(inv.label_of("e"), MetaphorLabel::kLiteral);
  EXPECT_EQ(inv.label_of("nope"), MetaphorLabel::kUnknown);
  EXPECT_EQ(inv.entries()[2].sense_id, "c");
}

TEST(SenseInventory, Errors) {
  EXPECT_THROW(parse_inv(R"({"sense":"a","lemma":"w","gloss":"","label":"LITERAL"})"), ParseError);
  EXPECT_THROW(parse_inv(R"({"sense":"a","lemma":"w","gloss":"g","label":"SORT_OF"})"), ParseError);
  try {
    parse_inv(R"({"sense":"a","lemma":"w","gloss":"g","label":"LITERAL"})"
              "\n"
              R"({"sense":"a","lemma":"w","gloss":"h","label":"LITERAL"})");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  SenseInventory inv;
  EXPECT_THROW(inv.add({"a", "w", "", MetaphorLabel::kLiteral}), DataError);
  inv.add({"a", "w", "g", MetaphorLabel::kLiteral});
  EXPECT_THROW(inv.add({"a", "w", "g", MetaphorLabel::kLiteral}), DataError);
}

TEST(SenseInventory, RoundTrip) {
  SenseInventory inv;
  inv.add(fixtures::sense("s1", "w", MetaphorLabel::kMetaphorical));
  inv.add(fixtures::sense("s2", "w", MetaphorLabel::kUnknown));
  std::ostringstream out;
  write_sense_inventory(out, inv);
  SenseInventory back = parse_inv(out.str());
  EXPECT_EQ(back.entries(), inv.entries());
}

TEST(EnumTokens, CaseInsensitiveAndCanonicalUppercase) {
  EXPECT_EQ(parse_pos("adj"), Pos::kAdj);
  EXPECT_EQ(parse_pos("Verb"), Pos::kVerb);
  EXPECT_FALSE(parse_pos("adjective").has_value());
  EXPECT_EQ(to_string(Pos::kAdp), "ADP");
  EXPECT_EQ(parse_metaphor_label("unknown"), MetaphorLabel::kUnknown);
  EXPECT_EQ(to_string(MetaphorLabel::kLiteral), "LITERAL");
}

// Corpus: w%1 x3 (below 4), w%2 x4, z%9 unresolved x2.
struct SupportFixture {
  Corpus corpus;
  SenseInventory inv;
  SupportFixture() {
    inv.add(fixtures::sense("w%1", "w", MetaphorLabel::kLiteral));
    inv.add(fixtures::sense("w%2", "w", MetaphorLabel::kLiteral));
    int n = 0;
    auto add = [&](const std::string& s, int times) {
      for (int i = 0; i < times; ++i) corpus.instances.push_back(fixtures::instance("i" + std::to_string(n++), "w", s));
    };
    add("w%2", 2);
    add("w%1", 3);
    add("z%9", 2);
    add("w%2", 2);
  }
};

TEST(Validate, ReportsSensesBelowMinimum) {
  SupportFixture f;
  ValidationReport r = validate(f.corpus, f.inv, 4);
  ASSERT_EQ(r.senses_below_min.size(), 1u);
  EXPECT_EQ(r.senses_below_min[0], (std::pair<std::string, std::size_t>{"w%1", 3}));
  EXPECT_EQ(r.unresolved_sense_ids, std::vector<std::string>{"z%9"});
  EXPECT_EQ(r.n_instances, 9u);
  EXPECT_EQ(r.n_words, 1u);
  EXPECT_EQ(r.n_senses, 3u);
  EXPECT_FALSE(r.ok());
}

TEST(Validate, CleanCorpusHasNoProblems) {
  SupportFixture f;
  Corpus clean = filter_senses(f.corpus, f.inv, 4);
  ValidationReport r = validate(clean, f.inv, 4);
  EXPECT_TRUE(r.unresolved_sense_ids.empty());
  EXPECT_TRUE(r.senses_below_min.empty());
  EXPECT_TRUE(r.ok());
}

TEST(FilterSenses, BoundaryIsInclusive) {
  SupportFixture f;
  Corpus kept = filter_senses(f.corpus, f.inv, 4);
  ASSERT_EQ(kept.instances.size(), 4u);
  for (const auto& inst : kept.instances) EXPECT_EQ(inst.sense_id, "w%2");
  EXPECT_EQ(kept.instances[0].instance_id, "i0");
  EXPECT_EQ(kept.instances[3].instance_id, "i8");
}

TEST(FilterSenses, MinZeroDropsOnlyUnresolved) {
  SupportFixture f;
  Corpus kept = filter_senses(f.corpus, f.inv, 0);
  EXPECT_EQ(kept.instances.size(), 7u);
  for (const auto& inst : kept.instances) EXPECT_NE(inst.sense_id, "z%9");
}

TEST(FilterSenses, PropertyMinimumHoldsAndIdempotent) {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    SenseInventory inv;
    const std::size_t n_senses = 1 + rng.below(6);
    for (std::size_t s = 0; s < n_senses; ++s) {
      inv.add(fixtures::sense("s" + std::to_string(s), "w", MetaphorLabel::kLiteral));
    }
    Corpus c;
    const std::size_t n = rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      // one extra sense id that never resolves
      c.instances.push_back(
          fixtures::instance("i" + std::to_string(i), "w", "s" + std::to_string(rng.below(n_senses + 1))));
    }
    const std::size_t m = rng.below(8);
    Corpus once = filter_senses(c, inv, m);
    auto counts = sense_counts(c);
    for (const auto& inst : once.instances) {
      EXPECT_TRUE(inv.contains(inst.sense_id));
      EXPECT_GE(counts[inst.sense_id], m);
    }
    Corpus twice = filter_senses(once, inv, m);
    EXPECT_EQ(twice.instances, once.instances);
  }
}

}  // namespace
