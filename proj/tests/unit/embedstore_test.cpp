#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "hardmeta/embedstore.hpp"
#include "hardmeta/error.hpp"
#include "hardmeta/rng.hpp"

namespace {

using namespace hardmeta;

std::string to_bytes(const EmbeddingMatrix& m) {
  std::ostringstream out(std::ios::binary);
  write_embeddings(out, m);
  return out.str();
}

EmbeddingMatrix from_bytes(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_embeddings(in, "mem");
}

EmbeddingMatrix random_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingMatrix m;
  m.dim = dim;
  for (std::size_t r = 0; r < rows; ++r) {
    m.ids.push_back("row" + std::to_string(r));
    for (std::size_t d = 0; d < dim; ++d) m.values.push_back(static_cast<float>(rng.normal()));
  }
  return m;
}

std::uint64_t le(const std::string& b, std::size_t at, std::size_t width) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v |= std::uint64_t(static_cast<unsigned char>(b[at + i])) << (8 * i);
  return v;
}

TEST(Sore, TwoVectorsLayout) {
  EmbeddingMatrix m = fixtures::matrix({{"a", {1.0f, 2.0f, 3.0f}}, {"bb", {-1.0f, 0.5f, 0.0f}}});
  std::string b = to_bytes(m);
  ASSERT_EQ(b.size(), 20u + (2 + 1 + 12) + (2 + 2 + 12));
  EXPECT_EQ(b.substr(0, 4), "SORE");
  EXPECT_EQ(le(b, 4, 4), 1u);
  EXPECT_EQ(le(b, 8, 8), 2u);
  EXPECT_EQ(le(b, 16, 4), 3u);
  EXPECT_EQ(le(b, 20, 2), 1u);
  EXPECT_EQ(b[22], 'a');
  // 1.0f = 0x3F800000, little-endian
  EXPECT_EQ(le(b, 23, 4), 0x3F800000u);
  EXPECT_EQ(le(b, 35, 2), 2u);
  EXPECT_EQ(from_bytes(b), m);
}

TEST(Sore, RandomRoundTripIsBitwise) {
  EmbeddingMatrix m = random_matrix(5, 8, 4);
  m.values[3] = -0.0f;
  m.values[7] = std::numeric_limits<float>::denorm_min();
  EmbeddingMatrix back = from_bytes(to_bytes(m));
  ASSERT_EQ(back.ids, m.ids);
  ASSERT_EQ(back.values.size(), m.values.size());
  EXPECT_EQ(std::memcmp(back.values.data(), m.values.data(), m.values.size() * sizeof(float)), 0);
  EXPECT_EQ(to_bytes(back), to_bytes(m));
}

TEST(Sore, EmptyMatrixIsValid) {
  EmbeddingMatrix m;
  m.dim = 4;
  std::string b = to_bytes(m);
  EXPECT_EQ(b.size(), 20u);
  EXPECT_EQ(le(b, 8, 8), 0u);
  EmbeddingMatrix back = from_bytes(b);
  EXPECT_EQ(back.rows(), 0u);
  EXPECT_EQ(back.dim, 4u);
}

TEST(Sore, NanRejectedBeforeAnyBytes) {
  EmbeddingMatrix m = random_matrix(3, 2, 1);
  m.values[4] = std::numeric_limits<float>::quiet_NaN();
  std::ostringstream out;
  try {
    write_embeddings(out, m);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("record 2"), std::string::npos);
  }
  EXPECT_TRUE(out.str().empty());
}

TEST(Sore, InvalidMatricesRejected) {
  EmbeddingMatrix dup = fixtures::matrix({{"a", {1.0f}}, {"a", {2.0f}}});
  EXPECT_THROW(dup.validate(), DataError);
  EmbeddingMatrix short_values = fixtures::matrix({{"a", {1.0f, 2.0f}}});
  short_values.values.pop_back();
  EXPECT_THROW(short_values.validate(), DataError);
  EmbeddingMatrix zero_dim;
  EXPECT_THROW(zero_dim.validate(), DataError);
  EmbeddingMatrix long_id = fixtures::matrix({{std::string(70000, 'x'), {1.0f}}});
  EXPECT_THROW(to_bytes(long_id), DataError);
}

TEST(Sore, BadMagic) {
  std::string b = to_bytes(random_matrix(1, 2, 0));
  b[0] = 'X';
  try {
    from_bytes(b);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
  }
}

TEST(Sore, UnsupportedVersion) {
  std::string b = to_bytes(random_matrix(1, 2, 0));
  b[4] = 2;
  try {
    from_bytes(b);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported version"), std::string::npos);
  }
}

TEST(Sore, TruncatedMidRecordNamesRecord) {
  std::string b = to_bytes(random_matrix(3, 4, 2));
  // record size = 2 + 4 ("rowN") + 16
  const std::size_t cut = 20 + 22 + 22 + 10;
  try {
    from_bytes(b.substr(0, cut));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("truncated at record 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(from_bytes(b.substr(0, 10)), DataError);
}

TEST(Sore, TrailingBytesAndNonFiniteOnRead) {
  std::string b = to_bytes(random_matrix(2, 2, 3));
  EXPECT_THROW(from_bytes(b + "z"), DataError);
  // overwrite the last float of record 1 with +inf
  const std::uint32_t inf = 0x7F800000u;
  for (int i = 0; i < 4; ++i) b[b.size() - 4 + i] = static_cast<char>((inf >> (8 * i)) & 0xFF);
  try {
    from_bytes(b);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite value at record 1"), std::string::npos);
  }
}

TEST(Sore, FileRoundTrip) {
  fixtures::TempDir dir;
  EmbeddingMatrix m = random_matrix(4, 3, 9);
  write_embeddings(dir / "m.sore", m);
  EXPECT_EQ(read_embeddings(dir / "m.sore"), m);
  EXPECT_THROW(read_embeddings(dir / "missing.sore"), DataError);
}

Corpus corpus_of(std::initializer_list<const char*> ids) {
  Corpus c;
  for (const char* id : ids) c.instances.push_back(fixtures::instance(id, "w", "w%1"));
  return c;
}

TEST(Align, ExactIdSetsAlign) {
  AlignedDataset d = align(corpus_of({"a", "b", "c"}),
                           fixtures::matrix({{"c", {3.0f}}, {"a", {1.0f}}, {"b", {2.0f}}}));
  EXPECT_EQ(d.vector_of("a")[0], 1.0f);
  EXPECT_EQ(d.vector_of("c")[0], 3.0f);
  EXPECT_EQ(d.row_of("b"), 2u);
}

TEST(Align, MissingEmbedding) {
  try {
    align(corpus_of({"a", "b"}), fixtures::matrix({{"a", {1.0f}}}));
    FAIL();
  } catch (const AlignmentError& e) {
    EXPECT_EQ(e.alignment_kind(), AlignmentError::Kind::kMissingEmbedding);
    EXPECT_EQ(e.ids(), std::vector<std::string>{"b"});
  }
}

TEST(Align, OrphanEmbedding) {
  try {
    align(corpus_of({"a"}), fixtures::matrix({{"a", {1.0f}}, {"x", {2.0f}}}));
    FAIL();
  } catch (const AlignmentError& e) {
    EXPECT_EQ(e.alignment_kind(), AlignmentError::Kind::kOrphanEmbedding);
    EXPECT_EQ(e.ids(), std::vector<std::string>{"x"});
  }
}

TEST(Align, RowPermutationGivesSameVectors) {
  EmbeddingMatrix m = random_matrix(12, 5, 7);
  Corpus c;
  for (const auto& id : m.ids) c.instances.push_back(fixtures::instance(id, "w", "w%1"));
  AlignedDataset base = align(c, m);
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    EmbeddingMatrix p;
    p.dim = m.dim;
    std::vector<std::size_t> order(m.rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t r : order) {
      p.ids.push_back(m.ids[r]);
      auto row = m.row(r);
      p.values.insert(p.values.end(), row.begin(), row.end());
    }
    AlignedDataset d = align(c, p);
    for (const auto& id : m.ids) {
      auto a = base.vector_of(id);
      auto b = d.vector_of(id);
      EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    }
  }
}

}  // namespace
