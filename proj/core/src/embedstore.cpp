#include "hardmeta/embedstore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "hardmeta/error.hpp"

namespace hardmeta {

namespace {

std::string describe_ids(const std::vector<std::string>& ids) {
  std::string s;
  const std::size_t shown = std::min<std::size_t>(ids.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) s += ", ";
    s += ids[i];
  }
  if (ids.size() > shown) s += ", ... (" + std::to_string(ids.size()) + " total)";
  return s;
}

template <typename T>
void put_le(std::string& buf, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

// Reads exactly n bytes or reports how far it got.
bool read_exact(std::istream& in, unsigned char* dst, std::size_t n) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount()) == n;
}

}  // namespace

AlignmentError::AlignmentError(Kind kind, std::vector<std::string> ids)
    : DataError(std::string(kind == Kind::kMissingEmbedding
                                ? "MissingEmbedding: corpus ids without embeddings: "
                                : "OrphanEmbedding: embedding ids not in corpus: ") +
                describe_ids(ids)),
      kind_(kind),
      ids_(std::move(ids)) {}

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> row_ids, std::size_t dimension,
                                 std::vector<float> row_major)
    : ids(std::move(row_ids)), dim(dimension), values(std::move(row_major)) {}

void EmbeddingMatrix::validate() const {
  if (dim == 0) throw DataError("embedding dim must be positive");
  if (values.size() != ids.size() * dim) {
    throw DataError("embedding matrix has " + std::to_string(values.size()) + " values for " +
                    std::to_string(ids.size()) + " rows of dim " + std::to_string(dim));
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].size() > UINT16_MAX) {
      throw DataError("embedding id at record " + std::to_string(i) + " exceeds 65535 bytes");
    }
    if (!seen.insert(ids[i]).second) throw DataError("duplicate embedding id '" + ids[i] + "'");
    for (float v : row(i)) {
      if (!std::isfinite(v)) {
        throw DataError("non-finite value at record " + std::to_string(i) + " (id '" + ids[i] + "')");
      }
    }
  }
}

void write_embeddings(std::ostream& out, const EmbeddingMatrix& m) {
  m.validate();
  std::string buf;
  buf.append(kSoreMagic, 4);
  put_le<std::uint32_t>(buf, kSoreVersion);
  put_le<std::uint64_t>(buf, m.rows());
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(m.dim));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    buf.clear();
    put_le<std::uint16_t>(buf, static_cast<std::uint16_t>(m.ids[i].size()));
    buf += m.ids[i];
    for (float v : m.row(i)) put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(v));
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw DataError("write failure while writing embeddings");
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  m.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_embeddings(out, m);
  out.flush();
  if (!out) throw DataError("write failure on " + path.string());
}

EmbeddingMatrix read_embeddings(std::istream& in, const std::string& source) {
  unsigned char header[20];
  if (!read_exact(in, header, 4)) throw DataError(source + ": truncated header");
  if (std::memcmp(header, kSoreMagic, 4) != 0) throw DataError(source + ": bad magic");
  if (!read_exact(in, header + 4, 16)) throw DataError(source + ": truncated header");
  const auto version = get_le<std::uint32_t>(header + 4);
  if (version != kSoreVersion) {
    throw DataError(source + ": unsupported version " + std::to_string(version));
  }
  const auto count = get_le<std::uint64_t>(header + 8);
  const auto dim = get_le<std::uint32_t>(header + 16);
  if (dim == 0) throw DataError(source + ": dim must be positive");

  EmbeddingMatrix m;
  m.dim = dim;
  std::vector<unsigned char> payload(static_cast<std::size_t>(dim) * 4);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string where = source + ": truncated at record " + std::to_string(i);
    unsigned char len_bytes[2];
    if (!read_exact(in, len_bytes, 2)) throw DataError(where);
    const auto len = get_le<std::uint16_t>(len_bytes);
    std::string id(len, '\0');
    if (len && !read_exact(in, reinterpret_cast<unsigned char*>(id.data()), len)) {
      throw DataError(where);
    }
    if (!read_exact(in, payload.data(), payload.size())) throw DataError(where);
    for (std::size_t d = 0; d < dim; ++d) {
      const float v = std::bit_cast<float>(get_le<std::uint32_t>(payload.data() + 4 * d));
      if (!std::isfinite(v)) {
        throw DataError(source + ": non-finite value at record " + std::to_string(i));
      }
      m.values.push_back(v);
    }
    m.ids.push_back(std::move(id));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(source + ": trailing bytes after " + std::to_string(count) + " records");
  }
  m.validate();
  return m;
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string() + " for reading");
  return read_embeddings(in, path.string());
}

AlignedDataset align(Corpus corpus, EmbeddingMatrix matrix) {
  AlignedDataset ds;
  ds.index.reserve(matrix.rows());
  for (std::size_t i = 0; i < matrix.rows(); ++i) ds.index.emplace(matrix.ids[i], i);

  std::vector<std::string> missing;
  std::unordered_set<std::string_view> corpus_ids;
  corpus_ids.reserve(corpus.instances.size());
  for (const auto& inst : corpus.instances) {
    corpus_ids.insert(inst.instance_id);
    if (!ds.index.contains(inst.instance_id)) missing.push_back(inst.instance_id);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    throw AlignmentError(AlignmentError::Kind::kMissingEmbedding, std::move(missing));
  }
  std::vector<std::string> orphans;
  for (const auto& id : matrix.ids) {
    if (!corpus_ids.contains(id)) orphans.push_back(id);
  }
  if (!orphans.empty()) {
    std::sort(orphans.begin(), orphans.end());
    throw AlignmentError(AlignmentError::Kind::kOrphanEmbedding, std::move(orphans));
  }
  ds.corpus = std::move(corpus);
  ds.matrix = std::move(matrix);
  return ds;
}

}  // namespace hardmeta
