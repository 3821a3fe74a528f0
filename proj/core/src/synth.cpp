#include "hardmeta/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "hardmeta/error.hpp"
#include "hardmeta/rng.hpp"
#include "jsonl.hpp"

namespace hardmeta {

namespace {

constexpr std::size_t kMaxCentroidAttempts = 10000;

std::string padded(std::size_t value, std::size_t count) {
  std::size_t width = 1;
  for (std::size_t c = count > 0 ? count - 1 : 0; c >= 10; c /= 10) ++width;
  std::string s = std::to_string(value);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

std::vector<double> random_unit(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      sq += x * x;
    }
  } while (sq == 0.0);
  const double norm = std::sqrt(sq);
  for (auto& x : v) x /= norm;
  return v;
}

Eigen::MatrixXd random_orthogonal(std::size_t dim, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) g(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Sign fix makes the draw Haar-distributed.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < d; ++c) {
    if (r(c, c) < 0) q.col(c) *= -1.0;
  }
  return q;
}

}  // namespace

std::optional<Mixing> parse_mixing(std::string_view token) {
  std::string upper(token);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "NONE") return Mixing::kNone;
  if (upper == "ORTHOGONAL") return Mixing::kOrthogonal;
  if (upper == "ANISOTROPIC") return Mixing::kAnisotropic;
  return std::nullopt;
}

std::string_view to_string(Mixing mixing) {
  switch (mixing) {
    case Mixing::kNone:
      return "NONE";
    case Mixing::kOrthogonal:
      return "ORTHOGONAL";
    case Mixing::kAnisotropic:
      return "ANISOTROPIC";
  }
  return "NONE";
}

void SynthConfig::validate() const {
  if (n_lemmas == 0 || senses_per_lemma == 0) throw ConfigError("synth: need at least one lemma and sense");
  if (instances_per_sense < 4) throw ConfigError("synth: instances_per_sense must be >= 4");
  if (dim < 2) throw ConfigError("synth: dim must be >= 2");
  if (!(noise_sigma >= 0.0)) throw ConfigError("synth: noise_sigma must be >= 0");
  if (!(hard_fraction >= 0.0 && hard_fraction <= 1.0)) throw ConfigError("synth: hard_fraction must lie in [0, 1]");
  if (!(metaphor_fraction >= 0.0 && metaphor_fraction <= 1.0)) {
    throw ConfigError("synth: metaphor_fraction must lie in [0, 1]");
  }
  if (hard_fraction > 0.0 && senses_per_lemma < 2) {
    throw ConfigError("synth: hard examples need at least two senses per lemma");
  }
  if (!(margin_degrees >= 0.0 && margin_degrees < 180.0)) throw ConfigError("synth: margin must lie in [0, 180)");
  if (mixing == Mixing::kAnisotropic) {
    if (mixing_rank == 0 || mixing_rank > dim) throw ConfigError("synth: mixing_rank must lie in [1, dim]");
    if (!(mixing_epsilon > 0.0)) throw ConfigError("synth: mixing_epsilon must be positive");
  }
}

std::string SynthConfig::describe() const {
  std::ostringstream os;
  os << "n_lemmas=" << n_lemmas << " senses_per_lemma=" << senses_per_lemma
     << " instances_per_sense=" << instances_per_sense << " dim=" << dim
     << " noise_sigma=" << noise_sigma << " hard_fraction=" << hard_fraction
     << " metaphor_fraction=" << metaphor_fraction << " margin_degrees=" << margin_degrees
     << " mixing=" << to_string(mixing) << " mixing_rank=" << mixing_rank
     << " mixing_epsilon=" << mixing_epsilon << " seed=" << seed;
  return os.str();
}

SynthOutput generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  SynthOutput out;
  out.corpus.source_name = "synth";
  out.embeddings.dim = cfg.dim;

  const double max_cos = std::cos(cfg.margin_degrees * std::numbers::pi / 180.0);
  const auto n_metaphorical = static_cast<std::size_t>(
      std::ceil(cfg.metaphor_fraction * static_cast<double>(cfg.senses_per_lemma) - 1e-12));
  const std::size_t n_hard = static_cast<std::size_t>(
      std::llround(cfg.hard_fraction * static_cast<double>(cfg.instances_per_sense)));
  std::size_t serial = 0;

  for (std::size_t l = 0; l < cfg.n_lemmas; ++l) {
    const std::string lemma = "w" + padded(l, cfg.n_lemmas);

    std::vector<std::vector<double>> centroids;
    for (std::size_t s = 0; s < cfg.senses_per_lemma; ++s) {
      std::size_t attempts = 0;
      for (;;) {
        if (++attempts > kMaxCentroidAttempts) {
          throw ConfigError("synth: centroid margin rejection exhausted for lemma " + lemma +
                            " (" + cfg.describe() + ")");
        }
        auto c = random_unit(cfg.dim, rng);
        bool ok = true;
        for (const auto& other : centroids) {
          double dot = 0.0;
          for (std::size_t d = 0; d < cfg.dim; ++d) dot += c[d] * other[d];
          if (dot > max_cos) {
            ok = false;
            break;
          }
        }
        if (ok) {
          centroids.push_back(std::move(c));
          break;
        }
      }
    }

    for (std::size_t s = 0; s < cfg.senses_per_lemma; ++s) {
      const std::string sense_id = lemma + "%" + padded(s, cfg.senses_per_lemma);
      out.inventory.add({sense_id, lemma, "synthetic sense " + std::to_string(s) + " of " + lemma,
                         s < n_metaphorical ? MetaphorLabel::kMetaphorical : MetaphorLabel::kLiteral});

      // Which instances of this sense are relocated, and where to. Hosts are
      // assigned cyclically so each cluster receives as many intruders as it
      // loses; random hosts can pile several into one cluster and drag its
      // regular members below the flag threshold.
      std::vector<std::size_t> order(cfg.instances_per_sense);
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::vector<std::size_t> host(cfg.instances_per_sense, s);
      for (std::size_t h = 0; h < n_hard; ++h) {
        const std::size_t pick = h + rng.below(order.size() - h);
        std::swap(order[h], order[pick]);
        host[order[h]] = (s + 1 + h % (cfg.senses_per_lemma - 1)) % cfg.senses_per_lemma;
      }

      for (std::size_t i = 0; i < cfg.instances_per_sense; ++i) {
        Instance inst;
        inst.instance_id = sense_id + "#" + padded(i, cfg.instances_per_sense);
        inst.lemma = lemma;
        inst.word_form = lemma;
        inst.pos = Pos::kNoun;
        inst.sense_id = sense_id;
        inst.tokens = {"synthetic", "passage", std::to_string(serial++), lemma};
        inst.target_index = 3;

        const auto& center = centroids[host[i]];
        std::vector<double> v(cfg.dim);
        double sq = 0.0;
        for (std::size_t d = 0; d < cfg.dim; ++d) {
          v[d] = center[d] + cfg.noise_sigma * rng.normal();
          sq += v[d] * v[d];
        }
        const double norm = std::sqrt(sq);
        for (std::size_t d = 0; d < cfg.dim; ++d) {
          out.embeddings.values.push_back(static_cast<float>(v[d] / norm));
        }
        if (host[i] != s) out.truth.planted_hard_ids.insert(inst.instance_id);
        out.embeddings.ids.push_back(inst.instance_id);
        out.corpus.instances.push_back(std::move(inst));
      }
    }
  }

  if (cfg.mixing != Mixing::kNone) {
    Eigen::MatrixXd map = random_orthogonal(cfg.dim, rng);
    if (cfg.mixing == Mixing::kAnisotropic) {
      Eigen::VectorXd scale = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(cfg.dim), cfg.mixing_epsilon);
      scale.head(static_cast<Eigen::Index>(cfg.mixing_rank)).setOnes();
      map = map * scale.asDiagonal() * random_orthogonal(cfg.dim, rng);
    }
    Eigen::VectorXd x(static_cast<Eigen::Index>(cfg.dim));
    for (std::size_t r = 0; r < out.embeddings.rows(); ++r) {
      auto row = out.embeddings.row(r);
      for (std::size_t d = 0; d < cfg.dim; ++d) x(static_cast<Eigen::Index>(d)) = row[d];
      const Eigen::VectorXd y = map * x;
      for (std::size_t d = 0; d < cfg.dim; ++d) row[d] = static_cast<float>(y(static_cast<Eigen::Index>(d)));
    }
  }
  out.embeddings.validate();
  return out;
}

void save_synth(const std::filesystem::path& dir, const SynthOutput& out) {
  std::filesystem::create_directories(dir);
  save_corpus(dir / "corpus.jsonl", out.corpus);
  save_sense_inventory(dir / "inventory.jsonl", out.inventory);
  write_embeddings(dir / "embeddings.sore", out.embeddings);
  auto truth = detail::open_output(dir / "ground_truth.jsonl");
  for (const auto& id : out.truth.planted_hard_ids) {
    detail::ordered_json r;
    r["id"] = id;
    detail::write_line(truth, r);
  }
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  GroundTruth truth;
  auto in = detail::open_input(path);
  detail::for_each_record(in, path.string(), [&](const detail::json& r, std::size_t line) {
    truth.planted_hard_ids.insert(detail::get_string(r, "id", path.string(), line));
  });
  return truth;
}

}  // namespace hardmeta
