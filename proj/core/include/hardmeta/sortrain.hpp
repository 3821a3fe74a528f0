#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hardmeta/corpus.hpp"
#include "hardmeta/embedstore.hpp"
#include "hardmeta/rng.hpp"

namespace hardmeta {

enum class AnchorMode { kAllAnchors, kSingleAnchor };
enum class NegativeSampling { kUniformOtherSense, kSameLemmaBiased };

std::optional<AnchorMode> parse_anchor_mode(std::string_view token);
std::optional<NegativeSampling> parse_negative_sampling(std::string_view token);
std::string_view to_string(AnchorMode mode);
std::string_view to_string(NegativeSampling mode);

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t steps = 900;
  double temperature = 0.05;
  std::size_t output_dim = 256;
  std::size_t hidden_layers = 0;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  AnchorMode anchor_mode = AnchorMode::kAllAnchors;
  NegativeSampling negative_sampling = NegativeSampling::kUniformOtherSense;

  /// Throws ConfigError. Batch size must be even and at least 4.
  void validate() const;
};

/// N members laid out as N/2 consecutive positive pairs: positions 2p and
/// 2p+1 share a sense, and the N/2 senses are pairwise distinct.
struct Batch {
  std::vector<std::size_t> member_rows;  // rows of the embedding matrix
  std::vector<std::size_t> pair_of;      // position of each member's partner
  std::vector<std::string> sense_of;

  std::size_t size() const { return member_rows.size(); }

  bool operator==(const Batch&) const = default;
};

/// Standard pairing: member 2p is partnered with 2p+1.
Batch make_paired_batch(std::vector<std::size_t> member_rows,
                        std::vector<std::string> pair_senses);

/// Senses eligible for training (not METAPHORICAL, at least two instances),
/// keyed by (lemma, sense) and listed in first-appearance corpus order.
struct SensePool {
  struct Group {
    std::string lemma;
    std::string sense_id;
    std::vector<std::size_t> rows;
  };
  std::vector<Group> groups;
  // Groups sharing each group's lemma (excluding itself).
  std::vector<std::vector<std::size_t>> same_lemma;
};

SensePool build_sense_pool(const AlignedDataset& data, const SenseInventory& inventory);

/// Throws InsufficientSenses when fewer than N/2 groups are eligible.
Batch sample_batch(const SensePool& pool, const TrainConfig& cfg, Rng& rng);
Batch sample_batch(const AlignedDataset& data, const SenseInventory& inventory,
                   const TrainConfig& cfg, Rng& rng);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out

  bool operator==(const DenseLayer& o) const {
    return weight.rows() == o.weight.rows() && weight.cols() == o.weight.cols() &&
           bias.size() == o.bias.size() && weight == o.weight && bias == o.bias;
  }
};

/// Trainable map from frozen input embeddings to the sense-only space:
/// affine layers with tanh between them (none after the last).
struct ProjectionHead {
  std::vector<DenseLayer> layers;

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero bias. A hidden
  /// layer, when requested, has output_dim units.
  static ProjectionHead initialize(std::size_t input_dim, const TrainConfig& cfg, Rng& rng);
  static ProjectionHead identity(std::size_t dim);

  std::size_t input_dim() const;
  std::size_t output_dim() const;

  /// Rows of `inputs` are samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;

  /// Throws NumericalError on non-finite parameters, ConfigError on shape mismatch.
  void validate() const;

  bool operator==(const ProjectionHead&) const = default;
};

double cosine_sim(std::span<const double> u, std::span<const double> v);
double cosine_sim(std::span<const float> u, std::span<const float> v);

/// Mean over anchors (ALL_ANCHORS) or the first member only (SINGLE_ANCHOR)
/// of -log softmax of the positive among the N-1 candidates, using cosine
/// similarity divided by tau. Rows of `projected` align with batch members.
double contrastive_loss(const Eigen::MatrixXd& projected, const Batch& batch, double tau,
                        AnchorMode mode);

struct LossWithGradient {
  double loss = 0.0;
  Eigen::MatrixXd d_projected;  // dL/d(projected), same shape
};

LossWithGradient contrastive_loss_with_gradient(const Eigen::MatrixXd& projected,
                                                const Batch& batch, double tau,
                                                AnchorMode mode);

struct HeadGradient {
  double loss = 0.0;
  std::vector<DenseLayer> layers;  // same shapes as the head
};

/// Exact gradient of contrastive_loss(head(inputs)) w.r.t. every head parameter.
HeadGradient loss_gradient(const Eigen::MatrixXd& inputs, const ProjectionHead& head,
                           const Batch& batch, double tau, AnchorMode mode);

/// Batch member vectors as rows, in double precision.
Eigen::MatrixXd gather_inputs(const EmbeddingMatrix& matrix, const Batch& batch);

struct TrainingLog {
  TrainConfig config;
  std::vector<double> losses;        // one per completed step
  std::vector<double> step_seconds;  // wall clock; not part of determinism
};

struct TrainResult {
  ProjectionHead head;
  TrainingLog log;
};

using BatchObserver = std::function<void(std::size_t step, const Batch&)>;

/// Runs cfg.steps Adam updates. Single-threaded; identical (data, cfg)
/// gives bitwise-identical heads and losses.
TrainResult train(const AlignedDataset& data, const SenseInventory& inventory,
                  const TrainConfig& cfg, const BatchObserver& observer = {});

/// Applies the head to every row. Ids and order are preserved. Rows are
/// independent, so `threads` does not change the output.
EmbeddingMatrix project(const ProjectionHead& head, const EmbeddingMatrix& matrix,
                        std::size_t threads = 1);

void write_head(std::ostream& out, const ProjectionHead& head);
ProjectionHead read_head(std::istream& in, const std::string& source = "<stream>");
void save_head(const std::filesystem::path& path, const ProjectionHead& head);
ProjectionHead load_head(const std::filesystem::path& path);

}  // namespace hardmeta
