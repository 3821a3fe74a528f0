#include "hardmeta/sortrain.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "hardmeta/error.hpp"

namespace hardmeta {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) ==
                  std::toupper(static_cast<unsigned char>(y));
         });
}

void check_batch_shape(const Eigen::MatrixXd& projected, const Batch& batch) {
  const auto n = batch.size();
  if (n < 4 || n % 2 != 0) {
    throw ConfigError("batch size must be even and >= 4, got " + std::to_string(n));
  }
  if (static_cast<std::size_t>(projected.rows()) != n) {
    throw ConfigError("dimension mismatch: " + std::to_string(projected.rows()) +
                      " projected rows for a batch of " + std::to_string(n));
  }
  if (batch.pair_of.size() != n || batch.sense_of.size() != n) {
    throw ConfigError("malformed batch");
  }
  if (!projected.allFinite()) throw NumericalError("non-finite projected vector");
}

}  // namespace

std::optional<AnchorMode> parse_anchor_mode(std::string_view token) {
  if (iequals(token, "ALL_ANCHORS")) return AnchorMode::kAllAnchors;
  if (iequals(token, "SINGLE_ANCHOR")) return AnchorMode::kSingleAnchor;
  return std::nullopt;
}

std::optional<NegativeSampling> parse_negative_sampling(std::string_view token) {
  if (iequals(token, "UNIFORM_OTHER_SENSE")) return NegativeSampling::kUniformOtherSense;
  if (iequals(token, "SAME_LEMMA_BIASED")) return NegativeSampling::kSameLemmaBiased;
  return std::nullopt;
}

std::string_view to_string(AnchorMode mode) {
  return mode == AnchorMode::kAllAnchors ? "ALL_ANCHORS" : "SINGLE_ANCHOR";
}

std::string_view to_string(NegativeSampling mode) {
  return mode == NegativeSampling::kUniformOtherSense ? "UNIFORM_OTHER_SENSE"
                                                      : "SAME_LEMMA_BIASED";
}

void TrainConfig::validate() const {
  if (batch_size < 4 || batch_size % 2 != 0) {
    throw ConfigError("batch_size must be even and >= 4, got " + std::to_string(batch_size));
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be positive");
  }
  if (output_dim == 0) throw ConfigError("output_dim must be positive");
  if (hidden_layers > 1) throw ConfigError("hidden_layers must be 0 or 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
}

Batch make_paired_batch(std::vector<std::size_t> member_rows,
                        std::vector<std::string> pair_senses) {
  Batch b;
  const std::size_t n = member_rows.size();
  if (n % 2 != 0 || pair_senses.size() * 2 != n) {
    throw ConfigError("make_paired_batch: need one sense per pair of members");
  }
  b.member_rows = std::move(member_rows);
  b.pair_of.resize(n);
  b.sense_of.resize(n);
  for (std::size_t p = 0; p < n / 2; ++p) {
    b.pair_of[2 * p] = 2 * p + 1;
    b.pair_of[2 * p + 1] = 2 * p;
    b.sense_of[2 * p] = pair_senses[p];
    b.sense_of[2 * p + 1] = pair_senses[p];
  }
  return b;
}

SensePool build_sense_pool(const AlignedDataset& data, const SenseInventory& inventory) {
  SensePool pool;
  std::map<std::pair<std::string, std::string>, std::size_t> group_of;
  for (const auto& inst : data.corpus.instances) {
    if (inventory.label_of(inst.sense_id) == MetaphorLabel::kMetaphorical) continue;
    auto key = std::make_pair(inst.lemma, inst.sense_id);
    auto [it, inserted] = group_of.emplace(key, pool.groups.size());
    if (inserted) pool.groups.push_back({inst.lemma, inst.sense_id, {}});
    pool.groups[it->second].rows.push_back(data.row_of(inst.instance_id));
  }
  std::erase_if(pool.groups, [](const SensePool::Group& g) { return g.rows.size() < 2; });

  std::map<std::string, std::vector<std::size_t>> by_lemma;
  for (std::size_t g = 0; g < pool.groups.size(); ++g) by_lemma[pool.groups[g].lemma].push_back(g);
  pool.same_lemma.resize(pool.groups.size());
  for (std::size_t g = 0; g < pool.groups.size(); ++g) {
    for (std::size_t other : by_lemma[pool.groups[g].lemma]) {
      if (other != g) pool.same_lemma[g].push_back(other);
    }
  }
  return pool;
}

Batch sample_batch(const SensePool& pool, const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t n_pairs = cfg.batch_size / 2;
  const std::size_t n_groups = pool.groups.size();
  if (n_groups < n_pairs) throw InsufficientSenses(n_groups, n_pairs);

  // Unused groups, with O(1) removal by swapping with the back.
  std::vector<std::size_t> unused(n_groups);
  std::vector<std::size_t> slot(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) unused[g] = slot[g] = g;
  auto take = [&](std::size_t g) {
    const std::size_t s = slot[g];
    const std::size_t last = unused.back();
    unused[s] = last;
    slot[last] = s;
    unused.pop_back();
    slot[g] = n_groups;
  };
  auto is_unused = [&](std::size_t g) { return slot[g] < n_groups; };

  std::vector<std::size_t> chosen;
  chosen.reserve(n_pairs);
  std::vector<std::size_t> frontier;  // same-lemma candidates, may hold stale entries
  std::vector<char> in_frontier(n_groups, 0);

  while (chosen.size() < n_pairs) {
    std::size_t g = n_groups;
    if (cfg.negative_sampling == NegativeSampling::kSameLemmaBiased) {
      std::erase_if(frontier, [&](std::size_t f) { return !is_unused(f); });
      if (!frontier.empty()) g = frontier[rng.below(frontier.size())];
    }
    if (g == n_groups) g = unused[rng.below(unused.size())];
    take(g);
    chosen.push_back(g);
    if (cfg.negative_sampling == NegativeSampling::kSameLemmaBiased) {
      for (std::size_t other : pool.same_lemma[g]) {
        if (is_unused(other) && !in_frontier[other]) {
          in_frontier[other] = 1;
          frontier.push_back(other);
        }
      }
    }
  }

  std::vector<std::size_t> rows;
  std::vector<std::string> senses;
  rows.reserve(cfg.batch_size);
  for (std::size_t g : chosen) {
    const auto& group = pool.groups[g];
    const std::size_t count = group.rows.size();
    const std::size_t i = rng.below(count);
    std::size_t j = rng.below(count - 1);
    if (j >= i) ++j;
    rows.push_back(group.rows[i]);
    rows.push_back(group.rows[j]);
    senses.push_back(group.sense_id);
  }
  return make_paired_batch(std::move(rows), std::move(senses));
}

Batch sample_batch(const AlignedDataset& data, const SenseInventory& inventory,
                   const TrainConfig& cfg, Rng& rng) {
  return sample_batch(build_sense_pool(data, inventory), cfg, rng);
}

ProjectionHead ProjectionHead::initialize(std::size_t input_dim, const TrainConfig& cfg, Rng& rng) {
  if (input_dim == 0) throw ConfigError("input dim must be positive");
  ProjectionHead head;
  std::vector<std::pair<std::size_t, std::size_t>> shapes;  // (out, in)
  if (cfg.hidden_layers == 1) {
    shapes.emplace_back(cfg.output_dim, input_dim);
    shapes.emplace_back(cfg.output_dim, cfg.output_dim);
  } else {
    shapes.emplace_back(cfg.output_dim, input_dim);
  }
  for (auto [out, in] : shapes) {
    DenseLayer layer;
    layer.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out));
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = rng.uniform(-bound, bound);
      }
    }
    head.layers.push_back(std::move(layer));
  }
  return head;
}

ProjectionHead ProjectionHead::identity(std::size_t dim) {
  ProjectionHead head;
  const auto d = static_cast<Eigen::Index>(dim);
  head.layers.push_back({Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d)});
  return head;
}

std::size_t ProjectionHead::input_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.cols());
}

std::size_t ProjectionHead::output_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weight.rows());
}

Eigen::MatrixXd ProjectionHead::forward(const Eigen::MatrixXd& inputs) const {
  if (static_cast<std::size_t>(inputs.cols()) != input_dim()) {
    throw ConfigError("dimension mismatch: head expects " + std::to_string(input_dim()) +
                      ", got " + std::to_string(inputs.cols()));
  }
  Eigen::MatrixXd x = inputs;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = x * layers[l].weight.transpose();
    z.rowwise() += layers[l].bias.transpose();
    x = l + 1 < layers.size() ? Eigen::MatrixXd(z.array().tanh()) : z;
  }
  return x;
}

void ProjectionHead::validate() const {
  if (layers.empty()) throw ConfigError("projection head has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.weight.rows() != layer.bias.size()) {
      throw ConfigError("layer " + std::to_string(l) + ": bias size does not match weight rows");
    }
    if (l > 0 && layer.weight.cols() != layers[l - 1].weight.rows()) {
      throw ConfigError("layer " + std::to_string(l) + ": shapes do not compose");
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
      throw NumericalError("layer " + std::to_string(l) + " has non-finite parameters");
    }
  }
}

double cosine_sim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ConfigError("cosine_sim: dimension mismatch");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw NumericalError("cosine_sim: zero-norm vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double cosine_sim(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw ConfigError("cosine_sim: dimension mismatch");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i], b = v[i];
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (uu == 0.0 || vv == 0.0) throw NumericalError("cosine_sim: zero-norm vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

LossWithGradient contrastive_loss_with_gradient(const Eigen::MatrixXd& projected,
                                                const Batch& batch, double tau,
                                                AnchorMode mode) {
  check_batch_shape(projected, batch);
  if (!(tau > 0.0)) throw ConfigError("temperature must be positive");
  const auto n = static_cast<Eigen::Index>(batch.size());

  Eigen::VectorXd norms = projected.rowwise().norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (norms(i) == 0.0) throw NumericalError("zero-norm projected vector at batch position " + std::to_string(i));
  }
  Eigen::MatrixXd unit = projected.array().colwise() / norms.array();
  // Unclamped cosines; clamping would zero the gradient at |cos| = 1.
  Eigen::MatrixXd sims = unit * unit.transpose();

  // dL/dS, accumulated over anchors.
  Eigen::MatrixXd d_sims = Eigen::MatrixXd::Zero(n, n);
  const Eigen::Index n_anchors = mode == AnchorMode::kAllAnchors ? n : 1;
  const double weight = 1.0 / static_cast<double>(n_anchors);
  double loss = 0.0;
  std::vector<Eigen::Index> candidates;
  std::vector<double> logits;
  for (Eigen::Index a = 0; a < n_anchors; ++a) {
    const auto positive = static_cast<Eigen::Index>(batch.pair_of[static_cast<std::size_t>(a)]);
    candidates.clear();
    candidates.push_back(positive);
    for (Eigen::Index c = 0; c < n; ++c) {
      if (c == a || c == positive) continue;
      if (batch.sense_of[static_cast<std::size_t>(c)] == batch.sense_of[static_cast<std::size_t>(a)]) continue;
      candidates.push_back(c);
    }
    logits.resize(candidates.size());
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      logits[i] = sims(a, candidates[i]) / tau;
      max_logit = std::max(max_logit, logits[i]);
    }
    double denom = 0.0;
    for (double l : logits) denom += std::exp(l - max_logit);
    const double log_denom = max_logit + std::log(denom);
    loss += weight * (log_denom - logits[0]);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double p = std::exp(logits[i] - log_denom);
      d_sims(a, candidates[i]) += weight * (p - (i == 0 ? 1.0 : 0.0)) / tau;
    }
  }
  if (!std::isfinite(loss)) throw NumericalError("non-finite contrastive loss");

  // S = U U^T with U = rows normalized; dL/dU = (G + G^T) U, then through
  // the normalization: dz = (du - u (u . du)) / |z|.
  Eigen::MatrixXd d_unit = (d_sims + d_sims.transpose()) * unit;
  LossWithGradient out;
  out.loss = loss;
  out.d_projected.resize(n, projected.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double radial = unit.row(i).dot(d_unit.row(i));
    out.d_projected.row(i) = (d_unit.row(i) - radial * unit.row(i)) / norms(i);
  }
  return out;
}

double contrastive_loss(const Eigen::MatrixXd& projected, const Batch& batch, double tau,
                        AnchorMode mode) {
  return contrastive_loss_with_gradient(projected, batch, tau, mode).loss;
}

HeadGradient loss_gradient(const Eigen::MatrixXd& inputs, const ProjectionHead& head,
                           const Batch& batch, double tau, AnchorMode mode) {
  head.validate();
  if (static_cast<std::size_t>(inputs.cols()) != head.input_dim()) {
    throw ConfigError("dimension mismatch: head expects " + std::to_string(head.input_dim()) +
                      ", got " + std::to_string(inputs.cols()));
  }
  const std::size_t n_layers = head.layers.size();
  // Forward pass keeping every layer's input.
  std::vector<Eigen::MatrixXd> layer_inputs;
  layer_inputs.reserve(n_layers);
  Eigen::MatrixXd x = inputs;
  for (std::size_t l = 0; l < n_layers; ++l) {
    layer_inputs.push_back(x);
    Eigen::MatrixXd z = x * head.layers[l].weight.transpose();
    z.rowwise() += head.layers[l].bias.transpose();
    x = l + 1 < n_layers ? Eigen::MatrixXd(z.array().tanh()) : z;
  }

  LossWithGradient top = contrastive_loss_with_gradient(x, batch, tau, mode);
  HeadGradient grad;
  grad.loss = top.loss;
  grad.layers.resize(n_layers);

  Eigen::MatrixXd upstream = std::move(top.d_projected);  // dL/d(pre-activation of layer l)
  for (std::size_t l = n_layers; l-- > 0;) {
    grad.layers[l].weight = upstream.transpose() * layer_inputs[l];
    grad.layers[l].bias = upstream.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd d_act = upstream * head.layers[l].weight;
    const Eigen::MatrixXd& act = layer_inputs[l];  // tanh output of layer l-1
    upstream = d_act.array() * (1.0 - act.array().square());
  }
  return grad;
}

Eigen::MatrixXd gather_inputs(const EmbeddingMatrix& matrix, const Batch& batch) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(matrix.dim));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto row = matrix.row(batch.member_rows[i]);
    for (std::size_t d = 0; d < matrix.dim; ++d) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = row[d];
    }
  }
  return x;
}

namespace {

struct AdamState {
  std::vector<DenseLayer> m;
  std::vector<DenseLayer> v;
};

void adam_step(ProjectionHead& head, const HeadGradient& grad, AdamState& state,
               const TrainConfig& cfg, std::size_t t) {
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    for (Eigen::Index i = 0; i < param.size(); ++i) {
      const double gi = g.data()[i];
      double& mi = m.data()[i];
      double& vi = v.data()[i];
      mi = b1 * mi + (1.0 - b1) * gi;
      vi = b2 * vi + (1.0 - b2) * gi * gi;
      const double m_hat = mi / c1;
      const double v_hat = vi / c2;
      param.data()[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
    }
  };
  for (std::size_t l = 0; l < head.layers.size(); ++l) {
    update(head.layers[l].weight, grad.layers[l].weight, state.m[l].weight, state.v[l].weight);
    update(head.layers[l].bias, grad.layers[l].bias, state.m[l].bias, state.v[l].bias);
  }
}

}  // namespace

TrainResult train(const AlignedDataset& data, const SenseInventory& inventory,
                  const TrainConfig& cfg, const BatchObserver& observer) {
  cfg.validate();
  if (data.matrix.dim == 0) throw DataError("embedding matrix has no dimension");
  const SensePool pool = build_sense_pool(data, inventory);
  if (pool.groups.size() < cfg.batch_size / 2) {
    throw InsufficientSenses(pool.groups.size(), cfg.batch_size / 2);
  }

  Rng rng(cfg.seed);
  TrainResult result;
  result.head = ProjectionHead::initialize(data.matrix.dim, cfg, rng);
  result.log.config = cfg;

  AdamState state;
  for (const auto& layer : result.head.layers) {
    DenseLayer zero{Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
                    Eigen::VectorXd::Zero(layer.bias.size())};
    state.m.push_back(zero);
    state.v.push_back(zero);
  }

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const auto started = std::chrono::steady_clock::now();
    Batch batch = sample_batch(pool, cfg, rng);
    if (observer) observer(step, batch);
    const Eigen::MatrixXd inputs = gather_inputs(data.matrix, batch);
    HeadGradient grad;
    try {
      grad = loss_gradient(inputs, result.head, batch, cfg.temperature, cfg.anchor_mode);
    } catch (const NumericalError&) {
      throw NonFiniteLoss(step);
    }
    if (!std::isfinite(grad.loss)) throw NonFiniteLoss(step);
    adam_step(result.head, grad, state, cfg, step + 1);
    result.log.losses.push_back(grad.loss);
    result.log.step_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  }
  return result;
}

EmbeddingMatrix project(const ProjectionHead& head, const EmbeddingMatrix& matrix,
                        std::size_t threads) {
  head.validate();
  if (matrix.dim != head.input_dim()) {
    throw ConfigError("dimension mismatch: head expects " + std::to_string(head.input_dim()) +
                      ", embeddings have " + std::to_string(matrix.dim));
  }
  EmbeddingMatrix out;
  out.ids = matrix.ids;
  out.dim = head.output_dim();
  out.values.resize(matrix.rows() * out.dim);

  auto project_rows = [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(matrix.dim));
    for (std::size_t r = begin; r < end; ++r) {
      auto in = matrix.row(r);
      for (std::size_t d = 0; d < matrix.dim; ++d) x(static_cast<Eigen::Index>(d)) = in[d];
      Eigen::VectorXd h = x;
      for (std::size_t l = 0; l < head.layers.size(); ++l) {
        Eigen::VectorXd z = head.layers[l].weight * h + head.layers[l].bias;
        h = l + 1 < head.layers.size() ? Eigen::VectorXd(z.array().tanh()) : z;
      }
      auto dst = out.row(r);
      for (std::size_t d = 0; d < out.dim; ++d) dst[d] = static_cast<float>(h(static_cast<Eigen::Index>(d)));
    }
  };

  threads = std::max<std::size_t>(1, std::min(threads, matrix.rows()));
  if (threads == 1) {
    project_rows(0, matrix.rows());
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (matrix.rows() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(matrix.rows(), begin + chunk);
      if (begin < end) workers.emplace_back(project_rows, begin, end);
    }
    for (auto& w : workers) w.join();
  }
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (float v : out.row(r)) {
      if (!std::isfinite(v)) throw NumericalError("non-finite projected value for id '" + out.ids[r] + "'");
    }
  }
  return out;
}

// Head sidecar format:
//   hardmeta-head v1
//   layers <L>
//   layer <out> <in>      (once per layer, then)
//   w <in values>         (out lines, row-major)
//   b <out values>
// Values use shortest round-trip decimal formatting.
namespace {

void append_double(std::string& s, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  s.append(buf, ptr);
}

std::vector<double> parse_doubles(const std::string& line, std::size_t skip,
                                  const std::string& source, std::size_t line_no) {
  std::vector<double> values;
  const char* p = line.data() + skip;
  const char* end = line.data() + line.size();
  while (p < end) {
    while (p < end && *p == ' ') ++p;
    if (p == end) break;
    double v;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) throw ParseError(source, line_no, "bad number in head file");
    values.push_back(v);
    p = next;
  }
  return values;
}

}  // namespace

void write_head(std::ostream& out, const ProjectionHead& head) {
  head.validate();
  std::string s = "hardmeta-head v1\nlayers " + std::to_string(head.layers.size()) + "\n";
  for (const auto& layer : head.layers) {
    s += "layer " + std::to_string(layer.weight.rows()) + " " + std::to_string(layer.weight.cols()) + "\n";
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      s += "w";
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        s += ' ';
        append_double(s, layer.weight(r, c));
      }
      s += '\n';
    }
    s += "b";
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      s += ' ';
      append_double(s, layer.bias(r));
    }
    s += '\n';
  }
  out << s;
  if (!out) throw DataError("write failure while writing head");
}

ProjectionHead read_head(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError(source, line_no + 1, "unexpected end of head file");
    ++line_no;
    return line;
  };
  if (next() != "hardmeta-head v1") throw ParseError(source, line_no, "bad head header");
  std::size_t n_layers = 0;
  if (std::sscanf(next().c_str(), "layers %zu", &n_layers) != 1 || n_layers == 0) {
    throw ParseError(source, line_no, "expected 'layers <count>'");
  }
  ProjectionHead head;
  for (std::size_t l = 0; l < n_layers; ++l) {
    std::size_t rows = 0, cols = 0;
    if (std::sscanf(next().c_str(), "layer %zu %zu", &rows, &cols) != 2 || rows == 0 || cols == 0) {
      throw ParseError(source, line_no, "expected 'layer <out> <in>'");
    }
    DenseLayer layer;
    layer.weight.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      if (next().rfind("w", 0) != 0) throw ParseError(source, line_no, "expected weight row");
      auto values = parse_doubles(line, 1, source, line_no);
      if (values.size() != cols) throw ParseError(source, line_no, "weight row has wrong length");
      for (std::size_t c = 0; c < cols; ++c) {
        layer.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[c];
      }
    }
    if (next().rfind("b", 0) != 0) throw ParseError(source, line_no, "expected bias row");
    auto values = parse_doubles(line, 1, source, line_no);
    if (values.size() != rows) throw ParseError(source, line_no, "bias row has wrong length");
    layer.bias = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(rows));
    head.layers.push_back(std::move(layer));
  }
  head.validate();
  return head;
}

void save_head(const std::filesystem::path& path, const ProjectionHead& head) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_head(out, head);
}

ProjectionHead load_head(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string() + " for reading");
  return read_head(in, path.string());
}

}  // namespace hardmeta
