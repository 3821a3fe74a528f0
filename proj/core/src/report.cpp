#include "hardmeta/report.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include <Eigen/Dense>

#include "hardmeta/error.hpp"
#include "jsonl.hpp"

namespace hardmeta {

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::string csv_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view token) {
  std::string lower(token);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "jsonl" || lower == "json") return ReportFormat::kJsonl;
  if (lower == "csv") return ReportFormat::kCsv;
  return std::nullopt;
}

StatsSummary corpus_stats(const Corpus& corpus, const SenseInventory& inventory) {
  StatsSummary st;
  std::set<std::string> lemmas, senses;
  for (const auto& inst : corpus.instances) {
    lemmas.insert(inst.lemma);
    senses.insert(inst.sense_id);
    st.n_tokens += inst.tokens.size();
  }
  st.n_words = lemmas.size();
  st.n_senses = senses.size();
  st.n_examples = corpus.instances.size();
  for (const auto& s : senses) {
    if (inventory.label_of(s) == MetaphorLabel::kMetaphorical) ++st.n_metaphorical_senses;
  }
  if (st.n_words > 0) {
    st.senses_per_word = static_cast<double>(st.n_senses) / static_cast<double>(st.n_words);
    st.examples_per_word = static_cast<double>(st.n_examples) / static_cast<double>(st.n_words);
  }
  if (st.n_examples > 0) {
    st.tokens_per_example = static_cast<double>(st.n_tokens) / static_cast<double>(st.n_examples);
  }
  return st;
}

std::size_t bin_of(double value, std::span<const double> edges) {
  if (edges.size() < 2) throw ConfigError("need at least two bin edges");
  const std::size_t n_bins = edges.size() - 1;
  if (value < edges.front() || value > edges.back()) {
    throw DataError("value " + std::to_string(value) + " outside bin range");
  }
  // Last edge not above value, capped so the top edge lands in the last bin.
  auto it = std::upper_bound(edges.begin(), edges.end(), value);
  const auto idx = static_cast<std::size_t>(it - edges.begin()) - 1;
  return std::min(idx, n_bins - 1);
}

std::vector<double> uniform_edges(std::size_t n_bins) {
  if (n_bins == 0) throw ConfigError("n_bins must be >= 1");
  std::vector<double> edges(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i) {
    edges[i] = static_cast<double>(i) / static_cast<double>(n_bins);
  }
  return edges;
}

std::vector<std::size_t> phi_histogram(const ScoreTable& scores, std::size_t n_bins) {
  const auto edges = uniform_edges(n_bins);
  std::vector<std::size_t> counts(n_bins, 0);
  for (const auto& s : scores.scores) ++counts[bin_of(s.phi, edges)];
  return counts;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("spearman: length mismatch");
  if (x.size() < 2) return 0.0;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

BinReport bin_recall(const ScoreTable& scores, const LabelMap& predictions, const LabelMap& gold,
                     const std::vector<double>& bin_edges) {
  if (bin_edges.size() < 2) throw ConfigError("bin_recall: need at least two bin edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) throw ConfigError("bin_recall: bin edges must be ascending");
  }
  if (bin_edges.front() != 0.0 || bin_edges.back() != 1.0) {
    throw ConfigError("bin_recall: bin edges must span [0, 1]");
  }
  BinReport report;
  report.bin_edges = bin_edges;
  const std::size_t n_bins = bin_edges.size() - 1;
  report.counts.assign(n_bins, 0);
  report.hits.assign(n_bins, 0);

  std::vector<double> phis, correct;
  for (const auto& s : scores.scores) {
    auto g = gold.find(s.instance_id);
    if (g == gold.end()) throw DataError("bin_recall: no gold label for '" + s.instance_id + "'");
    if (!g->second) continue;
    auto p = predictions.find(s.instance_id);
    const bool hit = p != predictions.end() && p->second;
    const std::size_t b = bin_of(s.phi, bin_edges);
    ++report.counts[b];
    if (hit) ++report.hits[b];
    phis.push_back(s.phi);
    correct.push_back(hit ? 1.0 : 0.0);
  }
  std::vector<double> populated_index, populated_recall;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (report.counts[b] == 0) {
      report.recall.emplace_back(std::nullopt);
      continue;
    }
    const double r = static_cast<double>(report.hits[b]) / static_cast<double>(report.counts[b]);
    report.recall.emplace_back(r);
    populated_index.push_back(static_cast<double>(b));
    populated_recall.push_back(r);
  }
  report.rank_correlation = spearman(phis, correct);
  report.bin_trend = spearman(populated_index, populated_recall);
  return report;
}

LabelMap load_predictions(const std::filesystem::path& path) {
  LabelMap labels;
  const std::string source = path.string();
  auto in = detail::open_input(path);
  detail::for_each_record(in, source, [&](const detail::json& r, std::size_t line) {
    const std::string id = detail::get_string(r, "id", source, line);
    auto pred = r.find("pred");
    if (pred == r.end()) throw ParseError(source, line, "missing key 'pred'");
    bool positive = false;
    if (pred->is_boolean()) {
      positive = pred->get<bool>();
    } else if (pred->is_number_integer() && (pred->get<long long>() == 0 || pred->get<long long>() == 1)) {
      positive = pred->get<long long>() == 1;
    } else if (pred->is_string()) {
      std::string v = pred->get<std::string>();
      for (char& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (v == "positive") {
        positive = true;
      } else if (v != "negative") {
        throw ParseError(source, line, "pred must be positive or negative");
      }
    } else {
      throw ParseError(source, line, "pred must be positive/negative, a boolean or 0/1");
    }
    if (!labels.emplace(id, positive).second) throw ParseError(source, line, "duplicate id '" + id + "'");
  });
  return labels;
}

std::vector<PcaPoint> pca_scatter(const EmbeddingMatrix& sor, const std::vector<std::string>& ids,
                                  const std::unordered_map<std::string, std::string>& sense_of) {
  if (ids.size() < 2) throw ConfigError("pca_scatter: need at least two instances");
  if (sor.dim < 2) throw ConfigError("pca_scatter: need dim >= 2");
  std::unordered_map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < sor.rows(); ++i) row.emplace(sor.ids[i], i);

  const auto n = static_cast<Eigen::Index>(ids.size());
  const auto d = static_cast<Eigen::Index>(sor.dim);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto it = row.find(ids[static_cast<std::size_t>(i)]);
    if (it == row.end()) throw DataError("pca_scatter: no embedding for '" + ids[static_cast<std::size_t>(i)] + "'");
    auto v = sor.row(it->second);
    for (Eigen::Index c = 0; c < d; ++c) x(i, c) = v[static_cast<std::size_t>(c)];
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  if (cov.cwiseAbs().maxCoeff() == 0.0) throw NumericalError("pca_scatter: degenerate covariance (all points identical)");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericalError("pca_scatter: eigendecomposition failed");
  Eigen::MatrixXd components(d, 2);
  components.col(0) = solver.eigenvectors().col(d - 1);
  components.col(1) = solver.eigenvectors().col(d - 2);
  for (Eigen::Index c = 0; c < 2; ++c) {
    Eigen::Index arg = 0;
    for (Eigen::Index r = 1; r < d; ++r) {
      if (std::abs(components(r, c)) > std::abs(components(arg, c))) arg = r;
    }
    if (components(arg, c) < 0) components.col(c) *= -1.0;
  }
  const Eigen::MatrixXd coords = x * components;

  std::vector<PcaPoint> points;
  points.reserve(ids.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& id = ids[static_cast<std::size_t>(i)];
    auto s = sense_of.find(id);
    points.push_back({id, s == sense_of.end() ? std::string() : s->second, coords(i, 0), coords(i, 1)});
  }
  return points;
}

void write_stats(std::ostream& out, const StatsSummary& st) {
  detail::ordered_json r;
  r["n_words"] = st.n_words;
  r["n_senses"] = st.n_senses;
  r["n_examples"] = st.n_examples;
  r["n_tokens"] = st.n_tokens;
  auto opt = [](const std::optional<double>& v) { return v ? detail::ordered_json(*v) : detail::ordered_json(nullptr); };
  r["senses_per_word"] = opt(st.senses_per_word);
  r["examples_per_word"] = opt(st.examples_per_word);
  r["tokens_per_example"] = opt(st.tokens_per_example);
  r["n_metaphorical_senses"] = st.n_metaphorical_senses;
  detail::write_line(out, r);
}

void write_histogram(std::ostream& out, const std::vector<std::size_t>& counts, ReportFormat format) {
  const auto edges = uniform_edges(counts.size());
  if (format == ReportFormat::kCsv) out << "bin,lo,hi,count\n";
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (format == ReportFormat::kCsv) {
      out << b << ',' << csv_number(edges[b]) << ',' << csv_number(edges[b + 1]) << ',' << counts[b] << '\n';
    } else {
      detail::ordered_json r;
      r["bin"] = b;
      r["lo"] = edges[b];
      r["hi"] = edges[b + 1];
      r["count"] = counts[b];
      detail::write_line(out, r);
    }
  }
}

void write_bin_report(std::ostream& out, const BinReport& report, ReportFormat format) {
  const std::size_t n_bins = report.counts.size();
  if (format == ReportFormat::kCsv) {
    out << "bin,lo,hi,positives,hits,recall\n";
    for (std::size_t b = 0; b < n_bins; ++b) {
      out << b << ',' << csv_number(report.bin_edges[b]) << ',' << csv_number(report.bin_edges[b + 1]) << ','
          << report.counts[b] << ',' << report.hits[b] << ','
          << (report.recall[b] ? csv_number(*report.recall[b]) : std::string()) << '\n';
    }
    return;
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    detail::ordered_json r;
    r["bin"] = b;
    r["lo"] = report.bin_edges[b];
    r["hi"] = report.bin_edges[b + 1];
    r["positives"] = report.counts[b];
    r["hits"] = report.hits[b];
    r["recall"] = report.recall[b] ? detail::ordered_json(*report.recall[b]) : detail::ordered_json(nullptr);
    detail::write_line(out, r);
  }
  detail::ordered_json summary;
  summary["rank_correlation"] = report.rank_correlation;
  summary["bin_trend"] = report.bin_trend;
  detail::write_line(out, summary);
}

void write_pca(std::ostream& out, const std::vector<PcaPoint>& points, ReportFormat format) {
  if (format == ReportFormat::kCsv) out << "id,sense,x,y\n";
  for (const auto& p : points) {
    if (format == ReportFormat::kCsv) {
      out << csv_field(p.instance_id) << ',' << csv_field(p.sense_id) << ',' << csv_number(p.x) << ','
          << csv_number(p.y) << '\n';
    } else {
      detail::ordered_json r;
      r["id"] = p.instance_id;
      r["sense"] = p.sense_id;
      r["x"] = p.x;
      r["y"] = p.y;
      detail::write_line(out, r);
    }
  }
}

}  // namespace hardmeta
