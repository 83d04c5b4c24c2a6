#include "seedling/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "seedling/container.hpp"
#include "seedling/detail/json_keys.hpp"
#include "seedling/error.hpp"

namespace seedling {

void KnnConfig::validate() const {
  if (n_neighbours < 1) throw ConfigError("knn n_neighbours must be >= 1");
  if (weighting != "uniform") throw ConfigError("knn weighting must be \"uniform\", got \"" + weighting + "\"");
}

void SvmConfig::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw ConfigError("svm C must be positive and finite");
  if (kernel != "linear") throw ConfigError("svm kernel must be \"linear\", got \"" + kernel + "\"");
  if (gamma != "auto") throw ConfigError("svm gamma must be \"auto\", got \"" + gamma + "\"");
  if (epochs < 1) throw ConfigError("svm epochs must be >= 1");
}

void to_json(nlohmann::json& j, const KnnConfig& c) {
  j = {{"n_neighbours", c.n_neighbours}, {"weighting", c.weighting}};
}

void from_json(const nlohmann::json& j, KnnConfig& c) {
  detail::check_keys(j, "knn", {"n_neighbours", "weighting"});
  detail::read_key(j, "knn", "n_neighbours", c.n_neighbours);
  detail::read_key(j, "knn", "weighting", c.weighting);
  c.validate();
}

void to_json(nlohmann::json& j, const SvmConfig& c) {
  j = {{"C", c.C}, {"kernel", c.kernel}, {"gamma", c.gamma}, {"epochs", c.epochs}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, SvmConfig& c) {
  detail::check_keys(j, "svm", {"C", "kernel", "gamma", "epochs", "seed"});
  detail::read_key(j, "svm", "C", c.C);
  detail::read_key(j, "svm", "kernel", c.kernel);
  detail::read_key(j, "svm", "gamma", c.gamma);
  detail::read_key(j, "svm", "epochs", c.epochs);
  detail::read_key(j, "svm", "seed", c.seed);
  c.validate();
}

std::vector<int> knn_grid(std::size_t n) {
  if (n == 0) throw ArgumentError("knn_grid needs n >= 1");
  std::size_t r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  std::vector<int> ks;
  for (std::size_t k = 1; k <= r; k += 2) ks.push_back(static_cast<int>(k));
  return ks;
}

namespace {

void check_matrix(const Tensor& x, std::span<const int> labels, const char* what) {
  if (x.rank() != 2) throw ShapeError(std::string(what) + ": features must be n x d, got " + shape_str(x.shape()));
  if (x.dim(0) != labels.size()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(x.dim(0)) + " rows vs " +
                     std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw ArgumentError(std::string(what) + ": empty training set");
}

std::size_t infer_classes(std::span<const int> labels, std::size_t num_classes, const char* what) {
  const int hi = *std::max_element(labels.begin(), labels.end());
  const int lo = *std::min_element(labels.begin(), labels.end());
  if (lo < 0) throw ArgumentError(std::string(what) + ": negative label");
  if (num_classes == 0) return static_cast<std::size_t>(hi) + 1;
  if (static_cast<std::size_t>(hi) >= num_classes) throw ArgumentError(std::string(what) + ": label out of range");
  return num_classes;
}

// Four accumulators keep the summation order fixed while breaking the add chain.
template <typename A, typename B>
double dot(const A* a, const B* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += static_cast<double>(a[i]) * b[i];
    s1 += static_cast<double>(a[i + 1]) * b[i + 1];
    s2 += static_cast<double>(a[i + 2]) * b[i + 2];
    s3 += static_cast<double>(a[i + 3]) * b[i + 3];
  }
  for (; i < n; ++i) s0 += static_cast<double>(a[i]) * b[i];
  return (s0 + s1) + (s2 + s3);
}

double squared_distance(const float* a, const float* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double d0 = static_cast<double>(a[i]) - b[i], d1 = static_cast<double>(a[i + 1]) - b[i + 1];
    const double d2 = static_cast<double>(a[i + 2]) - b[i + 2], d3 = static_cast<double>(a[i + 3]) - b[i + 3];
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s0 += d * d;
  }
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

KnnModel knn_fit(const Tensor& features, std::span<const int> labels, std::size_t num_classes) {
  check_matrix(features, labels, "knn_fit");
  return {features, {labels.begin(), labels.end()}, infer_classes(labels, num_classes, "knn_fit")};
}

std::vector<std::vector<int>> knn_predict_multi(const KnnModel& model, const Tensor& queries, std::span<const int> ks) {
  const std::size_t n = model.labels.size();
  if (n == 0) throw ArgumentError("knn_predict: empty training set");
  const std::size_t d = model.features.dim(1);
  if (queries.rank() != 2 || queries.dim(1) != d) {
    throw ShapeError("knn_predict: queries " + shape_str(queries.shape()) + " vs feature dimension " +
                     std::to_string(d));
  }
  for (int k : ks) {
    if (k < 1 || static_cast<std::size_t>(k) > n) {
      throw ArgumentError("knn_predict: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }
  }

  const std::size_t q = queries.dim(0);
  std::vector<std::vector<int>> out(ks.size(), std::vector<int>(q));
  std::vector<std::pair<double, std::size_t>> dist(n);
  std::vector<std::size_t> votes(model.num_classes);
  std::vector<double> summed(model.num_classes);
  const float* train = model.features.data().data();
  const float* qs = queries.data().data();
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[j] = {squared_distance(qs + i * d, train + j * d, d), j};
    std::sort(dist.begin(), dist.end());
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      std::fill(votes.begin(), votes.end(), 0);
      std::fill(summed.begin(), summed.end(), 0.0);
      for (std::size_t r = 0; r < static_cast<std::size_t>(ks[ki]); ++r) {
        const auto c = static_cast<std::size_t>(model.labels[dist[r].second]);
        ++votes[c];
        summed[c] += std::sqrt(dist[r].first);
      }
      std::size_t best = 0;
      for (std::size_t c = 1; c < model.num_classes; ++c) {
        if (votes[c] > votes[best] || (votes[c] == votes[best] && votes[c] > 0 && summed[c] < summed[best])) best = c;
      }
      out[ki][i] = static_cast<int>(best);
    }
  }
  return out;
}

std::vector<int> knn_predict(const KnnModel& model, const Tensor& queries, int k) {
  const int ks[] = {k};
  return std::move(knn_predict_multi(model, queries, ks)[0]);
}

SvmModel svm_fit(const Tensor& features, std::span<const int> labels, const SvmConfig& cfg, std::size_t num_classes) {
  cfg.validate();
  check_matrix(features, labels, "svm_fit");
  const std::size_t k = infer_classes(labels, num_classes, "svm_fit");
  {
    std::vector<char> seen(k, 0);
    for (int y : labels) seen[static_cast<std::size_t>(y)] = 1;
    if (std::count(seen.begin(), seen.end(), 1) < 2) throw ArgumentError("svm_fit: needs at least two classes present");
  }

  const std::size_t n = features.dim(0), d = features.dim(1);
  const double lambda = 1.0 / (cfg.C * static_cast<double>(n));
  const double radius2 = 1.0 / lambda;
  const auto total = static_cast<long>(cfg.epochs) * static_cast<long>(n);
  const long tail_start = total / 2;  // average steps t > tail_start
  const float* x = features.data().data();

  SvmModel model{Tensor({k, d}), Tensor({k})};
  SeededRng master(cfg.seed);
  std::vector<double> w(d + 1), avg(d + 1);
  std::vector<std::size_t> order(n);
  for (std::size_t c = 0; c < k; ++c) {
    SeededRng rng(master.next_u64());
    std::fill(w.begin(), w.end(), 0.0);
    std::fill(avg.begin(), avg.end(), 0.0);
    std::iota(order.begin(), order.end(), std::size_t{0});
    long t = 0;
    for (int e = 0; e < cfg.epochs; ++e) {
      shuffle(order.begin(), order.end(), rng);
      for (std::size_t i : order) {
        ++t;
        const float* xi = x + i * d;
        const double y = labels[i] == static_cast<int>(c) ? 1.0 : -1.0;
        const double margin = y * (dot(xi, w.data(), d) + w[d]);
        const double shrink = 1.0 - 1.0 / static_cast<double>(t);
        for (auto& v : w) v *= shrink;
        if (margin < 1.0) {
          const double step = y / (lambda * static_cast<double>(t));
          for (std::size_t j = 0; j < d; ++j) w[j] += step * xi[j];
          w[d] += step;
        }
        const double norm2 = dot(w.data(), w.data(), d + 1);
        if (norm2 > radius2) {
          const double s = std::sqrt(radius2 / norm2);
          for (auto& v : w) v *= s;
        }
        if (t > tail_start) {
          for (std::size_t j = 0; j <= d; ++j) avg[j] += w[j];
        }
      }
    }
    const auto count = static_cast<double>(total - tail_start);
    for (std::size_t j = 0; j < d; ++j) model.weights[c * d + j] = static_cast<float>(avg[j] / count);
    model.bias[c] = static_cast<float>(avg[d] / count);
  }
  return model;
}

Tensor svm_scores(const SvmModel& model, const Tensor& queries) {
  const std::size_t k = model.weights.dim(0), d = model.weights.dim(1);
  if (queries.rank() != 2 || queries.dim(1) != d) {
    throw ShapeError("svm_predict: queries " + shape_str(queries.shape()) + " vs feature dimension " +
                     std::to_string(d));
  }
  const std::size_t q = queries.dim(0);
  Tensor out({q, k});
  const float* qs = queries.data().data();
  const float* ws = model.weights.data().data();
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      out[i * k + c] = static_cast<float>(dot(qs + i * d, ws + c * d, d) + model.bias[c]);
    }
  }
  return out;
}

std::vector<int> svm_predict(const SvmModel& model, const Tensor& queries) {
  const Tensor scores = svm_scores(model, queries);
  const std::size_t q = scores.dim(0), k = scores.dim(1);
  std::vector<int> out(q);
  for (std::size_t i = 0; i < q; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (scores[i * k + c] > scores[i * k + best]) best = c;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

double svm_objective(const SvmModel& model, const Tensor& features, std::span<const int> labels, double C) {
  check_matrix(features, labels, "svm_objective");
  const std::size_t k = model.weights.dim(0), d = model.weights.dim(1), n = features.dim(0);
  if (features.dim(1) != d) throw ShapeError("svm_objective: feature dimension mismatch");
  const float* x = features.data().data();
  const float* ws = model.weights.data().data();
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double b = model.bias[c];
    double obj = 0.5 * (dot(ws + c * d, ws + c * d, d) + b * b);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = labels[i] == static_cast<int>(c) ? 1.0 : -1.0;
      obj += C * std::max(0.0, 1.0 - y * (dot(x + i * d, ws + c * d, d) + b));
    }
    total += obj;
  }
  return total;
}

void to_json(nlohmann::json& j, const BaselineConfig& c) {
  std::visit(
      [&j](const auto& cfg) {
        j = cfg;
        j["algorithm"] = std::is_same_v<std::decay_t<decltype(cfg)>, KnnConfig> ? "knn" : "svm";
      },
      c);
}

void GridSearchSpec::validate() const {
  if (folds < 2) throw ConfigError("grid search needs at least 2 folds");
  if (candidates.empty()) throw ConfigError("grid search needs at least one candidate");
  for (const auto& c : candidates) std::visit([](const auto& cfg) { cfg.validate(); }, c);
}

void to_json(nlohmann::json& j, const GridRow& row) {
  j = {{"params", row.params}, {"fold_acc", row.fold_acc}, {"mean_acc", row.mean_acc}};
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ArgumentError("stratified_folds needs at least 2 folds");
  if (labels.empty()) return {};
  const auto k = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw ArgumentError("stratified_folds: negative label");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  SeededRng rng(seed);
  std::vector<int> fold(labels.size(), 0);
  for (std::size_t c = 0; c < k; ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    if (idx.size() < static_cast<std::size_t>(folds)) {
      throw ArgumentError("class " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                          " items, fewer than the " + std::to_string(folds) + " folds");
    }
    shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t r = 0; r < idx.size(); ++r) fold[idx[r]] = static_cast<int>(r % static_cast<std::size_t>(folds));
  }
  return fold;
}

namespace {

Tensor take_rows(const Tensor& x, std::span<const std::size_t> rows) {
  const std::size_t d = x.dim(1);
  Tensor out({rows.size(), d});
  auto src = x.data();
  auto dst = out.data();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(rows[r] * d), d, dst.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  return out;
}

double fraction_correct(std::span<const int> pred, std::span<const int> truth) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

// Secondary key for tie-breaks; only comparable within one algorithm.
double tie_key(const BaselineConfig& c) {
  if (const auto* knn = std::get_if<KnnConfig>(&c)) return knn->n_neighbours;
  return std::get<SvmConfig>(c).C;
}

}  // namespace

GridResult grid_search(const Tensor& features, std::span<const int> labels, const GridSearchSpec& spec) {
  spec.validate();
  check_matrix(features, labels, "grid_search");
  const std::size_t k = infer_classes(labels, 0, "grid_search");
  const auto fold_of = stratified_folds(labels, spec.folds, spec.seed);

  GridResult result;
  for (const auto& c : spec.candidates) result.table.push_back({c, {}, 0.0});

  std::vector<std::size_t> knn_rows;
  std::vector<int> ks;
  for (std::size_t r = 0; r < spec.candidates.size(); ++r) {
    if (const auto* knn = std::get_if<KnnConfig>(&spec.candidates[r])) {
      knn_rows.push_back(r);
      ks.push_back(knn->n_neighbours);
    }
  }

  for (int f = 0; f < spec.folds; ++f) {
    std::vector<std::size_t> tr, va;
    for (std::size_t i = 0; i < labels.size(); ++i) (fold_of[i] == f ? va : tr).push_back(i);
    const Tensor xtr = take_rows(features, tr), xva = take_rows(features, va);
    std::vector<int> ytr, yva;
    for (auto i : tr) ytr.push_back(labels[i]);
    for (auto i : va) yva.push_back(labels[i]);

    if (!knn_rows.empty()) {
      const auto preds = knn_predict_multi(knn_fit(xtr, ytr, k), xva, ks);
      for (std::size_t r = 0; r < knn_rows.size(); ++r) {
        result.table[knn_rows[r]].fold_acc.push_back(fraction_correct(preds[r], yva));
      }
    }
    for (std::size_t r = 0; r < spec.candidates.size(); ++r) {
      if (const auto* svm = std::get_if<SvmConfig>(&spec.candidates[r])) {
        const auto pred = svm_predict(svm_fit(xtr, ytr, *svm, k), xva);
        result.table[r].fold_acc.push_back(fraction_correct(pred, yva));
      }
    }
  }

  for (std::size_t r = 0; r < result.table.size(); ++r) {
    auto& row = result.table[r];
    row.mean_acc = std::accumulate(row.fold_acc.begin(), row.fold_acc.end(), 0.0) / static_cast<double>(spec.folds);
    const auto& best = result.table[result.best];
    if (r == 0) continue;
    if (row.mean_acc > best.mean_acc ||
        (row.mean_acc == best.mean_acc && row.params.index() == best.params.index() &&
         tie_key(row.params) < tie_key(best.params))) {
      result.best = r;
    }
  }
  return result;
}

BaselineModel fit_baseline(const BaselineConfig& cfg, const Tensor& features, std::span<const int> labels,
                           std::vector<std::string> label_names) {
  BaselineModel m;
  m.config = cfg;
  const std::size_t k = label_names.size();
  m.label_names = std::move(label_names);
  if (const auto* knn = std::get_if<KnnConfig>(&cfg)) {
    knn->validate();
    m.knn = knn_fit(features, labels, k);
    if (static_cast<std::size_t>(knn->n_neighbours) > m.knn.labels.size()) {
      throw ArgumentError("knn: n_neighbours exceeds the training set size");
    }
  } else {
    m.svm = svm_fit(features, labels, std::get<SvmConfig>(cfg), k);
  }
  return m;
}

std::vector<int> predict(const BaselineModel& model, const Tensor& queries) {
  if (model.is_knn()) return knn_predict(model.knn, queries, std::get<KnnConfig>(model.config).n_neighbours);
  return svm_predict(model.svm, queries);
}

void save_baseline(const BaselineModel& model, const std::filesystem::path& path) {
  nlohmann::json header{{"algorithm", model.algorithm()},
                        {"label_names", model.label_names},
                        {"metadata", model.metadata}};
  std::visit([&header](const auto& cfg) { header["config"] = cfg; }, model.config);
  std::vector<NamedTensor> tensors;
  if (model.is_knn()) {
    Tensor labels({model.knn.labels.size()});
    for (std::size_t i = 0; i < model.knn.labels.size(); ++i) labels[i] = static_cast<float>(model.knn.labels[i]);
    tensors.push_back({"features", model.knn.features});
    tensors.push_back({"labels", std::move(labels)});
  } else {
    tensors.push_back({"weights", model.svm.weights});
    tensors.push_back({"bias", model.svm.bias});
  }
  write_container(path, kBaselineMagic, header, tensors);
}

BaselineModel load_baseline(const std::filesystem::path& path) {
  const Container c = read_container(path, kBaselineMagic);
  using Kind = ContainerError::Kind;
  const std::string where = "'" + path.string() + "': ";
  BaselineModel m;
  try {
    const auto algo = c.header.at("algorithm").get<std::string>();
    m.label_names = c.header.at("label_names").get<std::vector<std::string>>();
    if (c.header.contains("metadata")) m.metadata = c.header.at("metadata");
    if (algo == "knn") {
      m.config = c.header.at("config").get<KnnConfig>();
    } else if (algo == "svm") {
      m.config = c.header.at("config").get<SvmConfig>();
    } else {
      throw ContainerError(Kind::malformed_header, where + "unknown algorithm '" + algo + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(Kind::malformed_header, where + e.what());
  } catch (const ConfigError& e) {
    throw ContainerError(Kind::malformed_header, where + e.what());
  }

  const std::size_t k = m.label_names.size();
  if (m.is_knn()) {
    const Tensor& x = c.get("features");
    const Tensor& y = c.get("labels");
    if (x.rank() != 2 || y.rank() != 1 || y.dim(0) != x.dim(0)) {
      throw ContainerError(Kind::inconsistent, where + "knn features/labels shapes disagree");
    }
    std::vector<int> labels;
    for (float v : y.data()) {
      if (v < 0.0f || v != std::floor(v) || static_cast<std::size_t>(v) >= k) {
        throw ContainerError(Kind::inconsistent, where + "knn label out of range");
      }
      labels.push_back(static_cast<int>(v));
    }
    m.knn = {x, std::move(labels), k};
  } else {
    const Tensor& w = c.get("weights");
    const Tensor& b = c.get("bias");
    if (w.rank() != 2 || w.dim(0) != k || b.rank() != 1 || b.dim(0) != k) {
      throw ContainerError(Kind::inconsistent, where + "svm weights/bias shapes disagree with class count");
    }
    m.svm = {w, b};
  }
  return m;
}

}  // namespace seedling
