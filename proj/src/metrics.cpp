#include "seedling/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "seedling/error.hpp"
#include "seedling/fileutil.hpp"

namespace seedling {

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < k; ++i) t += at(i, i);
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::size_t t = 0;
  for (std::size_t p = 0; p < k; ++p) t += at(truth, p);
  return t;
}

std::size_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::size_t t = 0;
  for (std::size_t r = 0; r < k; ++r) t += at(r, pred);
  return t;
}

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels, std::size_t k,
                          std::vector<std::string> names) {
  if (preds.size() != labels.size()) {
    throw ArgumentError("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                        std::to_string(labels.size()) + " labels");
  }
  if (k == 0) throw ArgumentError("confusion: class count must be positive");
  if (names.empty()) {
    for (std::size_t c = 0; c < k; ++c) names.push_back(std::to_string(c));
  }
  if (names.size() != k) throw ArgumentError("confusion: expected " + std::to_string(k) + " class names");

  ConfusionMatrix cm{k, std::vector<std::size_t>(k * k, 0), std::move(names)};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int t = labels[i], p = preds[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= k || static_cast<std::size_t>(p) >= k) {
      throw ArgumentError("confusion: class index out of range at sample " + std::to_string(i));
    }
    ++cm.counts[static_cast<std::size_t>(t) * k + static_cast<std::size_t>(p)];
  }
  return cm;
}

EvalReport summarize(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw ArgumentError("summarize: confusion matrix is empty");

  EvalReport r;
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  r.confusion = cm;
  for (std::size_t c = 0; c < cm.k; ++c) {
    ClassMetrics m;
    m.name = cm.names[c];
    m.support = cm.row_sum(c);
    const auto tp = static_cast<double>(cm.at(c, c));
    if (const auto col = cm.col_sum(c); col > 0) m.precision = tp / static_cast<double>(col);
    if (m.support > 0) m.recall = tp / static_cast<double>(m.support);
    if (m.precision && m.recall) {
      const double sum = *m.precision + *m.recall;
      m.f1 = sum == 0.0 ? 0.0 : 2.0 * *m.precision * *m.recall / sum;
    } else if (m.precision || m.recall) {
      // The defined side is necessarily 0 here.
      m.f1 = 0.0;
    }
    r.per_class.push_back(std::move(m));
  }
  return r;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace

void to_json(nlohmann::json& j, const EvalReport& r) {
  auto per_class = nlohmann::json::array();
  for (const auto& m : r.per_class) {
    per_class.push_back({{"name", m.name},
                         {"precision", opt(m.precision)},
                         {"recall", opt(m.recall)},
                         {"f1", opt(m.f1)},
                         {"support", m.support}});
  }
  j = {{"accuracy", r.accuracy},
       {"per_class", std::move(per_class)},
       {"confusion_csv", r.confusion_csv.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.confusion_csv)},
       {"meta", r.meta}};
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::string out = "true\\pred";
  for (const auto& n : cm.names) out += "," + csv_field(n);
  out += "\n";
  for (std::size_t t = 0; t < cm.k; ++t) {
    out += csv_field(cm.names[t]);
    for (std::size_t p = 0; p < cm.k; ++p) out += "," + std::to_string(cm.at(t, p));
    out += "\n";
  }
  return out;
}

ConfusionMatrix parse_confusion_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("confusion CSV is empty");
  auto header = split_csv_line(line);
  if (header.size() < 2) throw FormatError("confusion CSV header has no classes");

  ConfusionMatrix cm;
  cm.names.assign(header.begin() + 1, header.end());
  cm.k = cm.names.size();
  for (std::size_t t = 0; t < cm.k; ++t) {
    if (!std::getline(in, line)) throw FormatError("confusion CSV has fewer rows than classes");
    const auto fields = split_csv_line(line);
    if (fields.size() != cm.k + 1) throw FormatError("confusion CSV row " + std::to_string(t + 1) + " has wrong width");
    if (fields[0] != cm.names[t]) throw FormatError("confusion CSV row label '" + fields[0] + "' out of order");
    for (std::size_t p = 0; p < cm.k; ++p) {
      std::size_t pos = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(fields[p + 1], &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != fields[p + 1].size()) throw FormatError("confusion CSV cell '" + fields[p + 1] + "'");
      cm.counts.push_back(static_cast<std::size_t>(v));
    }
  }
  return cm;
}

RasterImage confusion_heatmap(const ConfusionMatrix& cm, int cell) {
  if (cell < 1) throw ArgumentError("heatmap cell size must be >= 1");
  std::vector<double> frac(cm.k * cm.k, 0.0);
  for (std::size_t t = 0; t < cm.k; ++t) {
    const auto row = cm.row_sum(t);
    if (row == 0) continue;
    for (std::size_t p = 0; p < cm.k; ++p) frac[t * cm.k + p] = static_cast<double>(cm.at(t, p)) / row;
  }
  const double top = frac.empty() ? 0.0 : *std::max_element(frac.begin(), frac.end());

  const int side = static_cast<int>(cm.k) * cell;
  RasterImage img(side, side, 1);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double f = frac[static_cast<std::size_t>(y / cell) * cm.k + static_cast<std::size_t>(x / cell)];
      img.at(x, y, 0) = top > 0.0 ? to_u8(255.0 * f / top) : 0;
    }
  }
  return img;
}

void render_confusion(const ConfusionMatrix& cm, const std::filesystem::path& csv_path,
                      const std::filesystem::path& heatmap_path) {
  write_text_file(csv_path, confusion_csv(cm));
  if (!heatmap_path.empty()) write_image(confusion_heatmap(cm), heatmap_path);
}

std::string format_percent(double accuracy) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * accuracy);
  return buf;
}

std::string comparison_table(std::span<const ComparisonRow> rows) {
  const std::string h0 = "Algorithm", h1 = "Description", h2 = "Accuracy (%)";
  std::size_t w0 = h0.size(), w1 = h1.size(), w2 = h2.size();
  std::vector<std::string> acc;
  for (const auto& r : rows) {
    acc.push_back(format_percent(r.accuracy));
    w0 = std::max(w0, r.algorithm.size());
    w1 = std::max(w1, r.description.size());
    w2 = std::max(w2, acc.back().size());
  }
  auto pad = [](const std::string& s, std::size_t w, bool right) {
    const std::string fill(w - s.size(), ' ');
    return right ? fill + s : s + fill;
  };
  std::string out = "| " + pad(h0, w0, false) + " | " + pad(h1, w1, false) + " | " + pad(h2, w2, false) + " |\n";
  out += "|" + std::string(w0 + 2, '-') + "|" + std::string(w1 + 2, '-') + "|" + std::string(w2 + 1, '-') + ":|\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += "| " + pad(rows[i].algorithm, w0, false) + " | " + pad(rows[i].description, w1, false) + " | " +
           pad(acc[i], w2, true) + " |\n";
  }
  return out;
}

}  // namespace seedling
