#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "seedling/imaging.hpp"

namespace seedling {

// K x K counts, row = true class, column = predicted class.
struct ConfusionMatrix {
  std::size_t k = 0;
  std::vector<std::size_t> counts;
  std::vector<std::string> names;

  std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * k + pred]; }
  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(std::size_t truth) const;
  std::size_t col_sum(std::size_t pred) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// names defaults to "0".."K-1" when empty.
ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels, std::size_t k,
                          std::vector<std::string> names = {});

struct ClassMetrics {
  std::string name;
  std::optional<double> precision;  // empty when the class was never predicted
  std::optional<double> recall;     // empty when the class has no samples
  std::optional<double> f1;         // empty only when both of the above are
  std::size_t support = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  ConfusionMatrix confusion;
  std::string confusion_csv;  // path of the written CSV, if any
  nlohmann::json meta = nlohmann::json::object();
};

// {"accuracy", "per_class": [{"name","precision","recall","f1","support"}],
//  "confusion_csv", "meta"}; undefined metrics serialize as null.
void to_json(nlohmann::json& j, const EvalReport& r);

EvalReport summarize(const ConfusionMatrix& cm);

// Header row "true\pred,<names...>", then one row per true class.
std::string confusion_csv(const ConfusionMatrix& cm);
ConfusionMatrix parse_confusion_csv(const std::string& text);

// Row-normalized grayscale image, `cell` pixels per entry. Rows with no samples
// are black; the largest normalized entry is white.
RasterImage confusion_heatmap(const ConfusionMatrix& cm, int cell = 16);

// Writes the CSV to csv_path and, when heatmap_path is non-empty, a PPM heatmap.
void render_confusion(const ConfusionMatrix& cm, const std::filesystem::path& csv_path,
                      const std::filesystem::path& heatmap_path = {});

struct ComparisonRow {
  std::string algorithm;
  std::string description;
  double accuracy = 0.0;  // fraction
};

// Markdown table with accuracy as a percentage to two decimals, rows in input
// order.
std::string comparison_table(std::span<const ComparisonRow> rows);

// "%.2f" of 100 * accuracy.
std::string format_percent(double accuracy);

}  // namespace seedling
