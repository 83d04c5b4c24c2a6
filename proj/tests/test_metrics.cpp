#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "seedling/error.hpp"
#include "seedling/fileutil.hpp"
#include "seedling/metrics.hpp"
#include "seedling/tensor.hpp"
#include "tempdir.hpp"

using namespace seedling;

TEST_SUITE("metrics") {
  TEST_CASE("confusion counts") {
    const std::vector<int> labels{0, 0, 1}, preds{0, 1, 1};
    const auto cm = confusion(preds, labels, 2);
    CHECK(cm.counts == std::vector<std::size_t>{1, 1, 0, 1});
    CHECK(cm.names == std::vector<std::string>{"0", "1"});
    CHECK(cm.total() == 3);
    CHECK(cm.trace() == 2);
    CHECK(cm.row_sum(0) == 2);
    CHECK(cm.col_sum(1) == 2);

    const std::vector<int> y{2, 0, 1, 2, 2};
    const auto diag = confusion(y, y, 3);
    CHECK(diag.counts == std::vector<std::size_t>{1, 0, 0, 0, 1, 0, 0, 0, 3});

    CHECK_THROWS_AS(confusion(preds, std::vector<int>{0, 1}, 2), ArgumentError);
    CHECK_THROWS_AS(confusion(std::vector<int>{0, 2, 1}, labels, 2), ArgumentError);
    CHECK_THROWS_AS(confusion(preds, labels, 2, {"a"}), ArgumentError);
  }

  TEST_CASE("confusion matches pairwise counting") {
    SeededRng rng(1);
    for (int t = 0; t < 50; ++t) {
      const std::size_t k = 2 + rng.bounded(6), n = 1 + rng.bounded(80);
      std::vector<int> p(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = static_cast<int>(rng.bounded(k));
        y[i] = static_cast<int>(rng.bounded(k));
      }
      const auto cm = confusion(p, y, k);
      REQUIRE(cm.counts == oracle::confusion_pairwise(p, y, k));
      REQUIRE(cm.total() == n);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < n; ++i) hits += p[i] == y[i];
      REQUIRE(summarize(cm).accuracy == static_cast<double>(hits) / static_cast<double>(n));
    }
  }

  TEST_CASE("summarize") {
    const std::vector<int> y{0, 1, 2, 2};
    const auto perfect = summarize(confusion(y, y, 3));
    CHECK(perfect.accuracy == 1.0);
    for (const auto& c : perfect.per_class) {
      CHECK(c.precision == 1.0);
      CHECK(c.recall == 1.0);
      CHECK(c.f1 == 1.0);
    }

    const std::vector<int> labels{0, 0, 1}, preds{0, 1, 1};
    const auto r = summarize(confusion(preds, labels, 2));
    CHECK(r.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(*r.per_class[0].recall == 0.5);
    CHECK(*r.per_class[1].recall == 1.0);
    CHECK(*r.per_class[1].precision == 0.5);
    CHECK(*r.per_class[0].f1 == doctest::Approx(2.0 / 3.0));
    CHECK(r.per_class[0].support == 2);

    // Class 2 never predicted and never present; class 1 never predicted.
    const auto u = summarize(confusion(std::vector<int>{0, 0}, std::vector<int>{0, 1}, 3));
    CHECK_FALSE(u.per_class[1].precision.has_value());
    CHECK(*u.per_class[1].recall == 0.0);
    CHECK(*u.per_class[1].f1 == 0.0);
    CHECK_FALSE(u.per_class[2].precision.has_value());
    CHECK_FALSE(u.per_class[2].recall.has_value());
    CHECK_FALSE(u.per_class[2].f1.has_value());

    const nlohmann::json j = u;
    CHECK(j["per_class"][2]["precision"].is_null());
    CHECK(j["per_class"][1]["recall"] == 0.0);
    CHECK(j["accuracy"] == 0.5);
    CHECK(j.contains("meta"));
    CHECK(j.contains("confusion_csv"));

    CHECK_THROWS_AS(summarize(confusion(std::vector<int>{}, std::vector<int>{}, 2)), ArgumentError);
  }

  TEST_CASE("summarize is permutation-equivariant") {
    SeededRng rng(2);
    std::vector<int> p(40), y(40);
    for (std::size_t i = 0; i < 40; ++i) {
      p[i] = static_cast<int>(rng.bounded(4));
      y[i] = static_cast<int>(rng.bounded(4));
    }
    const std::vector<int> perm{2, 0, 3, 1};
    std::vector<int> pp(40), py(40);
    for (std::size_t i = 0; i < 40; ++i) {
      pp[i] = perm[static_cast<std::size_t>(p[i])];
      py[i] = perm[static_cast<std::size_t>(y[i])];
    }
    const auto a = summarize(confusion(p, y, 4)), b = summarize(confusion(pp, py, 4));
    CHECK(a.accuracy == b.accuracy);
    for (std::size_t c = 0; c < 4; ++c) {
      const auto& ca = a.per_class[c];
      const auto& cb = b.per_class[static_cast<std::size_t>(perm[c])];
      CHECK(ca.precision == cb.precision);
      CHECK(ca.recall == cb.recall);
      CHECK(ca.support == cb.support);
    }
  }

  TEST_CASE("csv") {
    const auto cm = confusion(std::vector<int>{0, 1, 1}, std::vector<int>{0, 0, 1}, 2, {"oat", "rye"});
    CHECK(confusion_csv(cm) == "true\\pred,oat,rye\noat,1,1\nrye,0,1\n");
    CHECK(parse_confusion_csv(confusion_csv(cm)) == cm);

    const auto odd = confusion(std::vector<int>{0, 1}, std::vector<int>{1, 1}, 2, {"a,b", "say \"hi\""});
    CHECK(parse_confusion_csv(confusion_csv(odd)) == odd);
    CHECK_THROWS_AS(parse_confusion_csv("true\\pred,a\na,x\n"), FormatError);
    CHECK_THROWS_AS(parse_confusion_csv(""), FormatError);
  }

  TEST_CASE("heatmap") {
    // Row 1 has no samples.
    const auto cm = confusion(std::vector<int>{0, 2, 2, 2}, std::vector<int>{0, 0, 2, 2}, 3);
    const auto img = confusion_heatmap(cm, 2);
    REQUIRE(img.width() == 6);
    REQUIRE(img.height() == 6);
    CHECK(img.at(0, 0, 0) == to_u8(255.0 * 0.5));
    CHECK(img.at(4, 0, 0) == to_u8(255.0 * 0.5));
    CHECK(img.at(5, 5, 0) == 255);
    for (int x = 0; x < 6; ++x) CHECK(img.at(x, 2, 0) == 0);
    CHECK(img.channels() == 1);

    TempDir dir("heat");
    render_confusion(cm, dir / "cm.csv", dir / "cm.ppm");
    CHECK(parse_confusion_csv(read_text_file(dir / "cm.csv")) == cm);
    CHECK(read_image(dir / "cm.ppm").width() == 48);  // default 16-pixel cells
    CHECK_THROWS_AS(render_confusion(cm, "/nonexistent-dir/cm.csv"), IoError);
  }

  TEST_CASE("comparison table") {
    CHECK(format_percent(0.5) == "50.00");
    CHECK(format_percent(0.92604) == "92.60");
    const std::vector<ComparisonRow> rows{{"KNN", "segmented input", 0.5684},
                                          {"SVM", "segmented input", 0.6147},
                                          {"CNN", "raw input with attention gate", 0.8021},
                                          {"CNN", "segmented input", 0.9260}};
    const auto table = comparison_table(rows);
    for (const char* v : {"56.84", "61.47", "80.21", "92.60"}) CHECK(table.find(v) != std::string::npos);
    CHECK(table.find("56.84") < table.find("61.47"));
    CHECK(table.find("80.21") < table.find("92.60"));
    CHECK(table.rfind("| Algorithm", 0) == 0);

    const std::vector<ComparisonRow> one{{"KNN", "k = 5", 1.0}};
    const auto single = comparison_table(one);
    CHECK(std::count(single.begin(), single.end(), '\n') == 3);  // header, rule, row
    CHECK(single.find("100.00") != std::string::npos);
  }
}
