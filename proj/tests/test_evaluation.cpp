#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "simeval/error.hpp"
#include "simeval/evaluation.hpp"
#include "simeval/random.hpp"

using namespace simeval;

namespace {

using Vec = std::vector<double>;

RatedItem rated(std::string id, double simplicity, std::optional<double> fluency,
                std::optional<double> adequacy) {
  RatedItem item;
  item.item_id = std::move(id);
  item.simplicity = simplicity;
  item.fluency = fluency;
  item.adequacy = adequacy;
  return item;
}

std::vector<RatedItem> bivariate_items(Rng& rng, std::size_t n, double rho) {
  std::vector<RatedItem> items;
  items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.normal(), b = rho * a + std::sqrt(1 - rho * rho) * rng.normal();
    items.push_back(rated(std::to_string(i), 0.0, a, b));
  }
  return items;
}

const std::vector<RatingDim> kFluencyAdequacy{RatingDim::fluency, RatingDim::adequacy};

}  // namespace

TEST_CASE("mae") {
  CHECK(mae(Vec{1.0, 2.0}, Vec{1, 3}) == 0.5);
  CHECK(mae(Vec{0.3, 2.2}, Vec{0.3, 2.2}) == 0.0);
  CHECK(mae(Vec{0, 4}, Vec{4, 0}) == 4.0);
  CHECK_THROWS_AS(mae(Vec{1, 2}, Vec{1}), ValidationError);
  CHECK_THROWS_AS(mae(Vec{}, Vec{}), ValidationError);

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    Vec p, l, pc, lc;
    const double c = rng.normal(0, 5);
    for (int k = 0; k < 10; ++k) {
      p.push_back(rng.uniform() * 4);
      l.push_back(static_cast<double>(rng.below(5)));
      pc.push_back(p.back() + c);
      lc.push_back(l.back() + c);
    }
    CHECK(mae(pc, lc) == doctest::Approx(mae(p, l)).epsilon(1e-12));
  }
}

TEST_CASE("doc_mae") {
  const std::vector<std::string> one{"a", "a"};
  CHECK(doc_mae(Vec{2.0, 4.0}, one, {{"a", 3}}) == 0.0);

  const std::vector<std::string> two{"a", "b", "b", "b"};
  CHECK(doc_mae(Vec{1.0, 2.0, 3.0, 4.0}, two, {{"a", 1}, {"b", 2}}) == 0.5);  // errors {0, 1}

  CHECK(doc_mae(Vec{2.4}, std::vector<std::string>{"x"}, {{"x", 2}}) == doctest::Approx(0.4).epsilon(1e-15));

  CHECK_THROWS_AS(doc_mae(Vec{1.0}, std::vector<std::string>{"a"}, {{"a", 1}, {"b", 2}}), ValidationError);
  CHECK_THROWS_AS(doc_mae(Vec{1.0}, std::vector<std::string>{"c"}, {{"a", 1}}), ValidationError);

  // One sentence per document reduces to plain MAE.
  Rng rng(5);
  Vec preds, levels;
  std::vector<std::string> ids;
  std::map<std::string, int> doc_levels;
  for (int i = 0; i < 40; ++i) {
    preds.push_back(rng.uniform() * 4);
    const int level = static_cast<int>(rng.below(5));
    levels.push_back(level);
    ids.push_back("d" + std::to_string(i));
    doc_levels[ids.back()] = level;
  }
  CHECK(doc_mae(preds, ids, doc_levels) == doctest::Approx(mae(preds, levels)).epsilon(1e-14));
}

TEST_CASE("rounding and f1") {
  CHECK(round_to_level(0.5) == 1);
  CHECK(round_to_level(2.5) == 3);
  CHECK(round_to_level(2.4999) == 2);
  CHECK(round_to_level(4.7) == 4);
  CHECK(round_to_level(-0.6) == 0);

  CHECK(f1_rounded(Vec{0.6, 3.4}, std::vector<int>{1, 3}) == 1.0);
  CHECK(f1_rounded(Vec{0.0, 0.0}, std::vector<int>{0, 4}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(f1_rounded(Vec{4.7, 9.0}, std::vector<int>{4, 4}) == 1.0);
  CHECK_THROWS_AS(f1_rounded(Vec{1.0}, std::vector<int>{1, 2}), ValidationError);
  CHECK_THROWS_AS(f1_rounded(Vec{1.0}, std::vector<int>{5}), ValidationError);

  // Predicting a class absent from gold lowers the present classes' precision
  // but adds no zero term of its own: gold {0,1}, rounded {0,2} -> (1 + 0) / 2.
  CHECK(f1_rounded(Vec{0.0, 2.0}, std::vector<int>{0, 1}) == 0.5);
}

TEST_CASE("evaluate_regression") {
  std::vector<SentenceRecord> records{
      {"a1", "d1", 2, "x", {}}, {"a1", "d1", 2, "y", {}}, {"a1", "d2", 0, "z", {}}};
  const auto report = evaluate_regression(Vec{1.5, 3.0, 0.2}, records);
  CHECK(report.mae == doctest::Approx((0.5 + 1.0 + 0.2) / 3).epsilon(1e-14));
  CHECK(report.doc_mae == doctest::Approx((0.25 + 0.2) / 2).epsilon(1e-14));
  CHECK(report.sentences == 3);
  CHECK(report.documents == 2);
  // rounded {2, 3, 0} vs gold {2, 2, 0}: class 2 F1 2/3, class 0 F1 1.
  CHECK(report.f1 == doctest::Approx((2.0 / 3.0 + 1.0) / 2).epsilon(1e-14));
}

TEST_CASE("pearson examples") {
  CHECK(pearson(Vec{1, 2, 3}, Vec{2, 4, 6}).r == doctest::Approx(1.0).epsilon(1e-15));
  const auto inv = pearson(Vec{1, 2, 3}, Vec{6, 4, 2});
  CHECK(inv.r == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(inv.p_value == doctest::Approx(0.0));
  const auto r = pearson(Vec{1, 2, 3}, Vec{1, 1, 2});
  CHECK(r.r == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-14));
  // n = 3, r = sqrt(3)/2: t = sqrt(3), one dof, p = 1 - 2 atan(sqrt 3)/pi = 1/3.
  CHECK(r.p_value == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(r.n == 3);

  CHECK_THROWS_WITH_AS(pearson(Vec{1, 1, 1}, Vec{1, 2, 3}), doctest::Contains("zero variance"), ValidationError);
  CHECK_THROWS_AS(pearson(Vec{1, 2}, Vec{1, 2}), ValidationError);
  CHECK_THROWS_AS(pearson(Vec{1, 2, 3}, Vec{1, 2}), ValidationError);
}

TEST_CASE("pearson against oracles") {
  Rng rng(2024);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 3 + rng.below(48);
    const double rho = rng.uniform() * 2 - 1;
    Vec x, y;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(rng.normal(3, 2));
      y.push_back(rho * x.back() + rng.normal());
    }
    const auto got = pearson(x, y);
    CHECK(std::abs(got.r - oracle::pearson_r(x, y)) <= 1e-12);
    CHECK(std::abs(got.p_value - oracle::pearson_p(got.r, n)) <= 1e-6);
    CHECK(got.p_value >= 0.0);
    CHECK(got.p_value <= 1.0);

    const double a = 0.1 + rng.uniform() * 10, b = rng.normal(0, 100);
    Vec ax, neg;
    for (double v : x) {
      ax.push_back(a * v + b);
      neg.push_back(-a * v + b);
    }
    CHECK(std::abs(pearson(ax, y).r - got.r) <= 1e-12);
    CHECK(std::abs(pearson(neg, y).r + got.r) <= 1e-12);
  }
}

TEST_CASE("incomplete beta and t distribution") {
  // I_x(1, 1) = x; I_x(a, 1) = x^a; symmetry I_x(a, b) = 1 - I_{1-x}(b, a).
  CHECK(regularized_incomplete_beta(1, 1, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(regularized_incomplete_beta(2.5, 1, 0.4) == doctest::Approx(std::pow(0.4, 2.5)).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(3, 7, 0.2) ==
        doctest::Approx(1 - regularized_incomplete_beta(7, 3, 0.8)).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2, 3, 1.0) == 1.0);
  CHECK_THROWS_AS(regularized_incomplete_beta(0, 1, 0.5), ValidationError);
  CHECK_THROWS_AS(regularized_incomplete_beta(1, 1, 1.5), ValidationError);

  // Cauchy: p = 1 - 2 atan(t) / pi.
  CHECK(student_t_two_sided_p(1.0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(student_t_two_sided_p(0.0, 10) == 1.0);
  CHECK(student_t_two_sided_p(-2.0, 5) == student_t_two_sided_p(2.0, 5));
  CHECK(student_t_two_sided_p(INFINITY, 5) == 0.0);
}

TEST_CASE("significance markers") {
  CHECK(significance_marker(0.0005) == "**");
  CHECK(significance_marker(0.005) == "*");
  CHECK(significance_marker(0.001) == "*");
  CHECK(significance_marker(0.01) == "");
  CHECK(significance_marker(0.5) == "");
}

TEST_CASE("filter_ratings") {
  SUBCASE("threshold semantics") {
    std::vector<RatedItem> items{rated("1", 3, 1.0, 1.0), rated("2", 3, -1.0, 1.0),
                                 rated("3", 3, 0.0, -1.0), rated("4", 3, 0.0, -1.0)};
    // fluency: mean 0, sd sqrt(0.5); adequacy: mean 0, sd 1.
    const auto kept = filter_ratings(items, kFluencyAdequacy, 0.3);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].item_id == "1");
  }
  SUBCASE("vacuous and exclusion") {
    Rng rng(9);
    const auto items = bivariate_items(rng, 50, 0.2);
    CHECK(filter_ratings(items, kFluencyAdequacy, -1e9).size() == 50);
    const std::vector<std::string> drop{"3", "7", "nope"};
    const auto kept = filter_ratings(items, kFluencyAdequacy, -1e9, drop);
    CHECK(kept.size() == 48);
    for (const auto& item : kept) CHECK((item.item_id != "3" && item.item_id != "7"));
  }
  SUBCASE("exclusion happens after the statistics") {
    std::vector<RatedItem> items{rated("a", 0, 10.0, 10.0), rated("b", 0, 0.0, 0.0), rated("c", 0, 0.0, 0.0)};
    const std::vector<std::string> drop{"a"};
    // With "a" in the statistics nothing else clears the bar.
    CHECK(filter_ratings(items, kFluencyAdequacy, 0.0, drop).empty());
  }
  SUBCASE("subset, single pass") {
    Rng rng(10);
    const auto items = bivariate_items(rng, 400, 0.5);
    const auto once = filter_ratings(items, kFluencyAdequacy, 0.3);
    const auto twice = filter_ratings(once, kFluencyAdequacy, 0.3);
    CHECK(once.size() < items.size());
    CHECK(twice.size() < once.size());
    for (const auto& item : once)
      CHECK(std::any_of(items.begin(), items.end(), [&](const RatedItem& i) { return i.item_id == item.item_id; }));
  }
  SUBCASE("missing dimension names the item") {
    std::vector<RatedItem> items{rated("ok", 1, 1.0, 1.0), rated("bad-7", 1, 1.0, std::nullopt)};
    CHECK_THROWS_WITH_AS(filter_ratings(items, kFluencyAdequacy, 0.3), doctest::Contains("bad-7"), ValidationError);
  }
  SUBCASE("independent normals keep about P(Z >= 0.3)^2") {
    const double tail = 0.5 * std::erfc(0.3 / std::numbers::sqrt2);
    Rng rng(11);
    double total = 0.0;
    for (int rep = 0; rep < 20; ++rep)
      total += static_cast<double>(filter_ratings(bivariate_items(rng, 1000, 0.0), kFluencyAdequacy, 0.3).size()) / 1000;
    CHECK(total / 20 == doctest::Approx(tail * tail).epsilon(0.05));
  }
}

TEST_CASE("correlate_metrics") {
  Rng rng(12);
  std::vector<RatedItem> items;
  for (int i = 0; i < 100; ++i) {
    auto item = rated("i" + std::to_string(i), rng.normal(50, 10), std::nullopt, std::nullopt);
    item.metric_scores["self"] = item.simplicity;
    item.metric_scores["noisy"] = item.simplicity + rng.normal(0, 10);
    item.metric_scores["neg"] = -item.simplicity + rng.normal(0, 1);
    item.metric_scores["cube"] = std::pow(item.simplicity, 3);
    items.push_back(item);
  }
  const auto rows = correlate_metrics(items);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].metric == "self");
  CHECK(rows[0].abs_r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rows[0].p_value < 1e-12);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i - 1].abs_r >= rows[i].abs_r);
  for (const auto& row : rows) {
    CHECK(row.n == 100);
    CHECK(row.abs_r == std::abs(row.r));
    if (row.metric == "neg") CHECK(row.r < 0);
  }

  SUBCASE("noise is not significant") {
    std::vector<double> ps;
    for (std::uint64_t seed = 1; seed <= 21; ++seed) {
      Rng noise(seed);
      auto copy = items;
      for (auto& item : copy) item.metric_scores = {{"noise", noise.normal()}};
      ps.push_back(correlate_metrics(copy)[0].p_value);
    }
    std::nth_element(ps.begin(), ps.begin() + 10, ps.end());
    CHECK(ps[10] > 0.05);
  }
  SUBCASE("incomplete column names metric and item") {
    auto copy = items;
    copy[17].metric_scores["noisy"].reset();
    CHECK_THROWS_WITH_AS(correlate_metrics(copy), doctest::Contains("noisy"), ValidationError);
    CHECK_THROWS_WITH_AS(correlate_metrics(copy), doctest::Contains("i17"), ValidationError);
    copy = items;
    copy[3].metric_scores.erase("cube");
    CHECK_THROWS_WITH_AS(correlate_metrics(copy), doctest::Contains("i3"), ValidationError);
  }
  SUBCASE("too few items") {
    CHECK_THROWS_AS(correlate_metrics({items[0], items[1]}), ValidationError);
  }
}

TEST_CASE("distribution_summary") {
  const auto h = distribution_summary(Vec{0, 0, 1, 1}, 1.0);
  CHECK(h.counts == std::map<std::int64_t, std::size_t>{{0, 2}, {1, 2}});
  CHECK(h.entropy_nats == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(h.total == 4);

  const auto point = distribution_summary(Vec{2.37}, 0.1);
  CHECK(point.counts.size() == 1);
  CHECK(point.entropy_nats == 0.0);

  const auto quantized = distribution_summary(Vec{0, 1, 2, 3, 4, 0, 1, 2, 3, 4}, 0.1);
  CHECK(quantized.counts.size() == 5);
  CHECK(quantized.lower_edge(quantized.counts.rbegin()->first) == doctest::Approx(4.0));
  CHECK(quantized.entropy_nats == doctest::Approx(std::log(5.0)).epsilon(1e-14));

  // 0.3 / 0.1 is 2.9999999999999996 in binary; it still belongs to bin 3.
  CHECK(distribution_summary(Vec{0.3}, 0.1).counts.begin()->first == 3);
  CHECK(distribution_summary(Vec{-0.05}, 0.1).counts.begin()->first == -1);

  Rng rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    Vec values;
    const std::size_t n = 1 + rng.below(200);
    for (std::size_t i = 0; i < n; ++i) values.push_back(rng.normal(2, 1.5));
    const auto hist = distribution_summary(values, 0.05 + rng.uniform());
    std::size_t sum = 0;
    for (const auto& [bin, count] : hist.counts) sum += count;
    CHECK(sum == n);
    CHECK(hist.entropy_nats <= std::log(static_cast<double>(hist.counts.size())) + 1e-12);
  }

  CHECK_THROWS_AS(distribution_summary(Vec{}, 0.1), ValidationError);
  CHECK_THROWS_AS(distribution_summary(Vec{1.0}, 0.0), ValidationError);
}
