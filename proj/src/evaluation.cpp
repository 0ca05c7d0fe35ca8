#include "simeval/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "simeval/error.hpp"

namespace simeval {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw ValidationError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                          std::to_string(b) + ")");
  if (a == 0) throw ValidationError(std::string(what) + ": empty input");
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

double rating(const RatedItem& item, RatingDim dim) {
  switch (dim) {
    case RatingDim::simplicity:
      return item.simplicity;
    case RatingDim::fluency:
      if (!item.fluency) throw ValidationError("item " + item.item_id + " has no fluency rating");
      return *item.fluency;
    case RatingDim::adequacy:
      if (!item.adequacy) throw ValidationError("item " + item.item_id + " has no adequacy rating");
      return *item.adequacy;
  }
  return 0.0;
}

}  // namespace

double mae(std::span<const double> predictions, std::span<const double> labels) {
  check_lengths(predictions.size(), labels.size(), "mae");
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) total += std::abs(predictions[i] - labels[i]);
  return total / static_cast<double>(predictions.size());
}

double doc_mae(std::span<const double> predictions, std::span<const std::string> doc_ids,
               const std::map<std::string, int>& doc_levels) {
  check_lengths(predictions.size(), doc_ids.size(), "doc_mae");
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!doc_levels.contains(doc_ids[i])) throw ValidationError("no level for document " + doc_ids[i]);
    auto& [sum, count] = sums[doc_ids[i]];
    sum += predictions[i];
    ++count;
  }
  double total = 0.0;
  for (const auto& [doc, level] : doc_levels) {
    auto it = sums.find(doc);
    if (it == sums.end()) throw ValidationError("document " + doc + " has no predictions");
    const auto& [sum, count] = it->second;
    total += std::abs(sum / static_cast<double>(count) - static_cast<double>(level));
  }
  return total / static_cast<double>(doc_levels.size());
}

int round_to_level(double prediction) {
  if (!std::isfinite(prediction)) throw ValidationError("non-finite prediction");
  return static_cast<int>(std::clamp(std::round(prediction), static_cast<double>(kMinLevel),
                                     static_cast<double>(kMaxLevel)));
}

double f1_rounded(std::span<const double> predictions, std::span<const int> labels) {
  check_lengths(predictions.size(), labels.size(), "f1_rounded");
  std::set<int> present;
  for (int gold : labels) {
    if (gold < kMinLevel || gold > kMaxLevel) throw ValidationError("gold label outside 0..4");
    present.insert(gold);
  }
  double total = 0.0;
  for (int c : present) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const bool predicted = round_to_level(predictions[i]) == c;
      const bool actual = labels[i] == c;
      tp += predicted && actual;
      fp += predicted && !actual;
      fn += !predicted && actual;
    }
    total += 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  }
  return total / static_cast<double>(present.size());
}

RegressionReport evaluate_regression(std::span<const double> predictions,
                                     const std::vector<SentenceRecord>& records) {
  check_lengths(predictions.size(), records.size(), "evaluate_regression");
  validate_documents(records);
  std::vector<double> labels;
  std::vector<int> levels;
  std::vector<std::string> doc_ids;
  std::map<std::string, int> doc_levels;
  for (const auto& r : records) {
    labels.push_back(static_cast<double>(r.level));
    levels.push_back(r.level);
    doc_ids.push_back(r.doc_id);
    doc_levels.emplace(r.doc_id, r.level);
  }
  RegressionReport report;
  report.mae = mae(predictions, labels);
  report.doc_mae = doc_mae(predictions, doc_ids, doc_levels);
  report.f1 = f1_rounded(predictions, levels);
  report.sentences = records.size();
  report.documents = doc_levels.size();
  return report;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw ValidationError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("incomplete beta needs x in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw ValidationError("degrees of freedom must be positive");
  if (std::isnan(t)) throw ValidationError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double p = regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
  return std::clamp(p, 0.0, 1.0);
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  if (x.size() < 3) throw ValidationError("pearson: need at least 3 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw ValidationError("undefined correlation: zero variance");

  PearsonResult result;
  result.n = x.size();
  result.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  // With t = r sqrt(dof / (1 - r^2)), dof / (dof + t^2) reduces to 1 - r^2.
  const double dof = n - 2.0;
  const double one_minus_r2 = (1.0 - result.r) * (1.0 + result.r);
  result.p_value = one_minus_r2 <= 0.0 ? 0.0
                                       : std::clamp(regularized_incomplete_beta(dof / 2.0, 0.5, one_minus_r2),
                                                    0.0, 1.0);
  return result;
}

std::vector<RatedItem> filter_ratings(const std::vector<RatedItem>& items,
                                      std::span<const RatingDim> dims, double z_threshold,
                                      std::span<const std::string> exclude_ids) {
  if (std::isnan(z_threshold)) throw ValidationError("z threshold is NaN");
  std::vector<double> cutoff;
  for (RatingDim dim : dims) {
    double mean = 0.0;
    for (const auto& item : items) mean += rating(item, dim);
    mean /= static_cast<double>(std::max<std::size_t>(items.size(), 1));
    double var = 0.0;
    for (const auto& item : items) var += (rating(item, dim) - mean) * (rating(item, dim) - mean);
    var /= static_cast<double>(std::max<std::size_t>(items.size(), 1));
    cutoff.push_back(mean + z_threshold * std::sqrt(var));
  }

  const std::set<std::string> excluded(exclude_ids.begin(), exclude_ids.end());
  std::vector<RatedItem> kept;
  for (const auto& item : items) {
    bool keep = true;
    for (std::size_t d = 0; d < dims.size() && keep; ++d) keep = rating(item, dims[d]) >= cutoff[d];
    if (keep && !excluded.contains(item.item_id)) kept.push_back(item);
  }
  return kept;
}

std::vector<CorrelationRow> correlate_metrics(const std::vector<RatedItem>& items, RatingDim target) {
  if (items.size() < 3)
    throw ValidationError("need at least 3 rated items, got " + std::to_string(items.size()));
  std::set<std::string> metrics;
  for (const auto& item : items)
    for (const auto& [name, value] : item.metric_scores) metrics.insert(name);

  std::vector<double> human;
  for (const auto& item : items) human.push_back(rating(item, target));

  std::vector<CorrelationRow> rows;
  for (const auto& metric : metrics) {
    std::vector<double> column;
    for (const auto& item : items) {
      auto it = item.metric_scores.find(metric);
      if (it == item.metric_scores.end() || !it->second)
        throw ValidationError("metric " + metric + " has no value for item " + item.item_id);
      if (!std::isfinite(*it->second))
        throw ValidationError("metric " + metric + " is not finite for item " + item.item_id);
      column.push_back(*it->second);
    }
    PearsonResult pr;
    try {
      pr = pearson(column, human);
    } catch (const ValidationError& e) {
      throw ValidationError("metric " + metric + ": " + e.what());
    }
    rows.push_back({metric, pr.r, std::abs(pr.r), pr.p_value, pr.n});
  }
  std::sort(rows.begin(), rows.end(), [](const CorrelationRow& a, const CorrelationRow& b) {
    if (a.abs_r != b.abs_r) return a.abs_r > b.abs_r;
    return a.metric < b.metric;
  });
  return rows;
}

std::string significance_marker(double p_value) {
  if (p_value < 0.001) return "**";
  if (p_value < 0.01) return "*";
  return "";
}

Histogram distribution_summary(std::span<const double> values, double bin_width) {
  if (values.empty()) throw ValidationError("histogram of an empty sample");
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw ValidationError("bin width must be positive");
  Histogram hist;
  hist.bin_width = bin_width;
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("non-finite value in histogram input");
    const auto bin = static_cast<std::int64_t>(std::floor(v / bin_width + 1e-9));
    ++hist.counts[bin];
  }
  hist.total = values.size();
  const auto n = static_cast<double>(hist.total);
  for (const auto& [bin, count] : hist.counts) {
    const double p = static_cast<double>(count) / n;
    hist.entropy_nats -= p * std::log(p);
  }
  return hist;
}

}  // namespace simeval
