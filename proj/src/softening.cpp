#include "simeval/softening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "simeval/error.hpp"
#include "simeval/readability.hpp"

namespace simeval {

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw ValidationError("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw ValidationError("percentile must be within [0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(rank));
  if (below + 1 >= sorted.size()) return sorted.back();
  const double frac = rank - static_cast<double>(below);
  return sorted[below] + frac * (sorted[below + 1] - sorted[below]);
}

LevelGroup filter_range(const LevelGroup& group, double min_fkgl, double max_fkgl) {
  if (group.members.empty())
    throw ValidationError("level " + std::to_string(group.level) + " group is empty");
  LevelGroup kept{group.level, {}};
  for (const auto& m : group.members) {
    if (m.raw_fkgl >= min_fkgl && m.raw_fkgl <= max_fkgl) kept.members.push_back(m);
  }
  return kept.members.empty() ? group : kept;
}

LevelGroup filter_percentiles(const LevelGroup& group, double lo, double hi) {
  if (group.members.empty())
    throw ValidationError("level " + std::to_string(group.level) + " group is empty");
  if (!(lo >= 0.0 && lo <= hi && hi <= 100.0))
    throw ValidationError("percentile bounds must satisfy 0 <= lo <= hi <= 100");
  std::vector<double> values;
  values.reserve(group.members.size());
  for (const auto& m : group.members) values.push_back(m.raw_fkgl);
  return filter_range(group, percentile(values, lo), percentile(values, hi));
}

std::vector<double> rescale_group(const LevelGroup& group) {
  std::vector<double> negated;
  negated.reserve(group.members.size());
  for (const auto& m : group.members) negated.push_back(-m.raw_fkgl);
  if (negated.empty()) return negated;

  const auto [lo_it, hi_it] = std::minmax_element(negated.begin(), negated.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;
  for (double& f : negated) f = span > 0.0 ? 2.0 * (f - lo) / span : 1.0;
  return negated;
}

std::vector<double> soften_group(int level, std::span<const double> rescaled) {
  if (rescaled.empty()) return {};
  const double mean =
      std::accumulate(rescaled.begin(), rescaled.end(), 0.0) / static_cast<double>(rescaled.size());
  std::vector<double> labels;
  labels.reserve(rescaled.size());
  for (double f : rescaled) labels.push_back(f - mean + static_cast<double>(level));
  return labels;
}

std::array<LevelGroup, kLevelCount> group_by_level(const std::vector<SentenceRecord>& records,
                                                   std::span<const double> fkgl) {
  if (fkgl.size() != records.size()) throw ValidationError("fkgl values not aligned with records");
  std::array<LevelGroup, kLevelCount> groups;
  for (int l = kMinLevel; l <= kMaxLevel; ++l) groups[l - kMinLevel].level = l;
  for (std::size_t i = 0; i < records.size(); ++i) {
    validate(records[i]);
    groups[records[i].level - kMinLevel].members.push_back({i, fkgl[i]});
  }
  return groups;
}

SofteningResult soften_labels(const std::vector<SentenceRecord>& records,
                              const SofteningOptions& options) {
  std::vector<double> raw;
  raw.reserve(records.size());
  for (const auto& r : records) raw.push_back(fkgl(r.text));

  double global_lo = 0.0;
  double global_hi = 0.0;
  if (options.filter && options.scope == FilterScope::global && !raw.empty()) {
    global_lo = percentile(raw, options.lo);
    global_hi = percentile(raw, options.hi);
  }

  std::vector<std::optional<double>> labels(records.size());
  SofteningResult result;
  for (const LevelGroup& group : group_by_level(records, raw)) {
    if (group.members.empty()) continue;
    LevelGroup kept = group;
    if (options.filter) {
      kept = options.scope == FilterScope::global ? filter_range(group, global_lo, global_hi)
                                                  : filter_percentiles(group, options.lo, options.hi);
    }
    const auto rescaled = rescale_group(kept);
    const auto soft = soften_group(kept.level, rescaled);
    for (std::size_t i = 0; i < kept.members.size(); ++i) labels[kept.members[i].index] = soft[i];

    LevelSummary summary;
    summary.level = group.level;
    summary.kept = kept.members.size();
    summary.excluded = group.members.size() - kept.members.size();
    summary.mean_rescaled = std::accumulate(rescaled.begin(), rescaled.end(), 0.0) /
                            static_cast<double>(rescaled.size());
    result.levels.push_back(summary);
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!labels[i]) continue;
    SentenceRecord r = records[i];
    r.soft_label = labels[i];
    result.records.push_back(std::move(r));
    result.fkgl.push_back(raw[i]);
  }
  return result;
}

}  // namespace simeval
