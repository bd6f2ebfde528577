#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "arxtrend/annotate.hpp"

namespace arxtrend {

/// Importance of one category: member count n, summed z-score s, mean
/// z-score m = s / n.
struct CategoryStats {
  std::string label;
  std::size_t n = 0;
  double s = 0;
  double m = 0;

  friend bool operator==(const CategoryStats&, const CategoryStats&) = default;
};

struct CategoryStatsResult {
  std::vector<CategoryStats> stats;  // n descending, then label ascending
  std::size_t missing = 0;           // pairs without a label for the aspect
};

struct DistributionRow {
  std::string label;
  std::size_t count = 0;
  double percentage = 0;  // exact, unrounded

  friend bool operator==(const DistributionRow&, const DistributionRow&) = default;
};

struct DistributionResult {
  std::vector<DistributionRow> rows;  // count descending, then label ascending
  std::size_t missing = 0;
};

enum class StatKey { N, S, M };

namespace detail {

inline std::map<std::string, std::vector<double>> group_by_label(std::span<const AnnotatedPaper> pairs, Aspect aspect,
                                                                 std::size_t& missing) {
  std::map<std::string, std::vector<double>> groups;
  missing = 0;
  for (const auto& p : pairs) {
    const auto& label = p.annotation.label(aspect);
    if (!label) {
      ++missing;
      continue;
    }
    groups[*label].push_back(p.paper.z_score);
  }
  return groups;
}

}  // namespace detail

inline CategoryStatsResult category_stats(std::span<const AnnotatedPaper> pairs, Aspect aspect) {
  CategoryStatsResult out;
  auto groups = detail::group_by_label(pairs, aspect, out.missing);
  for (auto& [label, zs] : groups) {
    // Summing in value order makes s independent of input order bit-for-bit.
    std::sort(zs.begin(), zs.end());
    double s = 0;
    for (double z : zs) s += z;
    out.stats.push_back({label, zs.size(), s, s / static_cast<double>(zs.size())});
  }
  std::stable_sort(out.stats.begin(), out.stats.end(),
                   [](const CategoryStats& a, const CategoryStats& b) { return a.n > b.n; });
  return out;
}

/// Labels ordered by `key` descending, ties by label ascending.
inline std::vector<std::string> rank_by(std::span<const CategoryStats> stats, StatKey key) {
  std::vector<const CategoryStats*> order;
  for (const auto& s : stats) order.push_back(&s);
  auto value = [key](const CategoryStats* c) {
    switch (key) {
      case StatKey::N: return static_cast<double>(c->n);
      case StatKey::S: return c->s;
      case StatKey::M: return c->m;
    }
    return 0.0;
  };
  std::sort(order.begin(), order.end(), [&](const CategoryStats* a, const CategoryStats* b) {
    if (value(a) != value(b)) return value(a) > value(b);
    return a->label < b->label;
  });
  std::vector<std::string> labels;
  for (const auto* c : order) labels.push_back(c->label);
  return labels;
}

inline DistributionResult distribution(std::span<const AnnotatedPaper> pairs, Aspect aspect) {
  DistributionResult out;
  auto groups = detail::group_by_label(pairs, aspect, out.missing);
  std::size_t total = pairs.size() - out.missing;
  for (const auto& [label, zs] : groups) {
    out.rows.push_back({label, zs.size(), 100.0 * static_cast<double>(zs.size()) / static_cast<double>(total)});
  }
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const DistributionRow& a, const DistributionRow& b) { return a.count > b.count; });
  return out;
}

}  // namespace arxtrend
