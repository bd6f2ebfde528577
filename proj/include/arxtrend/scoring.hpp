#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "arxtrend/corpus.hpp"
#include "arxtrend/error.hpp"

namespace arxtrend {

enum class StdMode { Population, Sample };

struct ScoringConfig {
  int half_width_days = 10;
  std::uint32_t min_citations = 4;
  StdMode std_mode = StdMode::Population;
  bool include_self = true;

  void validate() const {
    if (half_width_days < 0) throw UserError("window half-width must be >= 0 days");
  }
};

/// A paper's normalized citation score and the cohort statistics behind it.
/// z_score == (citation_count - window_mean) / window_std.
struct ScoredPaper {
  std::string paper_id;
  std::string title;
  double z_score = 0;
  std::size_t window_count = 0;
  double window_mean = 0;
  double window_std = 0;
  std::uint32_t citation_count = 0;

  friend bool operator==(const ScoredPaper&, const ScoredPaper&) = default;
};

enum class ExclusionReason { NoCitationData, BelowMinCitations, DegenerateWindow };

inline std::string_view to_string(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::NoCitationData: return "no-citation-data";
    case ExclusionReason::BelowMinCitations: return "below-min-citations";
    case ExclusionReason::DegenerateWindow: return "degenerate-window";
  }
  return "unknown";
}

struct Exclusion {
  std::string paper_id;
  ExclusionReason reason{};

  friend bool operator==(const Exclusion&, const Exclusion&) = default;
};

struct ScoreResult {
  std::vector<ScoredPaper> scored;  // z_score descending, then paper_id ascending
  std::vector<Exclusion> exclusions;  // paper_id order
};

/// Descending z-score, ties by ascending paper_id.
inline bool score_order(const ScoredPaper& a, const ScoredPaper& b) {
  if (a.z_score != b.z_score) return a.z_score > b.z_score;
  return a.paper_id < b.paper_id;
}

/// Papers with citation data submitted within ±half_width_days of the
/// anchor (inclusive). The anchor itself is a member iff include_self.
inline std::vector<std::reference_wrapper<const PaperRecord>> window_members(
    const Corpus& corpus, const PaperRecord& anchor, const ScoringConfig& cfg) {
  std::vector<std::reference_wrapper<const PaperRecord>> out;
  for (const auto& p : corpus.records()) {
    if (!p.has_citations()) continue;
    if (p.paper_id == anchor.paper_id && !cfg.include_self) continue;
    long diff = p.submitted_date - anchor.submitted_date;
    if (diff >= -cfg.half_width_days && diff <= cfg.half_width_days) out.emplace_back(p);
  }
  return out;
}

/// Standard score of `anchor` against `window`. Returns nullopt when the
/// window has zero spread, or fewer than two members in sample mode.
inline std::optional<double> z_score(double anchor, std::span<const double> window, StdMode mode) {
  if (window.empty()) throw std::invalid_argument("z_score: empty window");
  auto [lo, hi] = std::minmax_element(window.begin(), window.end());
  if (*lo == *hi) return std::nullopt;
  if (mode == StdMode::Sample && window.size() < 2) return std::nullopt;

  double n = static_cast<double>(window.size());
  double mean = 0;
  for (double x : window) mean += x;
  mean /= n;
  double ss = 0;
  for (double x : window) ss += (x - mean) * (x - mean);
  double var = ss / (mode == StdMode::Population ? n : n - 1);
  double sd = std::sqrt(var);
  if (!(sd > 0)) return std::nullopt;
  return (anchor - mean) / sd;
}

/// Scores every eligible paper against its own date window.
///
/// Window statistics use every paper with citation data; min_citations only
/// decides which papers receive a score. Each corpus paper ends up either
/// in `scored` or in `exclusions`, never both.
inline ScoreResult score_corpus(const Corpus& corpus, const ScoringConfig& cfg) {
  cfg.validate();

  struct Cited {
    long day;
    std::uint32_t count;
  };
  std::vector<Cited> cited;
  for (const auto& p : corpus.records()) {
    if (p.has_citations()) cited.push_back({p.submitted_date.days_since_epoch(), *p.citation_count});
  }
  if (cited.empty()) throw UserError("corpus has no papers with citation data");
  std::sort(cited.begin(), cited.end(), [](const Cited& a, const Cited& b) { return a.day < b.day; });

  // Integer prefix sums keep window moments exact; the variance numerator
  // n*Σx² - (Σx)² is zero exactly when the window has no spread.
  using wide = __int128;
  std::vector<wide> sum(cited.size() + 1, 0), sumsq(cited.size() + 1, 0);
  for (std::size_t i = 0; i < cited.size(); ++i) {
    sum[i + 1] = sum[i] + cited[i].count;
    sumsq[i + 1] = sumsq[i] + static_cast<wide>(cited[i].count) * cited[i].count;
  }
  auto first_at_or_after = [&](long day) {
    return static_cast<std::size_t>(
        std::lower_bound(cited.begin(), cited.end(), day, [](const Cited& c, long d) { return c.day < d; }) -
        cited.begin());
  };

  ScoreResult result;
  for (const auto& p : corpus.records()) {
    if (!p.has_citations()) {
      result.exclusions.push_back({p.paper_id, ExclusionReason::NoCitationData});
      continue;
    }
    const std::uint32_t c = *p.citation_count;
    if (c < cfg.min_citations) {
      result.exclusions.push_back({p.paper_id, ExclusionReason::BelowMinCitations});
      continue;
    }
    long day = p.submitted_date.days_since_epoch();
    std::size_t lo = first_at_or_after(day - cfg.half_width_days);
    std::size_t hi = first_at_or_after(day + cfg.half_width_days + 1);
    wide n = static_cast<wide>(hi - lo);
    wide s = sum[hi] - sum[lo];
    wide sq = sumsq[hi] - sumsq[lo];
    if (!cfg.include_self) {
      n -= 1;
      s -= c;
      sq -= static_cast<wide>(c) * c;
    }
    wide spread = n * sq - s * s;
    bool degenerate = n == 0 || spread == 0 || (cfg.std_mode == StdMode::Sample && n < 2);
    if (degenerate) {
      result.exclusions.push_back({p.paper_id, ExclusionReason::DegenerateWindow});
      continue;
    }
    double nd = static_cast<double>(n);
    double mean = static_cast<double>(s) / nd;
    double denom = cfg.std_mode == StdMode::Population ? nd * nd : nd * (nd - 1);
    double sd = std::sqrt(static_cast<double>(spread) / denom);
    result.scored.push_back({p.paper_id, p.title, (c - mean) / sd, static_cast<std::size_t>(n), mean, sd, c});
  }
  std::sort(result.scored.begin(), result.scored.end(), score_order);
  return result;
}

}  // namespace arxtrend
