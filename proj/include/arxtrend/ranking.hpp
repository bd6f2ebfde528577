#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arxtrend/error.hpp"
#include "arxtrend/scoring.hpp"

namespace arxtrend {

struct RankingConfig {
  std::size_t k = 100;
  // Papers below this count must have been filtered upstream; top_k refuses
  // input that violates it. 0 disables the check.
  std::uint32_t min_citations = 0;

  void validate() const {
    if (k < 1) throw UserError("top-k requires k >= 1");
  }
};

/// First min(k, |scored|) entries of an already ordered score list. Ties at
/// the cut are resolved by the incoming order, never by growing the list.
inline std::vector<ScoredPaper> top_k(std::span<const ScoredPaper> scored, const RankingConfig& cfg) {
  cfg.validate();
  for (const auto& s : scored) {
    if (s.citation_count < cfg.min_citations) {
      throw UserError("paper " + s.paper_id + " has " + std::to_string(s.citation_count) +
                      " citations, below the minimum of " + std::to_string(cfg.min_citations));
    }
  }
  auto n = std::min(cfg.k, scored.size());
  return {scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n)};
}

/// Restores score order on input that may come from an arbitrary source.
inline void sort_scored(std::vector<ScoredPaper>& scored) {
  std::stable_sort(scored.begin(), scored.end(), score_order);
}

}  // namespace arxtrend
