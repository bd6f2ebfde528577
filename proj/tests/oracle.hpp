#pragma once
// Test-only reference implementations and random generators. Nothing here
// calls into scoring.hpp; windows and moments are recomputed from scratch.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "arxtrend/annotate.hpp"
#include "arxtrend/corpus.hpp"

namespace oracle {

struct Expected {
  bool scored = false;
  std::string reason;  // "no-citation-data" | "below-min-citations" | "degenerate-window"
  double z = 0;
  std::size_t n = 0;
  double mean = 0;
  double sd = 0;
};

struct Params {
  int half_width = 10;
  std::uint32_t min_citations = 4;
  bool sample = false;
  bool include_self = true;
};

// O(n^2): for every paper, scan the whole corpus for its cohort and compute
// two-pass moments in long double.
inline std::map<std::string, Expected> brute_force(const arxtrend::Corpus& corpus, const Params& p) {
  std::map<std::string, Expected> out;
  const auto& recs = corpus.records();
  for (const auto& a : recs) {
    Expected e;
    if (!a.citation_count) {
      e.reason = "no-citation-data";
    } else if (*a.citation_count < p.min_citations) {
      e.reason = "below-min-citations";
    } else {
      std::vector<long double> xs;
      for (const auto& b : recs) {
        if (!b.citation_count) continue;
        if (&a == &b && !p.include_self) continue;
        long d = std::labs(b.submitted_date.days_since_epoch() - a.submitted_date.days_since_epoch());
        if (d <= p.half_width) xs.push_back(*b.citation_count);
      }
      long double mean = 0;
      for (auto x : xs) mean += x;
      if (!xs.empty()) mean /= xs.size();
      long double ss = 0;
      for (auto x : xs) ss += (x - mean) * (x - mean);
      bool degenerate = xs.empty() || ss == 0 || (p.sample && xs.size() < 2);
      if (degenerate) {
        e.reason = "degenerate-window";
      } else {
        long double var = ss / (p.sample ? xs.size() - 1 : xs.size());
        long double sd = std::sqrt(var);
        e.scored = true;
        e.n = xs.size();
        e.mean = static_cast<double>(mean);
        e.sd = static_cast<double>(sd);
        e.z = static_cast<double>((*a.citation_count - mean) / sd);
      }
    }
    out[a.paper_id] = e;
  }
  return out;
}

struct CorpusShape {
  std::size_t max_papers = 500;
  std::uint32_t max_count = 300;
  int max_span_days = 600;
  double citation_prob = 0.9;
};

inline arxtrend::Corpus random_corpus(std::mt19937_64& rng, const CorpusShape& shape = {},
                                      arxtrend::Field field = arxtrend::Field::CsCl) {
  std::uniform_int_distribution<std::size_t> size_dist(1, shape.max_papers);
  std::uniform_int_distribution<int> span_dist(0, shape.max_span_days);
  std::uniform_int_distribution<std::uint32_t> count_dist(0, shape.max_count);
  std::bernoulli_distribution cited(shape.citation_prob);
  const arxtrend::Date start{2017, 6, 1};

  std::size_t n = size_dist(rng);
  int span = span_dist(rng);
  std::uniform_int_distribution<int> day_dist(0, span);
  arxtrend::Corpus c(field);
  for (std::size_t i = 0; i < n; ++i) {
    arxtrend::PaperRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "p%05zu", i);
    r.paper_id = id;
    r.title = std::string("Paper ") + id;
    r.field = field;
    r.submitted_date = start.plus_days(day_dist(rng));
    if (cited(rng)) {
      r.citation_count = count_dist(rng);
      r.citation_asof = arxtrend::Date{2018, 12, 31};
    }
    c.upsert(std::move(r));
  }
  return c;
}

inline Params random_params(std::mt19937_64& rng) {
  Params p;
  p.half_width = std::uniform_int_distribution<int>(0, 20)(rng);
  p.min_citations = std::uniform_int_distribution<std::uint32_t>(0, 10)(rng);
  p.sample = std::bernoulli_distribution(0.5)(rng);
  p.include_self = std::bernoulli_distribution(0.5)(rng);
  return p;
}

// Annotated pairs with labels drawn from a small alphabet; each aspect is
// missing with probability `missing_prob`.
inline std::vector<arxtrend::AnnotatedPaper> random_pairs(std::mt19937_64& rng, std::size_t max_pairs = 120,
                                                          double missing_prob = 0.15) {
  static const std::vector<std::string> labels{"Generation", "Parsing", "Rest", "Speech", "GAN", "Data", "RL"};
  std::uniform_int_distribution<std::size_t> n_dist(0, max_pairs);
  std::uniform_int_distribution<std::size_t> label_dist(0, labels.size() - 1);
  std::uniform_real_distribution<double> z_dist(-3.0, 15.0);
  std::bernoulli_distribution missing(missing_prob);
  std::vector<arxtrend::AnnotatedPaper> out;
  std::size_t n = n_dist(rng);
  for (std::size_t i = 0; i < n; ++i) {
    arxtrend::AnnotatedPaper p;
    p.paper.paper_id = "a" + std::to_string(i);
    p.paper.z_score = z_dist(rng);
    p.annotation.paper_id = p.paper.paper_id;
    for (auto a : arxtrend::kAspects) {
      if (!missing(rng)) p.annotation.label(a) = labels[label_dist(rng)];
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace oracle
