#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "arxtrend/corpus.hpp"
#include "arxtrend/date.hpp"
#include "arxtrend/error.hpp"
#include "arxtrend/http.hpp"

namespace arxtrend {

enum class HarvestMode { Live, Replay };

struct HarvestConfig {
  std::string metadata_endpoint = "http://export.arxiv.org/listing";
  std::string citation_endpoint = "https://api.semanticscholar.org/graph/v1/paper";
  Date date_from{2017, 6, 1};
  Date date_to{2018, 12, 31};
  Field field = Field::CsCl;
  double max_requests_per_second = 1.0;
  int max_retries = 3;
  std::filesystem::path cache_dir = "cache";
  HarvestMode mode = HarvestMode::Live;

  // Snapshot date for citation lookups. LIVE defaults to today; REPLAY
  // defaults to the newest cached snapshot per paper.
  std::optional<Date> asof;
  std::optional<std::string> api_key;
  std::size_t max_in_flight = 4;
  std::chrono::milliseconds backoff_base{1000};

  void validate() const {
    if (date_from > date_to) throw UserError("harvest date range is empty: from > to");
    if (!(max_requests_per_second > 0)) throw UserError("rate must be > 0");
    if (max_retries < 0) throw UserError("retries must be >= 0");
    if (max_in_flight == 0) throw UserError("max_in_flight must be >= 1");
  }
};

struct CitationSnapshot {
  std::string paper_id;
  std::uint32_t citation_count = 0;
  Date asof;

  friend bool operator==(const CitationSnapshot&, const CitationSnapshot&) = default;
};

using SnapshotMap = std::map<std::string, CitationSnapshot>;

struct PageIssue {
  std::size_t page = 0;
  std::string detail;
};

struct MetadataResult {
  Corpus corpus;
  std::size_t pages = 0;
  std::vector<PageIssue> issues;
  LoadReport records;  // per-record skips; `line` holds the page number
};

struct CitationMiss {
  std::string paper_id;
  std::string reason;
};

struct CitationResult {
  SnapshotMap snapshots;
  std::vector<CitationMiss> misses;
};

struct AttachResult {
  Corpus corpus;
  std::vector<std::string> unknown_ids;
};

namespace detail {

inline std::string percent_encode(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

inline std::optional<std::string> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Write-temp-then-rename so a crash never leaves a half-written cache entry.
inline void write_file_atomic(const std::filesystem::path& p, std::string_view bytes) {
  std::error_code ec;
  std::filesystem::create_directories(p.parent_path(), ec);
  std::ostringstream tmp_name;
  tmp_name << p.filename().string() << ".tmp-" << std::this_thread::get_id();
  auto tmp = p.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw EnvironmentError("cannot write cache file " + tmp.string());
  }
  std::filesystem::rename(tmp, p, ec);
  if (ec) throw EnvironmentError("cannot move cache file into place: " + p.string() + ": " + ec.message());
}

// '/' occurs in old-style Arxiv ids (cs/0112017) and cannot appear in a file name.
inline std::string cache_safe(std::string_view id) {
  std::string out(id);
  std::replace(out.begin(), out.end(), '/', '_');
  return out;
}

}  // namespace detail

inline std::filesystem::path metadata_page_path(const std::filesystem::path& cache_dir, std::size_t page) {
  return cache_dir / "metadata" / ("page-" + std::to_string(page));
}

inline std::filesystem::path citation_cache_path(const std::filesystem::path& cache_dir,
                                                 std::string_view paper_id, Date asof) {
  return cache_dir / "citations" / (detail::cache_safe(paper_id) + "@" + asof.to_string());
}

inline std::string metadata_url(const HarvestConfig& cfg, const std::optional<std::string>& token) {
  std::string url = cfg.metadata_endpoint + "?category=" + std::string(to_string(cfg.field)) +
                    "&from=" + cfg.date_from.to_string() + "&until=" + cfg.date_to.to_string();
  if (token) url += "&resumptionToken=" + detail::percent_encode(*token);
  return url;
}

inline std::string citation_url(const HarvestConfig& cfg, std::string_view paper_id) {
  return cfg.citation_endpoint + "/arXiv:" + std::string(paper_id) + "?fields=citationCount";
}

/// Follows the paged listing for cfg.field until no resumption token is
/// returned. Pages are numbered from 1. Every fetched page is written to
/// the cache before it is parsed; pages already in the cache are reused,
/// which is also how an interrupted LIVE run resumes. Records outside
/// [date_from, date_to] are dropped.
///
/// Page format: {"records": [{"id", "title", "abstract", "authors",
/// "submitted", ...}], "resumptionToken": string|null}.
inline MetadataResult harvest_metadata(const HarvestConfig& cfg, http::Transport& transport,
                                       http::Clock& clock) {
  cfg.validate();
  http::RateLimiter limiter(cfg.max_requests_per_second, clock);
  http::RetryPolicy retry{cfg.max_retries, cfg.backoff_base};

  MetadataResult result;
  std::vector<detail::NumberedLine> kept;
  LoadOptions record_opts;
  record_opts.latest = std::max(record_opts.latest, cfg.date_to);
  std::optional<std::string> token;

  for (std::size_t page = 1;; ++page) {
    auto path = metadata_page_path(cfg.cache_dir, page);
    auto body = detail::read_file(path);
    if (!body) {
      if (cfg.mode == HarvestMode::Replay) {
        if (page == 1) throw EnvironmentError("no recorded metadata pages under " + path.parent_path().string());
        throw EnvironmentError("recorded metadata is incomplete: " + path.string() + " missing");
      }
      auto resp = http::get_with_retry(transport, limiter, clock, retry, metadata_url(cfg, token));
      if (resp.status != 200) {
        throw EnvironmentError("metadata endpoint returned HTTP " + std::to_string(resp.status) +
                               " for page " + std::to_string(page));
      }
      detail::write_file_atomic(path, resp.body);
      body = std::move(resp.body);
    }
    result.pages = page;

    auto j = nlohmann::json::parse(*body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("records") || !j["records"].is_array()) {
      // Without a parseable page there is no resumption token to follow.
      result.issues.push_back({page, "malformed response page; pagination stopped"});
      break;
    }
    for (auto rec : j["records"]) {
      if (rec.is_object() && !rec.contains("field")) rec["field"] = to_string(cfg.field);
      auto parsed = detail::parse_record(rec, record_opts);
      if (auto* fail = std::get_if<1>(&parsed)) {
        result.records.skipped.push_back({page, fail->first, fail->second});
        continue;
      }
      auto& ok = std::get<0>(parsed);
      if (ok.record.field != cfg.field) {
        result.records.skipped.push_back({page, SkipReason::UnknownField,
                                          "record " + ok.record.paper_id + " is not in " +
                                              std::string(to_string(cfg.field))});
        continue;
      }
      if (ok.record.submitted_date < cfg.date_from || ok.record.submitted_date > cfg.date_to) continue;
      kept.push_back({std::move(ok), page});
    }
    const auto& next = j.contains("resumptionToken") ? j["resumptionToken"] : nlohmann::json();
    if (!next.is_string() || next.get<std::string>().empty()) break;
    token = next.get<std::string>();
  }
  result.corpus = detail::assemble(std::move(kept), cfg.field, result.records);
  return result;
}

namespace detail {

inline std::optional<Date> newest_cached_asof(const std::filesystem::path& cache_dir, std::string_view paper_id) {
  auto dir = cache_dir / "citations";
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return std::nullopt;
  std::string prefix = cache_safe(paper_id) + "@";
  std::optional<Date> best;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    auto name = entry.path().filename().string();
    if (name.size() != prefix.size() + 10 || name.compare(0, prefix.size(), prefix) != 0) continue;
    if (auto d = Date::parse(std::string_view(name).substr(prefix.size())); d && (!best || *d > *best)) best = d;
  }
  return best;
}

// Semantic-Scholar-style body: {"citationCount": N, ...}.
inline std::optional<std::uint32_t> parse_citation_body(std::string_view body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("citationCount")) return std::nullopt;
  const auto& c = j["citationCount"];
  if (!c.is_number_unsigned() || c.get<std::uint64_t>() > UINT32_MAX) return std::nullopt;
  return c.get<std::uint32_t>();
}

}  // namespace detail

/// Looks up one citation count per paper. Per-paper failures land in the
/// miss list; an endpoint that keeps failing after retries is fatal.
/// Lookups run on up to max_in_flight threads sharing one rate limiter.
inline CitationResult fetch_citations(const Corpus& corpus, const HarvestConfig& cfg,
                                      http::Transport& transport, http::Clock& clock) {
  cfg.validate();
  if (corpus.empty()) throw UserError("cannot fetch citations for an empty corpus");

  http::RateLimiter limiter(cfg.max_requests_per_second, clock);
  http::RetryPolicy retry{cfg.max_retries, cfg.backoff_base};
  http::Headers headers;
  if (cfg.api_key && !cfg.api_key->empty()) headers.emplace("Authorization", "Bearer " + *cfg.api_key);
  const Date live_asof = cfg.asof.value_or(Date::today());

  const auto& records = corpus.records();
  struct Outcome {
    std::optional<CitationSnapshot> snapshot;
    std::string miss;
  };
  std::vector<Outcome> outcomes(records.size());

  auto lookup = [&](const PaperRecord& paper) -> Outcome {
    std::optional<Date> asof = cfg.mode == HarvestMode::Live
                                   ? std::optional<Date>(live_asof)
                                   : (cfg.asof ? cfg.asof : detail::newest_cached_asof(cfg.cache_dir, paper.paper_id));
    if (!asof) return {std::nullopt, "no recorded response"};
    auto path = citation_cache_path(cfg.cache_dir, paper.paper_id, *asof);
    auto body = detail::read_file(path);
    if (!body) {
      if (cfg.mode == HarvestMode::Replay) return {std::nullopt, "no recorded response"};
      auto resp = http::get_with_retry(transport, limiter, clock, retry, citation_url(cfg, paper.paper_id), headers);
      if (resp.status == 404) return {std::nullopt, "not found"};
      if (resp.status != 200) return {std::nullopt, "HTTP " + std::to_string(resp.status)};
      detail::write_file_atomic(path, resp.body);
      body = std::move(resp.body);
    }
    auto count = detail::parse_citation_body(*body);
    if (!count) return {std::nullopt, "malformed response"};
    return {CitationSnapshot{paper.paper_id, *count, *asof}, {}};
  };

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i; !failed && (i = next.fetch_add(1)) < records.size();) {
      try {
        outcomes[i] = lookup(records[i]);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };
  std::size_t threads = std::min(cfg.max_in_flight, records.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  CitationResult result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (outcomes[i].snapshot) {
      result.snapshots.emplace(records[i].paper_id, std::move(*outcomes[i].snapshot));
    } else {
      result.misses.push_back({records[i].paper_id, std::move(outcomes[i].miss)});
    }
  }
  return result;
}

/// Copies the corpus, filling citation fields for every record that has a
/// snapshot. Snapshot ids not in the corpus are reported, not applied.
inline AttachResult attach_citations(const Corpus& corpus, const SnapshotMap& snapshots) {
  AttachResult result{Corpus(corpus.field()), {}};
  for (auto rec : corpus.records()) {
    if (auto it = snapshots.find(rec.paper_id); it != snapshots.end()) {
      rec.citation_count = it->second.citation_count;
      rec.citation_asof = it->second.asof;
    }
    result.corpus.upsert(std::move(rec));
  }
  for (const auto& [id, snap] : snapshots) {
    if (!corpus.find(id)) result.unknown_ids.push_back(id);
  }
  return result;
}

/// One JSON object per line: {"id", "citations", "asof"}, in id order.
inline void write_snapshots(const SnapshotMap& snapshots, std::ostream& out) {
  for (const auto& [id, s] : snapshots) {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["citations"] = s.citation_count;
    j["asof"] = s.asof.to_string();
    out << j.dump() << '\n';
  }
}

}  // namespace arxtrend
