#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "arxtrend/date.hpp"
#include "arxtrend/error.hpp"

namespace arxtrend {

enum class Field { CsCl, CsLg };

inline std::string_view to_string(Field f) {
  return f == Field::CsCl ? "cs.CL" : "cs.LG";
}

inline std::optional<Field> parse_field(std::string_view s) {
  if (s == "cs.CL") return Field::CsCl;
  if (s == "cs.LG") return Field::CsLg;
  return std::nullopt;
}

struct PaperRecord {
  std::string paper_id;
  std::string title;
  std::string abstract;
  std::vector<std::string> authors;
  Field field = Field::CsCl;
  Date submitted_date;
  std::optional<std::uint32_t> citation_count;
  std::optional<Date> citation_asof;

  [[nodiscard]] bool has_citations() const { return citation_count.has_value(); }

  friend bool operator==(const PaperRecord&, const PaperRecord&) = default;
};

// Arxiv identifier split into its base and version suffix ("1810.04805v2" ->
// {"1810.04805", 2}). Unversioned identifiers have version 0.
struct ArxivId {
  std::string base;
  unsigned version = 0;

  static ArxivId parse(std::string_view id) {
    auto v = id.rfind('v');
    if (v == std::string_view::npos || v == 0 || v + 1 == id.size()) return {std::string(id), 0};
    if (id[v - 1] < '0' || id[v - 1] > '9') return {std::string(id), 0};
    unsigned version = 0;
    for (std::size_t i = v + 1; i < id.size(); ++i) {
      if (id[i] < '0' || id[i] > '9') return {std::string(id), 0};
      version = version * 10 + static_cast<unsigned>(id[i] - '0');
    }
    return {std::string(id.substr(0, v)), version};
  }
};

/// A single-field collection of papers, held in paper_id order.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(Field field) : field_(field) {}

  [[nodiscard]] Field field() const { return field_; }
  [[nodiscard]] const std::vector<PaperRecord>& records() const { return records_; }
  [[nodiscard]] std::size_t size() const { return records_.size(); }
  [[nodiscard]] bool empty() const { return records_.empty(); }

  [[nodiscard]] const PaperRecord* find(std::string_view paper_id) const {
    auto it = lower(paper_id);
    return it != records_.end() && it->paper_id == paper_id ? &*it : nullptr;
  }

  /// Inserts or replaces by paper_id. Throws UserError on a field mismatch.
  void upsert(PaperRecord record) {
    if (record.paper_id.empty()) throw UserError("paper record with empty id");
    if (record.field != field_) {
      throw UserError("record " + record.paper_id + " has field " +
                      std::string(to_string(record.field)) + " but corpus is " +
                      std::string(to_string(field_)));
    }
    auto it = lower(record.paper_id);
    if (it != records_.end() && it->paper_id == record.paper_id) {
      *it = std::move(record);
    } else {
      records_.insert(it, std::move(record));
    }
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<PaperRecord>::const_iterator lower(std::string_view id) const {
    return std::lower_bound(records_.begin(), records_.end(), id,
                            [](const PaperRecord& r, std::string_view k) { return r.paper_id < k; });
  }
  std::vector<PaperRecord>::iterator lower(std::string_view id) {
    return std::lower_bound(records_.begin(), records_.end(), id,
                            [](const PaperRecord& r, std::string_view k) { return r.paper_id < k; });
  }

  Field field_ = Field::CsCl;
  std::vector<PaperRecord> records_;
};

enum class SkipReason {
  MalformedJson,
  MissingKey,
  UnknownField,
  InvalidDate,
  DateOutOfRange,
  InvalidCitation,
  EmptyId,
  Duplicate,
};

inline std::string_view to_string(SkipReason r) {
  switch (r) {
    case SkipReason::MalformedJson: return "malformed-json";
    case SkipReason::MissingKey: return "missing-key";
    case SkipReason::UnknownField: return "unknown-field";
    case SkipReason::InvalidDate: return "malformed-date";
    case SkipReason::DateOutOfRange: return "date-out-of-range";
    case SkipReason::InvalidCitation: return "invalid-citation";
    case SkipReason::EmptyId: return "empty-id";
    case SkipReason::Duplicate: return "duplicate";
  }
  return "unknown";
}

struct SkippedLine {
  std::size_t line = 0;  // 1-based
  SkipReason reason{};
  std::string detail;
};

struct LoadReport {
  std::vector<SkippedLine> skipped;
  std::size_t versions_collapsed = 0;
};

struct LoadOptions {
  Date earliest{1991, 1, 1};
  Date latest = Date::today();
  std::optional<Field> expected_field;
};

struct LoadResult {
  Corpus corpus;
  LoadReport report;
};

namespace detail {

using ordered_json = nlohmann::ordered_json;

struct ParsedLine {
  PaperRecord record;
  unsigned version = 0;
  std::string canonical;  // re-serialized form, used as a deterministic tie-break
};

inline std::string serialize_record(const PaperRecord& r) {
  ordered_json j;
  j["id"] = r.paper_id;
  j["title"] = r.title;
  j["abstract"] = r.abstract;
  j["authors"] = r.authors;
  j["field"] = to_string(r.field);
  j["submitted"] = r.submitted_date.to_string();
  if (r.citation_count) j["citations"] = *r.citation_count;
  if (r.citation_asof) j["citations_asof"] = r.citation_asof->to_string();
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

using ParseOutcome = std::variant<ParsedLine, std::pair<SkipReason, std::string>>;

// Validates one record object; on failure returns the reason and detail.
inline ParseOutcome parse_record(const nlohmann::json& j, const LoadOptions& opts) {
  using Fail = std::pair<SkipReason, std::string>;
  if (!j.is_object()) return Fail{SkipReason::MalformedJson, "not a JSON object"};

  for (const char* key : {"id", "title", "abstract", "authors", "field", "submitted"}) {
    if (!j.contains(key)) return Fail{SkipReason::MissingKey, std::string("missing key '") + key + "'"};
  }
  if (!j["id"].is_string() || !j["title"].is_string() || !j["abstract"].is_string() ||
      !j["field"].is_string() || !j["submitted"].is_string() || !j["authors"].is_array()) {
    return Fail{SkipReason::MalformedJson, "wrong value type"};
  }
  for (const auto& a : j["authors"]) {
    if (!a.is_string()) return Fail{SkipReason::MalformedJson, "author is not a string"};
  }

  ParsedLine out;
  auto& r = out.record;
  auto id = ArxivId::parse(j["id"].get<std::string>());
  if (id.base.empty()) return Fail{SkipReason::EmptyId, "empty id"};
  r.paper_id = std::move(id.base);
  out.version = id.version;
  r.title = j["title"].get<std::string>();
  r.abstract = j["abstract"].get<std::string>();
  r.authors = j["authors"].get<std::vector<std::string>>();

  auto field = parse_field(j["field"].get<std::string>());
  if (!field) return Fail{SkipReason::UnknownField, "unknown field '" + j["field"].get<std::string>() + "'"};
  r.field = *field;

  auto submitted = Date::parse(j["submitted"].get<std::string>());
  if (!submitted) return Fail{SkipReason::InvalidDate, "invalid submitted date '" + j["submitted"].get<std::string>() + "'"};
  if (*submitted < opts.earliest || *submitted > opts.latest) {
    return Fail{SkipReason::DateOutOfRange, "submitted date " + submitted->to_string() + " out of range"};
  }
  r.submitted_date = *submitted;

  bool has_count = j.contains("citations") && !j["citations"].is_null();
  bool has_asof = j.contains("citations_asof") && !j["citations_asof"].is_null();
  if (has_count != has_asof) {
    return Fail{SkipReason::InvalidCitation, "citations and citations_asof must appear together"};
  }
  if (has_count) {
    const auto& c = j["citations"];
    // JSON parsing stores non-negative integers as unsigned.
    if (!c.is_number_unsigned() || c.get<std::uint64_t>() > UINT32_MAX) {
      return Fail{SkipReason::InvalidCitation, "citations must be a non-negative integer"};
    }
    if (!j["citations_asof"].is_string()) return Fail{SkipReason::InvalidDate, "citations_asof is not a string"};
    auto asof = Date::parse(j["citations_asof"].get<std::string>());
    if (!asof) return Fail{SkipReason::InvalidDate, "invalid citations_asof '" + j["citations_asof"].get<std::string>() + "'"};
    r.citation_count = c.get<std::uint32_t>();
    r.citation_asof = *asof;
  }
  out.canonical = serialize_record(r);
  return out;
}

inline ParseOutcome parse_record_line(std::string_view line, const LoadOptions& opts) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) return std::pair{SkipReason::MalformedJson, std::string("not a JSON object")};
  return parse_record(j, opts);
}

}  // namespace detail

namespace detail {

struct NumberedLine {
  ParsedLine parsed;
  std::size_t line;
};

// Collapses versions and duplicates. Ordering by (id, version desc,
// canonical form) makes the winner of every id group independent of the
// order records arrived in.
inline Corpus assemble(std::vector<NumberedLine> kept, Field field, LoadReport& report) {
  std::sort(kept.begin(), kept.end(), [](const NumberedLine& a, const NumberedLine& b) {
    if (a.parsed.record.paper_id != b.parsed.record.paper_id)
      return a.parsed.record.paper_id < b.parsed.record.paper_id;
    if (a.parsed.version != b.parsed.version) return a.parsed.version > b.parsed.version;
    if (a.parsed.canonical != b.parsed.canonical) return a.parsed.canonical < b.parsed.canonical;
    return a.line < b.line;
  });

  Corpus corpus(field);
  std::size_t winner_at = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (i > 0 && kept[i].parsed.record.paper_id == kept[winner_at].parsed.record.paper_id) {
      const auto& winner = kept[winner_at].parsed;
      const auto& loser = kept[i].parsed;
      if (loser.version != winner.version) {
        ++report.versions_collapsed;
      } else {
        report.skipped.push_back({kept[i].line, SkipReason::Duplicate,
                                  "duplicate of id " + loser.record.paper_id});
      }
      continue;
    }
    winner_at = i;
    corpus.upsert(kept[i].parsed.record);
  }
  std::sort(report.skipped.begin(), report.skipped.end(),
            [](const SkippedLine& a, const SkippedLine& b) { return a.line < b.line; });
  return corpus;
}

}  // namespace detail

/// Reads line-delimited paper records. Malformed lines are skipped and
/// reported; a valid record from a different field than the first one is
/// fatal. Versioned ids collapse to their base id, highest version wins.
inline LoadResult read_corpus(std::istream& in, const LoadOptions& opts = {}) {
  std::vector<detail::NumberedLine> kept;
  LoadReport report;
  std::optional<Field> field = opts.expected_field;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto parsed = detail::parse_record_line(line, opts);
    if (auto* fail = std::get_if<1>(&parsed)) {
      report.skipped.push_back({lineno, fail->first, std::move(fail->second)});
      continue;
    }
    auto& ok = std::get<0>(parsed);
    if (!field) field = ok.record.field;
    if (ok.record.field != *field) {
      throw UserError("line " + std::to_string(lineno) + ": record field " +
                      std::string(to_string(ok.record.field)) + " does not match corpus field " +
                      std::string(to_string(*field)));
    }
    kept.push_back({std::move(ok), lineno});
  }
  if (in.bad()) throw EnvironmentError("read error while loading corpus");

  Corpus corpus = detail::assemble(std::move(kept), field.value_or(Field::CsCl), report);
  return {std::move(corpus), std::move(report)};
}

inline LoadResult load_corpus(const std::filesystem::path& path, const LoadOptions& opts = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EnvironmentError("cannot read corpus file " + path.string());
  return read_corpus(in, opts);
}

inline std::size_t write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& r : corpus.records()) out << detail::serialize_record(r) << '\n';
  if (!out) throw EnvironmentError("write error while saving corpus");
  return corpus.size();
}

inline std::size_t save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EnvironmentError("cannot write corpus file " + path.string());
  auto n = write_corpus(corpus, out);
  out.flush();
  if (!out) throw EnvironmentError("write error on " + path.string());
  return n;
}

}  // namespace arxtrend
