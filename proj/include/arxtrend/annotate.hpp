#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "arxtrend/corpus.hpp"
#include "arxtrend/csv.hpp"
#include "arxtrend/error.hpp"
#include "arxtrend/scoring.hpp"

namespace arxtrend {

enum class Aspect { Task, Method, Goal };

inline constexpr std::array<Aspect, 3> kAspects{Aspect::Task, Aspect::Method, Aspect::Goal};

inline std::string_view to_string(Aspect a) {
  switch (a) {
    case Aspect::Task: return "task";
    case Aspect::Method: return "method";
    case Aspect::Goal: return "goal";
  }
  return "unknown";
}

inline std::optional<Aspect> parse_aspect(std::string_view s) {
  for (auto a : kAspects)
    if (to_string(a) == s) return a;
  return std::nullopt;
}

namespace labels {

// Task labels for cs.CL.
inline constexpr std::array<std::string_view, 15> kClTask{
    "Generation",          "Machine Translation (MT)", "Text representations",
    "Speech",              "Language Modeling",        "Sentence Classification",
    "Style Transfer",      "Reasoning",                "Relation extraction",
    "Sequence Tagging",    "Emotion Detection",        "Argument Mining",
    "Human-Computer Interaction", "Parsing",           "Rest",
};

// Method labels for cs.LG. Only 14 are published although the scheme is
// stated to have 15; the last entry stands in for the unpublished one.
inline constexpr std::string_view kLgMethodPlaceholder = "Unlisted method (placeholder)";
inline constexpr std::array<std::string_view, 15> kLgMethod{
    "Reinforcement Learning (RL)", "Other Deep Learning architect.", "Representation Learning",
    "GAN",                         "Generation",                     "Architecture Search",
    "Distillation",                "Analysis",                       "Interpretability",
    "Learning Aspects",            "Various",                        "Data",
    "Rest",                        "Adversarial",                    kLgMethodPlaceholder,
};

// Abbreviations seen in published result tables, mapped to scheme labels.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 2> kDefaultAliases{{
    {"Emotion Det.", "Emotion Detection"},
    {"Text repr.", "Text representations"},
}};

}  // namespace labels

/// Number of labels each (field, aspect) scheme was annotated with.
inline constexpr std::size_t stated_cardinality(Field field, Aspect aspect) {
  if (field == Field::CsCl) {
    switch (aspect) {
      case Aspect::Task: return 15;
      case Aspect::Method: return 28;
      case Aspect::Goal: return 7;
    }
  }
  switch (aspect) {
    case Aspect::Task: return 13;
    case Aspect::Method: return 15;
    case Aspect::Goal: return 13;
  }
  return 0;
}

class LabelScheme {
 public:
  LabelScheme(Field field, Aspect aspect, std::vector<std::string> labels)
      : field_(field), aspect_(aspect), labels_(std::move(labels)) {
    if (labels_.empty()) throw UserError("label scheme for " + describe() + " is empty");
    std::set<std::string_view> seen;
    for (const auto& l : labels_) {
      if (!seen.insert(l).second) throw UserError("label scheme for " + describe() + " repeats '" + l + "'");
    }
  }

  [[nodiscard]] Field field() const { return field_; }
  [[nodiscard]] Aspect aspect() const { return aspect_; }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] std::size_t size() const { return labels_.size(); }
  [[nodiscard]] bool contains(std::string_view label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
  }
  [[nodiscard]] std::string describe() const {
    return std::string(to_string(field_)) + "/" + std::string(to_string(aspect_));
  }

 private:
  Field field_;
  Aspect aspect_;
  std::vector<std::string> labels_;
};

namespace detail {
inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}
}  // namespace detail

/// Scheme file: one label per line; blank lines and lines starting with '#'
/// are ignored.
inline LabelScheme read_scheme(std::istream& in, Field field, Aspect aspect) {
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    labels.push_back(std::move(t));
  }
  return LabelScheme(field, aspect, std::move(labels));
}

inline LabelScheme load_scheme(const std::filesystem::path& path, Field field, Aspect aspect) {
  std::ifstream in(path);
  if (!in) throw EnvironmentError("cannot read scheme file " + path.string());
  return read_scheme(in, field, aspect);
}

/// Scheme for (field, aspect). A scheme file always wins; otherwise only
/// cs.CL/task and cs.LG/method have built-in label lists, and the other
/// four raise NotEnumeratedError.
inline LabelScheme builtin_scheme(Field field, Aspect aspect,
                                  const std::optional<std::filesystem::path>& scheme_file = std::nullopt) {
  if (scheme_file) return load_scheme(*scheme_file, field, aspect);
  auto make = [&](auto const& list) {
    return LabelScheme(field, aspect, std::vector<std::string>(list.begin(), list.end()));
  };
  if (field == Field::CsCl && aspect == Aspect::Task) return make(labels::kClTask);
  if (field == Field::CsLg && aspect == Aspect::Method) return make(labels::kLgMethod);
  throw NotEnumeratedError("no built-in label list for " + std::string(to_string(field)) + "/" +
                           std::string(to_string(aspect)) + " (" +
                           std::to_string(stated_cardinality(field, aspect)) +
                           " labels, not enumerated); supply a scheme file");
}

/// Maps abbreviated labels to their canonical scheme spelling.
class AliasTable {
 public:
  AliasTable() = default;

  static AliasTable defaults() {
    AliasTable t;
    for (auto [alias, canonical] : labels::kDefaultAliases) t.add(std::string(alias), std::string(canonical));
    return t;
  }

  /// Two-column CSV rows `alias,canonical`; rows starting with '#' skipped.
  static AliasTable read(std::istream& in) {
    AliasTable t;
    while (auto row = csv::read_row(in)) {
      if (row->empty() || (row->size() == 1 && detail::trim((*row)[0]).empty())) continue;
      if (!(*row)[0].empty() && (*row)[0].front() == '#') continue;
      if (row->size() != 2) throw UserError("alias rows need exactly two columns");
      t.add(detail::trim((*row)[0]), detail::trim((*row)[1]));
    }
    return t;
  }

  void add(std::string alias, std::string canonical) { map_[std::move(alias)] = std::move(canonical); }

  [[nodiscard]] std::string_view resolve(std::string_view label) const {
    auto it = map_.find(label);
    return it == map_.end() ? label : std::string_view(it->second);
  }

  [[nodiscard]] std::size_t size() const { return map_.size(); }

 private:
  std::map<std::string, std::string, std::less<>> map_;
};

/// The label schemes in force for one field, one optional scheme per aspect.
class SchemeSet {
 public:
  explicit SchemeSet(Field field) : field_(field) {}

  /// Built-ins where they exist plus any supplied files; aspects with
  /// neither stay unset, and labels for them are rejected on load.
  static SchemeSet for_field(Field field, const std::map<Aspect, std::filesystem::path>& files = {}) {
    SchemeSet set(field);
    for (auto a : kAspects) {
      std::optional<std::filesystem::path> file;
      if (auto it = files.find(a); it != files.end()) file = it->second;
      try {
        set.put(builtin_scheme(field, a, file));
      } catch (const NotEnumeratedError&) {
      }
    }
    return set;
  }

  void put(LabelScheme scheme) {
    if (scheme.field() != field_) throw UserError("scheme " + scheme.describe() + " does not belong to this field");
    schemes_[static_cast<std::size_t>(scheme.aspect())] = std::move(scheme);
  }

  [[nodiscard]] Field field() const { return field_; }
  [[nodiscard]] const LabelScheme* get(Aspect a) const {
    const auto& s = schemes_[static_cast<std::size_t>(a)];
    return s ? &*s : nullptr;
  }

 private:
  Field field_;
  std::array<std::optional<LabelScheme>, 3> schemes_;
};

struct Annotation {
  std::string paper_id;
  std::optional<std::string> task;
  std::optional<std::string> method;
  std::optional<std::string> goal;

  [[nodiscard]] const std::optional<std::string>& label(Aspect a) const {
    switch (a) {
      case Aspect::Task: return task;
      case Aspect::Method: return method;
      case Aspect::Goal: return goal;
    }
    return task;
  }
  std::optional<std::string>& label(Aspect a) {
    return const_cast<std::optional<std::string>&>(std::as_const(*this).label(a));
  }

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

enum class RejectReason { UnknownLabel, NoScheme, DuplicateId, EmptyId, ColumnCount };

inline std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::UnknownLabel: return "unknown-label";
    case RejectReason::NoScheme: return "no-scheme";
    case RejectReason::DuplicateId: return "duplicate-id";
    case RejectReason::EmptyId: return "empty-id";
    case RejectReason::ColumnCount: return "column-count";
  }
  return "unknown";
}

struct RejectedRow {
  std::size_t row = 0;  // 1-based; the header is row 1
  RejectReason reason{};
  std::string paper_id;
  std::string detail;  // offending label, when there is one
};

struct AnnotationLoad {
  std::vector<Annotation> annotations;
  std::vector<RejectedRow> rejected;
};

/// Reads `paper_id,task,method,goal` rows (header required, columns found
/// by name; task/method/goal may be absent). Empty cells are absent labels.
/// Rows with labels outside their scheme, or repeating a paper_id, are
/// rejected and reported; a missing paper_id column is fatal.
inline AnnotationLoad read_annotations(std::istream& in, const SchemeSet& schemes,
                                       const AliasTable& aliases = AliasTable::defaults()) {
  auto header = csv::read_row(in);
  if (!header) throw UserError("annotation file is empty; header row required");
  if (!header->empty() && header->front().rfind("\xEF\xBB\xBF", 0) == 0) header->front().erase(0, 3);

  std::optional<std::size_t> id_col;
  std::array<std::optional<std::size_t>, 3> aspect_col;
  for (std::size_t i = 0; i < header->size(); ++i) {
    auto name = detail::trim((*header)[i]);
    if (name == "paper_id") id_col = i;
    if (auto a = parse_aspect(name)) aspect_col[static_cast<std::size_t>(*a)] = i;
  }
  if (!id_col) throw UserError("annotation file has no paper_id column");

  AnnotationLoad out;
  std::set<std::string, std::less<>> seen;
  std::size_t rowno = 1;
  while (auto row = csv::read_row(in)) {
    ++rowno;
    if (row->size() == 1 && detail::trim((*row)[0]).empty()) continue;
    if (row->size() != header->size()) {
      out.rejected.push_back({rowno, RejectReason::ColumnCount, {},
                              std::to_string(row->size()) + " columns, header has " + std::to_string(header->size())});
      continue;
    }
    Annotation ann;
    ann.paper_id = ArxivId::parse(detail::trim((*row)[*id_col])).base;
    if (ann.paper_id.empty()) {
      out.rejected.push_back({rowno, RejectReason::EmptyId, {}, {}});
      continue;
    }
    std::optional<RejectedRow> bad;
    for (auto a : kAspects) {
      auto col = aspect_col[static_cast<std::size_t>(a)];
      if (!col) continue;
      auto raw = detail::trim((*row)[*col]);
      if (raw.empty()) continue;
      const LabelScheme* scheme = schemes.get(a);
      if (!scheme) {
        bad = RejectedRow{rowno, RejectReason::NoScheme, ann.paper_id, raw};
        break;
      }
      std::string label = scheme->contains(raw) ? raw : std::string(aliases.resolve(raw));
      if (!scheme->contains(label)) {
        bad = RejectedRow{rowno, RejectReason::UnknownLabel, ann.paper_id, raw};
        break;
      }
      ann.label(a) = std::move(label);
    }
    if (bad) {
      out.rejected.push_back(std::move(*bad));
      continue;
    }
    if (!seen.insert(ann.paper_id).second) {
      out.rejected.push_back({rowno, RejectReason::DuplicateId, ann.paper_id, {}});
      continue;
    }
    out.annotations.push_back(std::move(ann));
  }
  return out;
}

inline AnnotationLoad load_annotations(const std::filesystem::path& path, const SchemeSet& schemes,
                                       const AliasTable& aliases = AliasTable::defaults()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EnvironmentError("cannot read annotation file " + path.string());
  return read_annotations(in, schemes, aliases);
}

struct AnnotatedPaper {
  ScoredPaper paper;
  Annotation annotation;
};

struct JoinResult {
  std::vector<AnnotatedPaper> pairs;  // ranked order
  std::vector<std::string> unannotated;
};

/// Inner join on paper_id, preserving the ranked order.
inline JoinResult join(std::span<const ScoredPaper> ranked, std::span<const Annotation> annotations) {
  std::unordered_map<std::string_view, const Annotation*> by_id;
  for (const auto& a : annotations) by_id.emplace(a.paper_id, &a);
  JoinResult out;
  for (const auto& p : ranked) {
    if (auto it = by_id.find(p.paper_id); it != by_id.end()) {
      out.pairs.push_back({p, *it->second});
    } else {
      out.unannotated.push_back(p.paper_id);
    }
  }
  return out;
}

}  // namespace arxtrend
