#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "arxtrend/analytics.hpp"
#include "arxtrend/annotate.hpp"
#include "arxtrend/csv.hpp"
#include "arxtrend/error.hpp"
#include "arxtrend/scoring.hpp"

namespace arxtrend {

enum class TableFormat { Table, Csv, Json };

using Cell = std::variant<std::string, std::int64_t, double>;

/// Homogeneous rows with named columns. `precision` is the number of
/// decimals shown for real-valued cells in the aligned terminal format
/// only; CSV and JSON always carry the exact value.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<int> precision;
};

namespace detail {

// Shortest decimal form that parses back to the same double.
inline std::string exact_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string fixed_number(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string cell_text(const Cell& c, std::optional<int> decimals) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) return v;
        else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
        else return decimals ? fixed_number(v, *decimals) : exact_number(v);
      },
      c);
}

// Display width counting UTF-8 code points.
inline std::size_t display_width(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // XML 1.0 forbids most C0 controls even when escaped.
        if (static_cast<unsigned char>(c) >= 0x20 || c == '\t' || c == '\n' || c == '\r') out += c;
    }
  }
  return out;
}

}  // namespace detail

inline std::string render_table(const Table& table, TableFormat format) {
  std::ostringstream out;
  switch (format) {
    case TableFormat::Csv: {
      csv::write_row(out, table.columns);
      for (const auto& row : table.rows) {
        csv::Row text;
        for (const auto& c : row) text.push_back(detail::cell_text(c, std::nullopt));
        csv::write_row(out, text);
      }
      break;
    }
    case TableFormat::Json: {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < table.columns.size() && i < row.size(); ++i) {
          std::visit([&](const auto& v) { obj[table.columns[i]] = v; }, row[i]);
        }
        arr.push_back(std::move(obj));
      }
      out << arr.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
      break;
    }
    case TableFormat::Table: {
      std::vector<std::vector<std::string>> text;
      std::vector<std::size_t> width(table.columns.size(), 0);
      for (std::size_t i = 0; i < table.columns.size(); ++i) width[i] = detail::display_width(table.columns[i]);
      for (const auto& row : table.rows) {
        auto& line = text.emplace_back();
        for (std::size_t i = 0; i < row.size(); ++i) {
          int decimals = i < table.precision.size() ? table.precision[i] : 4;
          line.push_back(detail::cell_text(row[i], decimals));
          width[i] = std::max(width[i], detail::display_width(line.back()));
        }
      }
      auto emit = [&](const std::vector<std::string>& cells, const std::vector<Cell>* types) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (i) line += "  ";
          std::size_t pad = width[i] - detail::display_width(cells[i]);
          bool numeric = types && !std::holds_alternative<std::string>((*types)[i]);
          if (numeric) line.append(pad, ' ');
          line += cells[i];
          if (!numeric && i + 1 < cells.size()) line.append(pad, ' ');
        }
        out << line << '\n';
      };
      emit(table.columns, nullptr);
      std::vector<std::string> rule;
      for (auto w : width) rule.emplace_back(w, '-');
      emit(rule, nullptr);
      for (std::size_t r = 0; r < text.size(); ++r) emit(text[r], &table.rows[r]);
      break;
    }
  }
  return out.str();
}

/// Ranked list in the shape of a top-k result table: rank, id, title,
/// absolute citations, z-score, window statistics, and labels when given.
inline Table ranked_table(std::span<const ScoredPaper> ranked, std::span<const Annotation> annotations = {}) {
  Table t;
  t.columns = {"rank", "id", "title", "citations", "z_score", "window_count", "window_mean", "window_std"};
  t.precision = {0, 0, 0, 0, 2, 0, 2, 2};
  bool with_labels = !annotations.empty();
  if (with_labels) {
    for (auto a : kAspects) t.columns.emplace_back(to_string(a));
  }
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& p = ranked[i];
    std::vector<Cell> row{static_cast<std::int64_t>(i + 1), p.paper_id, p.title,
                          static_cast<std::int64_t>(p.citation_count), p.z_score,
                          static_cast<std::int64_t>(p.window_count), p.window_mean, p.window_std};
    if (with_labels) {
      auto it = std::find_if(annotations.begin(), annotations.end(),
                             [&](const Annotation& a) { return a.paper_id == p.paper_id; });
      for (auto a : kAspects) {
        row.emplace_back(it != annotations.end() ? it->label(a).value_or("") : std::string());
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table stats_table(std::span<const CategoryStats> stats) {
  Table t{{"label", "n", "s", "m"}, {}, {0, 0, 3, 3}};
  for (const auto& s : stats) t.rows.push_back({s.label, static_cast<std::int64_t>(s.n), s.s, s.m});
  return t;
}

inline Table distribution_table(std::span<const DistributionRow> rows) {
  Table t{{"label", "count", "percentage"}, {}, {0, 0, 2}};
  for (const auto& r : rows) t.rows.push_back({r.label, static_cast<std::int64_t>(r.count), r.percentage});
  return t;
}

// ---------------------------------------------------------------------------
// Stage file formats.

/// Scored list, one JSON object per line:
/// {"id","title","citations","z","window_count","window_mean","window_std"}.
inline void write_scored(std::span<const ScoredPaper> scored, std::ostream& out) {
  for (const auto& p : scored) {
    nlohmann::ordered_json j;
    j["id"] = p.paper_id;
    j["title"] = p.title;
    j["citations"] = p.citation_count;
    j["z"] = p.z_score;
    j["window_count"] = p.window_count;
    j["window_mean"] = p.window_mean;
    j["window_std"] = p.window_std;
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

inline std::vector<ScoredPaper> read_scored(std::istream& in) {
  std::vector<ScoredPaper> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = "scored line " + std::to_string(lineno) + ": ";
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw UserError(where + "not a JSON object");
    try {
      ScoredPaper p;
      p.paper_id = j.at("id").get<std::string>();
      p.title = j.value("title", "");
      p.citation_count = j.at("citations").get<std::uint32_t>();
      p.z_score = j.at("z").get<double>();
      p.window_count = j.at("window_count").get<std::size_t>();
      p.window_mean = j.at("window_mean").get<double>();
      p.window_std = j.at("window_std").get<double>();
      if (p.paper_id.empty()) throw UserError(where + "empty id");
      if (p.window_count < 1 || !(p.window_std > 0)) throw UserError(where + "window must be non-empty with std > 0");
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw UserError(where + e.what());
    }
  }
  return out;
}

inline void write_exclusions(std::span<const Exclusion> exclusions, std::ostream& out) {
  for (const auto& e : exclusions) {
    nlohmann::ordered_json j;
    j["id"] = e.paper_id;
    j["reason"] = to_string(e.reason);
    out << j.dump() << '\n';
  }
}

/// Output of the stats stage for one aspect over an annotated ranked list.
struct StatsDocument {
  Field field = Field::CsCl;
  Aspect aspect = Aspect::Task;
  std::size_t pairs = 0;
  std::vector<std::string> unannotated;
  CategoryStatsResult stats;
  DistributionResult distribution;
};

inline StatsDocument build_stats(Field field, Aspect aspect, const JoinResult& joined) {
  StatsDocument doc;
  doc.field = field;
  doc.aspect = aspect;
  doc.pairs = joined.pairs.size();
  doc.unannotated = joined.unannotated;
  doc.stats = category_stats(joined.pairs, aspect);
  doc.distribution = distribution(joined.pairs, aspect);
  return doc;
}

inline void write_stats(const StatsDocument& doc, std::ostream& out) {
  nlohmann::ordered_json j;
  j["field"] = to_string(doc.field);
  j["aspect"] = to_string(doc.aspect);
  j["pairs"] = doc.pairs;
  j["missing"] = doc.stats.missing;
  j["unannotated"] = doc.unannotated;
  auto& stats = j["stats"] = nlohmann::ordered_json::array();
  for (const auto& s : doc.stats.stats) {
    stats.push_back(nlohmann::ordered_json{{"label", s.label}, {"n", s.n}, {"s", s.s}, {"m", s.m}});
  }
  auto& dist = j["distribution"] = nlohmann::ordered_json::array();
  for (const auto& r : doc.distribution.rows) {
    dist.push_back(nlohmann::ordered_json{{"label", r.label}, {"count", r.count}, {"percentage", r.percentage}});
  }
  out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
}

inline StatsDocument parse_stats(const nlohmann::json& j) {
  try {
    StatsDocument doc;
    auto field = parse_field(j.at("field").get<std::string>());
    auto aspect = parse_aspect(j.at("aspect").get<std::string>());
    if (!field || !aspect) throw UserError("stats document has an unknown field or aspect");
    doc.field = *field;
    doc.aspect = *aspect;
    doc.pairs = j.at("pairs").get<std::size_t>();
    doc.stats.missing = doc.distribution.missing = j.at("missing").get<std::size_t>();
    doc.unannotated = j.at("unannotated").get<std::vector<std::string>>();
    for (const auto& s : j.at("stats")) {
      doc.stats.stats.push_back(
          {s.at("label").get<std::string>(), s.at("n").get<std::size_t>(), s.at("s").get<double>(), s.at("m").get<double>()});
    }
    for (const auto& r : j.at("distribution")) {
      doc.distribution.rows.push_back(
          {r.at("label").get<std::string>(), r.at("count").get<std::size_t>(), r.at("percentage").get<double>()});
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw UserError(std::string("malformed stats document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Bar chart.

struct ChartLayout {
  double width = 640;
  double height = 400;
  double margin_left = 70;
  double margin_right = 20;
  double margin_top = 50;
  double margin_bottom = 130;
  double bar_fill = 0.7;  // share of each slot covered by its bar

  [[nodiscard]] double plot_width() const { return width - margin_left - margin_right; }
  [[nodiscard]] double plot_height() const { return height - margin_top - margin_bottom; }
};

/// SVG bar chart: one bar per row in the given order, y axis 0–100 %, bar
/// height proportional to the row's percentage. Bars carry class="bar" and
/// data-label / data-percentage attributes.
inline std::string render_bar_chart(std::span<const DistributionRow> dist, std::string_view title,
                                    const ChartLayout& layout = {}) {
  using detail::fixed_number;
  using detail::xml_escape;
  auto f = [](double v) { return fixed_number(v, 2); };
  const double x0 = layout.margin_left;
  const double y0 = layout.margin_top + layout.plot_height();  // baseline
  const double ph = layout.plot_height();
  const double pw = layout.plot_width();

  std::ostringstream svg;
  svg << R"(<?xml version="1.0" encoding="UTF-8"?>)" << '\n';
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << f(layout.width) << R"(" height=")"
      << f(layout.height) << R"(" viewBox="0 0 )" << f(layout.width) << ' ' << f(layout.height) << R"(">)" << '\n';
  svg << R"(<rect class="background" x="0" y="0" width=")" << f(layout.width) << R"(" height=")" << f(layout.height)
      << R"(" fill="white"/>)" << '\n';
  svg << R"(<text class="title" x=")" << f(layout.width / 2) << R"(" y=")" << f(layout.margin_top / 2)
      << R"(" text-anchor="middle" font-family="sans-serif" font-size="16">)" << xml_escape(title) << "</text>\n";

  // Axes, ticks and axis titles.
  svg << R"(<g class="axes" stroke="black" stroke-width="1">)" << '\n';
  svg << R"(<line class="y-axis" x1=")" << f(x0) << R"(" y1=")" << f(layout.margin_top) << R"(" x2=")" << f(x0)
      << R"(" y2=")" << f(y0) << R"("/>)" << '\n';
  svg << R"(<line class="x-axis" x1=")" << f(x0) << R"(" y1=")" << f(y0) << R"(" x2=")" << f(x0 + pw)
      << R"(" y2=")" << f(y0) << R"("/>)" << '\n';
  for (int tick = 0; tick <= 100; tick += 25) {
    double y = y0 - ph * tick / 100.0;
    svg << R"(<line class="tick" x1=")" << f(x0 - 5) << R"(" y1=")" << f(y) << R"(" x2=")" << f(x0) << R"(" y2=")"
        << f(y) << R"("/>)" << '\n';
  }
  svg << "</g>\n";
  svg << R"(<g class="tick-labels" font-family="sans-serif" font-size="11" text-anchor="end">)" << '\n';
  for (int tick = 0; tick <= 100; tick += 25) {
    double y = y0 - ph * tick / 100.0;
    svg << R"(<text x=")" << f(x0 - 8) << R"(" y=")" << f(y + 4) << R"(">)" << tick << "%</text>\n";
  }
  svg << "</g>\n";
  svg << R"(<text class="y-label" x=")" << f(18) << R"(" y=")" << f(layout.margin_top + ph / 2)
      << R"(" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 )" << f(18) << ' '
      << f(layout.margin_top + ph / 2) << R"svg()">share of papers (%)</text>)svg" << '\n';
  svg << R"(<text class="x-label" x=")" << f(x0 + pw / 2) << R"(" y=")" << f(layout.height - 10)
      << R"(" text-anchor="middle" font-family="sans-serif" font-size="12">category</text>)" << '\n';

  if (dist.empty()) {
    svg << R"(<text class="no-data" x=")" << f(x0 + pw / 2) << R"(" y=")" << f(layout.margin_top + ph / 2)
        << R"(" text-anchor="middle" font-family="sans-serif" font-size="14">no data</text>)" << '\n';
  } else {
    const double slot = pw / static_cast<double>(dist.size());
    const double bw = slot * layout.bar_fill;
    svg << R"(<g class="bars" fill="steelblue">)" << '\n';
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const auto& row = dist[i];
      double pct = std::clamp(row.percentage, 0.0, 100.0);
      double h = ph * pct / 100.0;
      double x = x0 + slot * static_cast<double>(i) + (slot - bw) / 2;
      svg << R"(<rect class="bar" x=")" << f(x) << R"(" y=")" << f(y0 - h) << R"(" width=")" << f(bw)
          << R"(" height=")" << f(h) << R"(" data-label=")" << xml_escape(row.label) << R"(" data-percentage=")"
          << f(pct) << R"("/>)" << '\n';
    }
    svg << "</g>\n";
    svg << R"(<g class="values" font-family="sans-serif" font-size="10" text-anchor="middle">)" << '\n';
    for (std::size_t i = 0; i < dist.size(); ++i) {
      double pct = std::clamp(dist[i].percentage, 0.0, 100.0);
      double cx = x0 + slot * (static_cast<double>(i) + 0.5);
      svg << R"(<text x=")" << f(cx) << R"(" y=")" << f(y0 - ph * pct / 100.0 - 4) << R"(">)" << fixed_number(pct, 1)
          << "%</text>\n";
    }
    svg << "</g>\n";
    svg << R"(<g class="labels" font-family="sans-serif" font-size="10" text-anchor="end">)" << '\n';
    for (std::size_t i = 0; i < dist.size(); ++i) {
      double cx = x0 + slot * (static_cast<double>(i) + 0.5);
      svg << R"(<text x=")" << f(cx) << R"(" y=")" << f(y0 + 12) << R"(" transform="rotate(-45 )" << f(cx) << ' '
          << f(y0 + 12) << R"svg()">)svg" << xml_escape(dist[i].label) << "</text>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace arxtrend
