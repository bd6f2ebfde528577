#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arxtrend/analytics.hpp"
#include "arxtrend/annotate.hpp"
#include "arxtrend/corpus.hpp"
#include "arxtrend/error.hpp"
#include "arxtrend/harvest.hpp"
#include "arxtrend/http.hpp"
#include "arxtrend/http_client.hpp"
#include "arxtrend/ranking.hpp"
#include "arxtrend/report.hpp"
#include "arxtrend/scoring.hpp"

namespace arxtrend::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitEnvironment = 2;

/// Streams and services the CLI runs against. Null transport/clock select
/// the live HTTP client and the steady clock.
struct Context {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  http::Transport* transport = nullptr;
  http::Clock* clock = nullptr;
  std::function<std::optional<std::string>(const char*)> getenv = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    return v ? std::optional<std::string>(v) : std::nullopt;
  };
};

namespace detail {

struct Options {
  // global
  bool quiet = false;
  std::string out_path;

  // harvest / citations
  std::string from, to, asof;
  std::string field = "cs.CL";
  double rate = 1.0;
  int retries = 3;
  std::string cache_dir = "cache";
  bool replay = false;
  std::string metadata_endpoint = HarvestConfig{}.metadata_endpoint;
  std::string citation_endpoint = HarvestConfig{}.citation_endpoint;
  std::size_t concurrency = 4;
  std::string snapshots_path;

  // inputs
  std::string corpus_path = "-";
  std::string in_path = "-";
  std::string annotations_path;

  // scoring / ranking
  int window_days = 10;
  std::uint32_t min_citations = 4;
  std::string std_mode = "population";
  bool no_self = false;
  std::string exclusions_path;
  std::size_t top = 100;

  // annotate / stats
  std::string aspect = "task";
  std::string task_scheme, method_scheme, goal_scheme, aliases_path;

  // report
  std::string format = "table";
  std::string view = "auto";
  std::string title;
};

inline Date parse_date_flag(const std::string& name, const std::string& value) {
  auto d = Date::parse(value);
  if (!d) throw UserError("--" + name + " expects YYYY-MM-DD, got '" + value + "'");
  return *d;
}

inline Field parse_field_flag(const std::string& value) {
  auto f = parse_field(value);
  if (!f) throw UserError("--field must be cs.CL or cs.LG, got '" + value + "'");
  return *f;
}

class Runner {
 public:
  Runner(Context& ctx, Options& opt) : ctx_(ctx), opt_(opt) {}

  void note(const std::string& msg) {
    if (!opt_.quiet) ctx_.err << msg << '\n';
  }

  std::istream& open_input(const std::string& path) {
    if (path.empty() || path == "-") return ctx_.in;
    auto f = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*f) throw EnvironmentError("cannot read " + path);
    inputs_.push_back(std::move(f));
    return *inputs_.back();
  }

  void emit(const std::string& bytes) {
    if (opt_.out_path.empty() || opt_.out_path == "-") {
      ctx_.out << bytes;
      ctx_.out.flush();
      return;
    }
    std::ofstream f(opt_.out_path, std::ios::binary | std::ios::trunc);
    f << bytes;
    f.flush();
    if (!f) throw EnvironmentError("cannot write " + opt_.out_path);
  }

  http::Transport& transport() {
    if (ctx_.transport) return *ctx_.transport;
    if (!live_) live_ = std::make_unique<http::HttplibTransport>();
    return *live_;
  }

  http::Clock& clock() {
    if (ctx_.clock) return *ctx_.clock;
    return steady_;
  }

  HarvestConfig harvest_config(bool need_dates) {
    HarvestConfig cfg;
    cfg.metadata_endpoint = opt_.metadata_endpoint;
    cfg.citation_endpoint = opt_.citation_endpoint;
    if (need_dates) {
      if (opt_.from.empty() || opt_.to.empty()) throw UserError("harvest requires --from and --to");
      cfg.date_from = parse_date_flag("from", opt_.from);
      cfg.date_to = parse_date_flag("to", opt_.to);
    }
    cfg.field = parse_field_flag(opt_.field);
    cfg.max_requests_per_second = opt_.rate;
    cfg.max_retries = opt_.retries;
    cfg.cache_dir = opt_.cache_dir;
    cfg.mode = opt_.replay ? HarvestMode::Replay : HarvestMode::Live;
    if (!opt_.asof.empty()) cfg.asof = parse_date_flag("asof", opt_.asof);
    cfg.api_key = ctx_.getenv("CITATION_API_KEY");
    cfg.max_in_flight = opt_.concurrency;
    cfg.validate();
    return cfg;
  }

  ScoringConfig scoring_config() const {
    ScoringConfig cfg;
    cfg.half_width_days = opt_.window_days;
    cfg.min_citations = opt_.min_citations;
    if (opt_.std_mode == "population") cfg.std_mode = StdMode::Population;
    else if (opt_.std_mode == "sample") cfg.std_mode = StdMode::Sample;
    else throw UserError("--std must be population or sample");
    cfg.include_self = !opt_.no_self;
    cfg.validate();
    return cfg;
  }

  SchemeSet schemes(Field field) const {
    std::map<Aspect, std::filesystem::path> files;
    if (!opt_.task_scheme.empty()) files[Aspect::Task] = opt_.task_scheme;
    if (!opt_.method_scheme.empty()) files[Aspect::Method] = opt_.method_scheme;
    if (!opt_.goal_scheme.empty()) files[Aspect::Goal] = opt_.goal_scheme;
    return SchemeSet::for_field(field, files);
  }

  AliasTable aliases() const {
    if (opt_.aliases_path.empty()) return AliasTable::defaults();
    std::ifstream in(opt_.aliases_path);
    if (!in) throw EnvironmentError("cannot read alias file " + opt_.aliases_path);
    return AliasTable::read(in);
  }

  AnnotationLoad annotations(Field field) {
    if (opt_.annotations_path.empty()) throw UserError("--annotations is required");
    auto load = load_annotations(opt_.annotations_path, schemes(field), aliases());
    for (const auto& r : load.rejected) {
      note("annotations row " + std::to_string(r.row) + ": " + std::string(to_string(r.reason)) +
           (r.paper_id.empty() ? "" : " [" + r.paper_id + "]") + (r.detail.empty() ? "" : " '" + r.detail + "'"));
    }
    return load;
  }

  Aspect aspect() const {
    auto a = parse_aspect(opt_.aspect);
    if (!a) throw UserError("--aspect must be task, method or goal");
    return *a;
  }

  Corpus read_corpus_input(const std::string& path) {
    auto loaded = arxtrend::read_corpus(open_input(path));
    report_skips(loaded.report);
    return std::move(loaded.corpus);
  }

  void report_skips(const LoadReport& report, const char* unit = "line") {
    for (const auto& s : report.skipped) {
      note(std::string("skipped ") + unit + " " + std::to_string(s.line) + ": " + std::string(to_string(s.reason)) +
           " (" + s.detail + ")");
    }
  }

  // ---- stages --------------------------------------------------------------

  Corpus do_harvest(const HarvestConfig& cfg) {
    auto res = harvest_metadata(cfg, transport(), clock());
    for (const auto& issue : res.issues) note("page " + std::to_string(issue.page) + ": " + issue.detail);
    report_skips(res.records, "record on page");
    note("harvested " + std::to_string(res.corpus.size()) + " papers from " + std::to_string(res.pages) + " pages");
    return std::move(res.corpus);
  }

  Corpus do_citations(const Corpus& corpus, const HarvestConfig& cfg) {
    auto res = fetch_citations(corpus, cfg, transport(), clock());
    for (const auto& m : res.misses) note("no citation data for " + m.paper_id + ": " + m.reason);
    if (!opt_.snapshots_path.empty()) {
      std::ofstream f(opt_.snapshots_path, std::ios::binary | std::ios::trunc);
      write_snapshots(res.snapshots, f);
      if (!f) throw EnvironmentError("cannot write " + opt_.snapshots_path);
    }
    auto attached = attach_citations(corpus, res.snapshots);
    return std::move(attached.corpus);
  }

  std::vector<ScoredPaper> do_score(const Corpus& corpus) {
    auto res = score_corpus(corpus, scoring_config());
    if (!opt_.exclusions_path.empty()) {
      std::ofstream f(opt_.exclusions_path, std::ios::binary | std::ios::trunc);
      write_exclusions(res.exclusions, f);
      if (!f) throw EnvironmentError("cannot write " + opt_.exclusions_path);
    }
    note("scored " + std::to_string(res.scored.size()) + " papers, excluded " + std::to_string(res.exclusions.size()));
    return std::move(res.scored);
  }

  std::vector<ScoredPaper> do_rank(std::vector<ScoredPaper> scored) {
    sort_scored(scored);
    return top_k(scored, RankingConfig{opt_.top, opt_.min_citations});
  }

  StatsDocument do_stats(const std::vector<ScoredPaper>& ranked) {
    Field field = parse_field_flag(opt_.field);
    auto load = annotations(field);
    auto joined = join(ranked, load.annotations);
    if (!joined.unannotated.empty()) {
      note(std::to_string(joined.unannotated.size()) + " ranked papers have no annotation");
    }
    return build_stats(field, aspect(), joined);
  }

  TableFormat table_format() const {
    if (opt_.format == "table") return TableFormat::Table;
    if (opt_.format == "csv") return TableFormat::Csv;
    if (opt_.format == "json") return TableFormat::Json;
    throw UserError("--format must be table, csv, json or svg");
  }

  std::string render_stats(const StatsDocument& doc) {
    std::string view = opt_.view == "auto" ? "distribution" : opt_.view;
    if (opt_.format == "svg") {
      if (view != "distribution") throw UserError("svg output is available for the distribution view only");
      std::string title = opt_.title.empty()
                              ? std::string(to_string(doc.aspect)) + " distribution in " + std::string(to_string(doc.field))
                              : opt_.title;
      return render_bar_chart(doc.distribution.rows, title);
    }
    if (view == "distribution") return render_table(distribution_table(doc.distribution.rows), table_format());
    if (view == "stats") return render_table(stats_table(doc.stats.stats), table_format());
    throw UserError("--view must be distribution or stats for a stats document");
  }

  std::string render_ranked(const std::vector<ScoredPaper>& ranked) {
    if (opt_.format == "svg") throw UserError("svg output needs a stats document as input");
    if (opt_.view != "auto" && opt_.view != "ranked") throw UserError("--view must be ranked for a scored list");
    std::vector<Annotation> anns;
    if (!opt_.annotations_path.empty()) anns = annotations(parse_field_flag(opt_.field)).annotations;
    return render_table(ranked_table(ranked, anns), table_format());
  }

  // ---- subcommands ---------------------------------------------------------

  void cmd_harvest() {
    std::ostringstream out;
    write_corpus(do_harvest(harvest_config(true)), out);
    emit(out.str());
  }

  void cmd_citations() {
    auto corpus = read_corpus_input(opt_.corpus_path);
    std::ostringstream out;
    write_corpus(do_citations(corpus, harvest_config(false)), out);
    emit(out.str());
  }

  void cmd_score() {
    auto corpus = read_corpus_input(opt_.corpus_path);
    std::ostringstream out;
    write_scored(do_score(corpus), out);
    emit(out.str());
  }

  void cmd_rank() {
    auto scored = read_scored(open_input(opt_.in_path));
    std::ostringstream out;
    write_scored(do_rank(std::move(scored)), out);
    emit(out.str());
  }

  int cmd_validate() {
    if (opt_.annotations_path.empty()) throw UserError("--file is required");
    Field field = parse_field_flag(opt_.field);
    auto load = annotations(field);
    std::ostringstream out;
    csv::write_row(out, {"paper_id", "task", "method", "goal"});
    for (const auto& a : load.annotations) {
      csv::write_row(out, {a.paper_id, a.task.value_or(""), a.method.value_or(""), a.goal.value_or("")});
    }
    emit(out.str());
    note(std::to_string(load.annotations.size()) + " rows accepted, " + std::to_string(load.rejected.size()) +
         " rejected");
    return load.rejected.empty() ? kExitOk : kExitUser;
  }

  void cmd_stats() {
    auto ranked = read_scored(open_input(opt_.in_path));
    std::ostringstream out;
    write_stats(do_stats(ranked), out);
    emit(out.str());
  }

  void cmd_report() {
    std::ostringstream buf;
    buf << open_input(opt_.in_path).rdbuf();
    std::string text = buf.str();
    // A stats document is a single object with an "aspect" key; anything
    // else is read as a scored list.
    auto first = nlohmann::json::parse(text, nullptr, false);
    if (!first.is_discarded() && first.is_object() && first.contains("aspect")) {
      emit(render_stats(parse_stats(first)));
      return;
    }
    std::istringstream in(text);
    emit(render_ranked(read_scored(in)));
  }

  void cmd_pipeline() {
    Corpus corpus;
    if (opt_.corpus_path != "-" || !opt_.from.empty()) {
      if (opt_.corpus_path != "-") {
        corpus = read_corpus_input(opt_.corpus_path);
      } else {
        auto cfg = harvest_config(true);
        corpus = do_citations(do_harvest(cfg), cfg);
      }
    } else {
      corpus = read_corpus_input("-");
    }
    auto ranked = do_rank(do_score(corpus));
    emit(render_stats(do_stats(ranked)));
  }

 private:
  Context& ctx_;
  Options& opt_;
  std::vector<std::unique_ptr<std::istream>> inputs_;
  std::unique_ptr<http::Transport> live_;
  http::SteadyClock steady_;
};

inline void add_harvest_flags(CLI::App* sub, Options& o, bool dates) {
  if (dates) {
    sub->add_option("--from", o.from, "First submission date (YYYY-MM-DD)");
    sub->add_option("--to", o.to, "Last submission date (YYYY-MM-DD)");
    sub->add_option("--metadata-endpoint", o.metadata_endpoint, "Paged listing endpoint");
  }
  sub->add_option("--citation-endpoint", o.citation_endpoint, "Citation lookup endpoint");
  sub->add_option("--rate", o.rate, "Max requests per second")->capture_default_str();
  sub->add_option("--retries", o.retries, "Retries per request")->capture_default_str();
  sub->add_option("--cache-dir", o.cache_dir, "Response cache directory")->capture_default_str();
  sub->add_flag("--replay", o.replay, "Use recorded responses only");
  sub->add_option("--asof", o.asof, "Citation snapshot date (YYYY-MM-DD)");
  sub->add_option("--concurrency", o.concurrency, "Concurrent citation lookups")->capture_default_str();
}

inline void add_scoring_flags(CLI::App* sub, Options& o) {
  sub->add_option("--window-days", o.window_days, "Half-width of the date window")->capture_default_str();
  sub->add_option("--min-citations", o.min_citations, "Minimum citations to be scored")->capture_default_str();
  sub->add_option("--std", o.std_mode, "population|sample")->capture_default_str();
  sub->add_flag("--no-self", o.no_self, "Exclude the paper from its own window");
  sub->add_option("--exclusions", o.exclusions_path, "Write the exclusion report here");
}

inline void add_scheme_flags(CLI::App* sub, Options& o) {
  sub->add_option("--field", o.field, "cs.CL|cs.LG")->capture_default_str();
  sub->add_option("--task-scheme", o.task_scheme, "Task label file");
  sub->add_option("--method-scheme", o.method_scheme, "Method label file");
  sub->add_option("--goal-scheme", o.goal_scheme, "Goal label file");
  sub->add_option("--aliases", o.aliases_path, "Label alias CSV");
}

inline void add_report_flags(CLI::App* sub, Options& o) {
  sub->add_option("--format", o.format, "table|csv|json|svg")->capture_default_str();
  sub->add_option("--view", o.view, "auto|ranked|distribution|stats")->capture_default_str();
  sub->add_option("--title", o.title, "Chart title");
}

}  // namespace detail

/// Runs one CLI invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, Context& ctx) {
  detail::Options o;
  CLI::App app{"Citation z-score ranking and research-trend analytics for Arxiv corpora", "arxtrend"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_flag("--quiet,-q", o.quiet, "Suppress diagnostics");
  app.add_option("--out,-o", o.out_path, "Write data here instead of standard output");

  auto* harvest = app.add_subcommand("harvest", "Fetch paper metadata into a corpus");
  detail::add_harvest_flags(harvest, o, true);
  harvest->add_option("--field", o.field, "cs.CL|cs.LG")->capture_default_str();

  auto* citations = app.add_subcommand("citations", "Attach citation counts to a corpus");
  detail::add_harvest_flags(citations, o, false);
  citations->add_option("--corpus", o.corpus_path, "Corpus file (- for stdin)");
  citations->add_option("--snapshots", o.snapshots_path, "Also write the snapshot map here");

  auto* score = app.add_subcommand("score", "Compute windowed citation z-scores");
  score->add_option("--corpus", o.corpus_path, "Corpus file (- for stdin)");
  detail::add_scoring_flags(score, o);

  auto* rank = app.add_subcommand("rank", "Keep the top-k scored papers");
  rank->add_option("--in", o.in_path, "Scored file (- for stdin)");
  rank->add_option("--top", o.top, "Number of papers to keep")->capture_default_str();
  rank->add_option("--min-citations", o.min_citations, "Reject input below this count")->capture_default_str();

  auto* validate = app.add_subcommand("validate-annotations", "Check an annotation file against label schemes");
  validate->add_option("--file", o.annotations_path, "Annotation CSV")->required();
  detail::add_scheme_flags(validate, o);

  auto* annotate = app.add_subcommand("annotate", "Annotation tools");
  annotate->require_subcommand(1);
  auto* annotate_validate = annotate->add_subcommand("validate", "Same as validate-annotations");
  annotate_validate->add_option("--file", o.annotations_path, "Annotation CSV")->required();
  detail::add_scheme_flags(annotate_validate, o);

  auto* stats = app.add_subcommand("stats", "Category statistics and distribution for one aspect");
  stats->add_option("--in", o.in_path, "Ranked file (- for stdin)");
  stats->add_option("--annotations", o.annotations_path, "Annotation CSV")->required();
  stats->add_option("--aspect", o.aspect, "task|method|goal")->capture_default_str();
  detail::add_scheme_flags(stats, o);

  auto* report = app.add_subcommand("report", "Render a scored list or stats document");
  report->add_option("--in", o.in_path, "Input file (- for stdin)");
  report->add_option("--annotations", o.annotations_path, "Add labels to a ranked table");
  detail::add_report_flags(report, o);
  detail::add_scheme_flags(report, o);

  auto* pipeline = app.add_subcommand("pipeline", "score, rank, stats and report in one step");
  pipeline->add_option("--corpus", o.corpus_path, "Corpus with citations (- for stdin)");
  detail::add_harvest_flags(pipeline, o, true);
  detail::add_scoring_flags(pipeline, o);
  pipeline->add_option("--top", o.top, "Number of papers to keep")->capture_default_str();
  pipeline->add_option("--annotations", o.annotations_path, "Annotation CSV")->required();
  pipeline->add_option("--aspect", o.aspect, "task|method|goal")->capture_default_str();
  detail::add_scheme_flags(pipeline, o);
  detail::add_report_flags(pipeline, o);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    ctx.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    ctx.out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    ctx.err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUser;
  }

  detail::Runner runner(ctx, o);
  try {
    if (*harvest) runner.cmd_harvest();
    else if (*citations) runner.cmd_citations();
    else if (*score) runner.cmd_score();
    else if (*rank) runner.cmd_rank();
    else if (*validate || *annotate_validate) return runner.cmd_validate();
    else if (*stats) runner.cmd_stats();
    else if (*report) runner.cmd_report();
    else if (*pipeline) runner.cmd_pipeline();
    return kExitOk;
  } catch (const EnvironmentError& e) {
    ctx.err << "error: " << e.what() << '\n';
    return kExitEnvironment;
  } catch (const Error& e) {
    ctx.err << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::filesystem::filesystem_error& e) {
    ctx.err << "error: " << e.what() << '\n';
    return kExitEnvironment;
  } catch (const std::exception& e) {
    ctx.err << "error: " << e.what() << '\n';
    return kExitUser;
  }
}

}  // namespace arxtrend::cli
