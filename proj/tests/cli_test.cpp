#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "arxtrend/cli.hpp"
#include "oracle.hpp"

using namespace arxtrend;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures(ARXTREND_FIXTURE_DIR);

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args, const std::string& stdin_text = {}, http::Transport* t = nullptr,
            http::Clock* clock = nullptr) {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  cli::Context ctx{in, out, err};
  ctx.transport = t;
  ctx.clock = clock;
  ctx.getenv = [](const char*) { return std::optional<std::string>(); };
  int code = cli::run(args, ctx);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return (kFixtures / name).string(); }

class RefusingTransport : public http::Transport {
 public:
  http::Response get(const std::string&, const http::Headers&) override {
    ++calls;
    throw http::TransportError("connection refused");
  }
  int calls = 0;
};

}  // namespace

TEST(Cli, NoArgumentsPrintsUsage) {
  auto r = run({});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("harvest"), std::string::npos);
  EXPECT_NE(r.err.find("pipeline"), std::string::npos);
}

TEST(Cli, HelpGoesToStdout) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("score"), std::string::npos);
}

TEST(Cli, UnknownFlagIsUserError) {
  auto r = run({"score", "--bogus"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, RankTopThreeOfStoredScores) {
  auto r = run({"-q", "rank", "--in", fixture("top3_scored.jsonl"), "--top", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  auto ranked = read_scored(in);
  ASSERT_EQ(ranked.size(), 3u);
  EXPECT_EQ(ranked[0].paper_id, "1809.01083");
  EXPECT_EQ(ranked[1].paper_id, "1810.04805");
  EXPECT_EQ(ranked[2].paper_id, "1802.05365");
}

TEST(Cli, RankRejectsInputBelowMinimum) {
  auto r = run({"rank", "--min-citations", "19"}, R"({"id":"a","citations":18,"z":1,"window_count":2,"window_mean":1,"window_std":1})" "\n");
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, ScoreMatchesBruteForce) {
  auto r = run({"-q", "score", "--corpus", fixture("synthetic_corpus.jsonl"), "--window-days", "7", "--std", "sample"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  auto scored = read_scored(in);
  auto corpus = load_corpus(kFixtures / "synthetic_corpus.jsonl").corpus;
  oracle::Params p;
  p.half_width = 7;
  p.sample = true;
  auto want = oracle::brute_force(corpus, p);
  std::size_t expected = 0;
  for (const auto& [id, e] : want) expected += e.scored;
  ASSERT_EQ(scored.size(), expected);
  ASSERT_GT(expected, 10u);
  for (const auto& s : scored) {
    ASSERT_TRUE(want.at(s.paper_id).scored);
    EXPECT_NEAR(s.z_score, want.at(s.paper_id).z, 1e-9);
  }
}

TEST(Cli, StagedRunEqualsPipeline) {
  auto corpus = fixture("synthetic_corpus.jsonl");
  auto ann = fixture("synthetic_annotations.csv");
  for (const std::string fmt : {"svg", "csv", "table"}) {
    auto scored = run({"-q", "score", "--corpus", corpus});
    ASSERT_EQ(scored.code, 0);
    auto ranked = run({"-q", "rank", "--top", "20"}, scored.out);
    ASSERT_EQ(ranked.code, 0);
    auto stats = run({"-q", "stats", "--annotations", ann}, ranked.out);
    ASSERT_EQ(stats.code, 0) << stats.err;
    auto report = run({"-q", "report", "--format", fmt}, stats.out);
    ASSERT_EQ(report.code, 0) << report.err;
    auto piped = run({"-q", "pipeline", "--corpus", corpus, "--top", "20", "--annotations", ann, "--format", fmt});
    ASSERT_EQ(piped.code, 0) << piped.err;
    EXPECT_EQ(report.out, piped.out) << fmt;
  }
}

TEST(Cli, StatsDocumentCarriesAspect) {
  auto ranked = run({"-q", "rank", "--in", fixture("top3_scored.jsonl")});
  auto r = run({"-q", "stats", "--annotations", fixture("top3_annotations.csv"), "--method-scheme",
                fixture("schemes/cs.CL-method.txt"), "--goal-scheme", fixture("schemes/cs.CL-goal.txt"), "--aspect",
                "task"},
               ranked.out);
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = parse_stats(nlohmann::json::parse(r.out));
  EXPECT_EQ(doc.pairs, 3u);
  ASSERT_EQ(doc.distribution.rows.size(), 2u);
  EXPECT_EQ(doc.distribution.rows[0].label, "Text representations");
  EXPECT_EQ(doc.distribution.rows[0].count, 2u);
}

TEST(Cli, ReportRankedTableWithLabels) {
  auto r = run({"-q", "report", "--in", fixture("top3_scored.jsonl"), "--format", "csv", "--annotations",
                fixture("top3_annotations.csv"), "--method-scheme", fixture("schemes/cs.CL-method.txt"),
                "--goal-scheme", fixture("schemes/cs.CL-goal.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Emotion Detection"), std::string::npos);
  EXPECT_EQ(run({"report", "--format", "svg", "--in", fixture("top3_scored.jsonl")}).code, 1);
}

TEST(Cli, ValidateAnnotationsExitCodes) {
  auto ok = run({"-q", "validate-annotations", "--file", fixture("top3_annotations.csv"), "--method-scheme",
                 fixture("schemes/cs.CL-method.txt"), "--goal-scheme", fixture("schemes/cs.CL-goal.txt")});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("1809.01083,Emotion Detection,Data,Difficult task"), std::string::npos);

  // Without method/goal schemes those labels cannot be checked.
  auto missing = run({"validate-annotations", "--file", fixture("top3_annotations.csv")});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("no-scheme"), std::string::npos);

  auto nested = run({"-q", "annotate", "validate", "--file", fixture("synthetic_annotations.csv")});
  EXPECT_EQ(nested.code, 0) << nested.err;
  EXPECT_EQ(run({"validate-annotations"}).code, 1);
}

TEST(Cli, HarvestAndCitationsReplayFromCache) {
  auto cache = fixture("harvest_cache");
  auto h = run({"-q", "harvest", "--replay", "--cache-dir", cache, "--from", "2018-01-01", "--to", "2018-12-31"});
  ASSERT_EQ(h.code, 0) << h.err;
  std::istringstream hin(h.out);
  auto corpus = read_corpus(hin).corpus;
  EXPECT_EQ(corpus.size(), 5u);
  EXPECT_TRUE(corpus.find("1810.04805"));
  EXPECT_EQ(h.out, run({"-q", "harvest", "--replay", "--cache-dir", cache, "--from", "2018-01-01", "--to", "2018-12-31"}).out);

  auto c = run({"-q", "citations", "--replay", "--cache-dir", cache}, h.out);
  ASSERT_EQ(c.code, 0) << c.err;
  std::istringstream cin(c.out);
  auto cited = read_corpus(cin).corpus;
  EXPECT_EQ(cited.find("1802.05365")->citation_count, 261u);
  EXPECT_EQ(cited.find("1809.01083")->citation_asof, Date(2018, 12, 31));
  EXPECT_FALSE(cited.find("1806.00001")->citation_count);
}

TEST(Cli, HarvestNeedsDates) {
  EXPECT_EQ(run({"harvest", "--replay", "--cache-dir", fixture("harvest_cache")}).code, 1);
}

TEST(Cli, UnreachableEndpointIsEnvironmentError) {
  auto dir = fs::temp_directory_path() / "arxtrend_cli_unreachable";
  fs::remove_all(dir);
  RefusingTransport t;
  http::ManualClock clock;
  auto r = run({"harvest", "--from", "2018-01-01", "--to", "2018-01-31", "--retries", "2", "--cache-dir", dir.string()},
               {}, &t, &clock);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(t.calls, 3);
}

TEST(Cli, MissingInputFileIsEnvironmentError) {
  EXPECT_EQ(run({"score", "--corpus", "/nonexistent/corpus.jsonl"}).code, 2);
}

TEST(Cli, OutFlagWritesFile) {
  auto path = fs::temp_directory_path() / "arxtrend_cli_out.jsonl";
  fs::remove(path);
  auto r = run({"-q", "--out", path.string(), "rank", "--in", fixture("top3_scored.jsonl"), "--top", "1"});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  EXPECT_EQ(read_scored(in).at(0).paper_id, "1809.01083");
}
