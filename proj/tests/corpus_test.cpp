#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "arxtrend/corpus.hpp"
#include "oracle.hpp"

using namespace arxtrend;

namespace {

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "arxtrend_corpus_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

LoadResult load_text(const std::string& text, const LoadOptions& opts = {}) {
  std::istringstream in(text);
  return read_corpus(in, opts);
}

const char* kBert =
    R"({"id":"1810.04805","title":"BERT","abstract":"a","authors":["J. Devlin","M. Chang"],"field":"cs.CL","submitted":"2018-10-11","citations":20,"citations_asof":"2018-12-31"})";

}  // namespace

TEST(Date, ParsesIsoDays) {
  auto d = Date::parse("2018-10-11");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->to_string(), "2018-10-11");
  EXPECT_TRUE(Date::parse("2016-02-29"));
  EXPECT_FALSE(Date::parse("2018-02-29"));
  EXPECT_FALSE(Date::parse("2019-13-40"));
  EXPECT_FALSE(Date::parse("2018-1-01"));
  EXPECT_FALSE(Date::parse("2018/01/01"));
  EXPECT_EQ(Date(2018, 1, 11) - Date(2018, 1, 1), 10);
  EXPECT_EQ(Date(2018, 12, 31).plus_days(1), Date(2019, 1, 1));
}

TEST(ArxivId, SplitsVersionSuffix) {
  EXPECT_EQ(ArxivId::parse("1810.04805v2").base, "1810.04805");
  EXPECT_EQ(ArxivId::parse("1810.04805v2").version, 2u);
  EXPECT_EQ(ArxivId::parse("1810.04805").version, 0u);
  EXPECT_EQ(ArxivId::parse("cs/0112017v1").base, "cs/0112017");
  EXPECT_EQ(ArxivId::parse("hep-th/9901001").base, "hep-th/9901001");
  EXPECT_EQ(ArxivId::parse("abcv").base, "abcv");
}

TEST(LoadCorpus, SingleRecordIsIdentity) {
  auto r = load_text(std::string(kBert) + "\n");
  ASSERT_EQ(r.corpus.size(), 1u);
  EXPECT_TRUE(r.report.skipped.empty());
  const auto& p = r.corpus.records()[0];
  EXPECT_EQ(p.paper_id, "1810.04805");
  EXPECT_EQ(p.title, "BERT");
  EXPECT_EQ(p.abstract, "a");
  EXPECT_EQ(p.authors, (std::vector<std::string>{"J. Devlin", "M. Chang"}));
  EXPECT_EQ(p.field, Field::CsCl);
  EXPECT_EQ(p.submitted_date, Date(2018, 10, 11));
  EXPECT_EQ(p.citation_count, 20u);
  EXPECT_EQ(p.citation_asof, Date(2018, 12, 31));
}

TEST(LoadCorpus, HighestVersionWinsRegardlessOfOrder) {
  std::string v1 = R"({"id":"1810.04805v1","title":"old","abstract":"","authors":[],"field":"cs.CL","submitted":"2018-10-11"})";
  std::string v2 = R"({"id":"1810.04805v2","title":"new","abstract":"","authors":[],"field":"cs.CL","submitted":"2018-10-11"})";
  for (const auto& text : {v1 + "\n" + v2 + "\n", v2 + "\n" + v1 + "\n"}) {
    auto r = load_text(text);
    ASSERT_EQ(r.corpus.size(), 1u);
    EXPECT_EQ(r.corpus.records()[0].paper_id, "1810.04805");
    EXPECT_EQ(r.corpus.records()[0].title, "new");
    EXPECT_EQ(r.report.versions_collapsed, 1u);
    EXPECT_TRUE(r.report.skipped.empty());
  }
}

TEST(LoadCorpus, InvalidCalendarDateIsSkippedAndReported) {
  std::string bad = R"({"id":"x1","title":"t","abstract":"","authors":[],"field":"cs.CL","submitted":"2019-13-40"})";
  auto r = load_text(std::string(kBert) + "\n" + bad + "\n");
  EXPECT_EQ(r.corpus.size(), 1u);
  ASSERT_EQ(r.report.skipped.size(), 1u);
  EXPECT_EQ(r.report.skipped[0].line, 2u);
  EXPECT_EQ(r.report.skipped[0].reason, SkipReason::InvalidDate);
}

TEST(LoadCorpus, ReportsEachMalformedLineOnce) {
  std::string text;
  text += "not json\n";                                                                             // 1
  text += R"({"id":"a","title":"t","abstract":"","authors":[],"field":"cs.CL"})" "\n";              // 2 missing key
  text += R"({"id":"b","title":"t","abstract":"","authors":[],"field":"cs.XX","submitted":"2018-01-01"})" "\n";  // 3
  text += R"({"id":"c","title":"t","abstract":"","authors":[],"field":"cs.CL","submitted":"2018-01-01","citations":3})" "\n";  // 4
  text += R"({"id":"d","title":"t","abstract":"","authors":[],"field":"cs.CL","submitted":"2018-01-01","citations":-1,"citations_asof":"2018-12-31"})" "\n";  // 5
  text += R"({"id":"e","title":"t","abstract":"","authors":[],"field":"cs.CL","submitted":"1990-12-31"})" "\n";  // 6
  text += R"({"id":"f","title":"t","abstract":"","authors":[],"field":"cs.CL","submitted":"2999-01-01"})" "\n";  // 7
  text += R"({"id":"","title":"t","abstract":"","authors":[],"field":"cs.CL","submitted":"2018-01-01"})" "\n";  // 8
  text += R"({"id":"g","title":"t","abstract":"","authors":[1],"field":"cs.CL","submitted":"2018-01-01"})" "\n";  // 9
  text += "\n";                                                                                     // 10 blank, ignored
  text += R"({"id":"h","title":"t","abstract":"","authors":[],"field":"cs.CL","submitted":"2018-01-01","extra":true})" "\n";  // 11 ok
  auto r = load_text(text);
  EXPECT_EQ(r.corpus.size(), 1u);
  std::vector<std::pair<std::size_t, SkipReason>> got;
  for (const auto& s : r.report.skipped) got.emplace_back(s.line, s.reason);
  std::vector<std::pair<std::size_t, SkipReason>> want{
      {1, SkipReason::MalformedJson},   {2, SkipReason::MissingKey},      {3, SkipReason::UnknownField},
      {4, SkipReason::InvalidCitation}, {5, SkipReason::InvalidCitation}, {6, SkipReason::DateOutOfRange},
      {7, SkipReason::DateOutOfRange},  {8, SkipReason::EmptyId},         {9, SkipReason::MalformedJson}};
  EXPECT_EQ(got, want);
}

TEST(LoadCorpus, FieldMismatchIsFatal) {
  std::string lg = R"({"id":"z","title":"t","abstract":"","authors":[],"field":"cs.LG","submitted":"2018-01-01"})";
  EXPECT_THROW(load_text(std::string(kBert) + "\n" + lg + "\n"), UserError);
  LoadOptions opts;
  opts.expected_field = Field::CsLg;
  EXPECT_THROW(load_text(std::string(kBert) + "\n", opts), UserError);
}

TEST(LoadCorpus, UnreadableFileIsEnvironmentError) {
  EXPECT_THROW(load_corpus("/nonexistent/dir/corpus.jsonl"), EnvironmentError);
}

TEST(SaveCorpus, EmptyCorpusWritesEmptyFile) {
  auto path = temp_path("empty.jsonl");
  EXPECT_EQ(save_corpus(Corpus(Field::CsLg), path), 0u);
  EXPECT_EQ(read_bytes(path), "");
  auto r = load_corpus(path);
  EXPECT_TRUE(r.corpus.empty());
  EXPECT_TRUE(r.report.skipped.empty());
}

TEST(SaveCorpus, ThreeRecordRoundTrip) {
  std::mt19937_64 rng(3);
  oracle::CorpusShape shape;
  shape.max_papers = 3;
  Corpus c(Field::CsCl);
  while (c.size() != 3) c = oracle::random_corpus(rng, shape);
  auto path = temp_path("three.jsonl");
  EXPECT_EQ(save_corpus(c, path), 3u);
  EXPECT_EQ(load_corpus(path).corpus, c);
}

TEST(SaveCorpus, AbsentCitationFieldsAreOmittedGolden) {
  auto golden = std::filesystem::path(ARXTREND_FIXTURE_DIR) / "golden_mixed.jsonl";
  auto loaded = load_corpus(golden);
  ASSERT_EQ(loaded.corpus.size(), 2u);
  EXPECT_FALSE(loaded.corpus.records()[0].citation_count);
  EXPECT_FALSE(loaded.corpus.records()[0].citation_asof);
  auto out = temp_path("golden_copy.jsonl");
  save_corpus(loaded.corpus, out);
  EXPECT_EQ(read_bytes(out), read_bytes(golden));
  auto reloaded = load_corpus(out);
  EXPECT_FALSE(reloaded.corpus.records()[0].citation_count);
}

TEST(SaveCorpus, UnwritablePathIsEnvironmentError) {
  EXPECT_THROW(save_corpus(Corpus(), "/nonexistent/dir/out.jsonl"), EnvironmentError);
}

TEST(CorpusProperty, SaveLoadIsIdentity) {
  std::mt19937_64 rng(11);
  oracle::CorpusShape shape;
  shape.max_papers = 60;
  for (int i = 0; i < 100; ++i) {
    auto c = oracle::random_corpus(rng, shape, i % 2 ? Field::CsLg : Field::CsCl);
    std::stringstream buf;
    write_corpus(c, buf);
    auto r = read_corpus(buf);
    ASSERT_EQ(r.corpus, c);
    ASSERT_TRUE(r.report.skipped.empty());
  }
}

TEST(CorpusProperty, LoadIsIndependentOfLineOrder) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 50; ++i) {
    std::vector<std::string> lines;
    std::uniform_int_distribution<int> id_dist(0, 9), ver_dist(0, 3), count_dist(0, 50);
    for (int k = 0; k < 30; ++k) {
      std::string id = "1801.0000" + std::to_string(id_dist(rng));
      int v = ver_dist(rng);
      if (v) id += "v" + std::to_string(v);
      lines.push_back(R"({"id":")" + id + R"(","title":"t)" + std::to_string(count_dist(rng)) +
                      R"(","abstract":"","authors":[],"field":"cs.CL","submitted":"2018-01-01"})");
    }
    std::string a, b;
    for (const auto& l : lines) a += l + "\n";
    std::shuffle(lines.begin(), lines.end(), rng);
    for (const auto& l : lines) b += l + "\n";
    auto ra = load_text(a), rb = load_text(b);
    ASSERT_EQ(ra.corpus, rb.corpus);
    ASSERT_TRUE(std::is_sorted(ra.corpus.records().begin(), ra.corpus.records().end(),
                               [](const auto& x, const auto& y) { return x.paper_id < y.paper_id; }));
    ASSERT_EQ(ra.report.skipped.size() + ra.report.versions_collapsed + ra.corpus.size(), lines.size());
  }
}
