#include <algorithm>
#include <random>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "kgbench/eval.hpp"
#include "reference.hpp"

using namespace kgbench;
using ::testing::ElementsAre;
using ::testing::HasSubstr;

namespace {

GoldAnswer path_gold(std::vector<std::vector<std::string>> paths) {
  GoldAnswer g;
  g.kind = AnswerKind::EntityPathSet;
  g.paths = std::move(paths);
  return g;
}

GoldAnswer count_gold(std::int64_t n) {
  GoldAnswer g;
  g.kind = AnswerKind::Count;
  g.count = n;
  return g;
}

EvalRecord rec(const std::string& model, Format f, TaskKind t, std::size_t i, int score,
               bool pseudo = false) {
  EvalRecord r;
  r.model_id = model;
  r.format = f;
  r.task = t;
  r.instance_index = i;
  r.pseudo = pseudo;
  r.score = score;
  return r;
}

const std::vector<std::vector<std::string>> kUkrainePaths = {{"Ukraine", "South Korea", "Colombia"}};

}  // namespace

TEST(ParseAnswer, Integer) {
  auto p = parse_answer(TaskKind::AggByRelation, "Answer: 3");
  ASSERT_TRUE(p.ok);
  EXPECT_EQ(p.count, 3);
}

TEST(ParseAnswer, Path) {
  auto p = parse_answer(TaskKind::ShortestPath, "Answer: Ukraine -> South Korea -> Colombia");
  ASSERT_TRUE(p.ok);
  EXPECT_THAT(p.path, ElementsAre("Ukraine", "South Korea", "Colombia"));
  p = parse_answer(TaskKind::ShortestPath, "Answer: [Ukraine \xe2\x86\x92 South Korea, Colombia].");
  EXPECT_THAT(p.path, ElementsAre("Ukraine", "South Korea", "Colombia"));
}

TEST(ParseAnswer, LastMarkerWins) {
  auto p = parse_answer(TaskKind::AggByRelation, "The answer is likely 4.\nAnswer: 4");
  ASSERT_TRUE(p.ok);
  EXPECT_EQ(p.count, 4);
  p = parse_answer(TaskKind::AggByRelation, "Answer: 2\nOn reflection...\nAnswer: 5");
  EXPECT_EQ(p.count, 5);
}

TEST(ParseAnswer, Booleans) {
  for (auto [text, value] : std::vector<std::pair<std::string, bool>>{
           {"Answer: True", true},
           {"answer: yes.", true},
           {"**Answer:** FALSE", false},
           {"Answer:\n\nNo", false},
           {"I checked every edge.\nTrue", true}}) {
    auto p = parse_answer(TaskKind::TripleRetrieval, text);
    ASSERT_TRUE(p.ok) << text;
    EXPECT_EQ(p.truth, value) << text;
  }
  EXPECT_FALSE(parse_answer(TaskKind::TripleRetrieval, "Answer: maybe").ok);
}

TEST(ParseAnswer, Failures) {
  auto p = parse_answer(TaskKind::HighestDegree, "It is probably Brunei.");
  EXPECT_FALSE(p.ok);
  EXPECT_EQ(p.error, "no answer marker");
  EXPECT_FALSE(parse_answer(TaskKind::AggByRelation, "There are 3 of them").ok);
  EXPECT_FALSE(parse_answer(TaskKind::AggByRelation, "Answer: 3rd").ok);
  EXPECT_FALSE(parse_answer(TaskKind::AggByRelation, "").ok);
  EXPECT_FALSE(parse_answer(TaskKind::ShortestPath, "Answer: Ukraine -> -> Colombia").ok);
  EXPECT_TRUE(parse_answer(TaskKind::AggByRelation, "3").ok);
}

TEST(ParseAnswer, Label) {
  auto p = parse_answer(TaskKind::HighestDegree, "Answer: \"Andhra Pradesh\"  ");
  ASSERT_TRUE(p.ok);
  EXPECT_EQ(p.label, "Andhra Pradesh");
}

TEST(ScoreExact, Examples) {
  GoldAnswer yes;
  yes.truth = true;
  EXPECT_EQ(score_exact(TaskKind::TripleRetrieval, parse_answer(TaskKind::TripleRetrieval, "Answer: True"), yes), 1);
  EXPECT_EQ(score_exact(TaskKind::AggByRelation, parse_answer(TaskKind::AggByRelation, "Answer: 3"),
                        count_gold(4)),
            0);
  auto gold = path_gold({{"Ukraine", "Brunei", "Colombia"}, kUkrainePaths[0]});
  EXPECT_EQ(score_exact(TaskKind::ShortestPath,
                        parse_answer(TaskKind::ShortestPath, "Answer: ukraine -> south  korea -> COLOMBIA"),
                        gold),
            1);
  EXPECT_EQ(score_exact(TaskKind::ShortestPath,
                        parse_answer(TaskKind::ShortestPath, "Answer: Ukraine -> Colombia"), gold),
            0);
  GoldAnswer label;
  label.kind = AnswerKind::EntityLabel;
  label.entity = "Andhra Pradesh";
  EXPECT_EQ(score_exact(TaskKind::HighestDegree,
                        parse_answer(TaskKind::HighestDegree, "Answer: andhra pradesh."), label),
            1);
  EXPECT_EQ(score_exact(TaskKind::HighestDegree,
                        parse_answer(TaskKind::HighestDegree, "Answer: 4"), label),
            0);
}

TEST(ScoreExact, PathLabelsContainingSeparators) {
  auto gold = path_gold({{"a, b", "x -> y"}});
  auto p = parse_answer(TaskKind::ShortestPath, "Answer: " + answer_text(gold));
  EXPECT_EQ(score_exact(TaskKind::ShortestPath, p, gold), 1);
}

TEST(ScoreFlexible, VerboseChainOfThought) {
  const std::string raw =
      "Ukraine has a diplomatic relation with South Korea, and South Korea has one with "
      "Colombia, so the path is Ukraine \xe2\x86\x92 South Korea \xe2\x86\x92 Colombia.";
  auto gold = path_gold(kUkrainePaths);
  EXPECT_EQ(score_exact(TaskKind::ShortestPath, parse_answer(TaskKind::ShortestPath, raw), gold), 0);
  EXPECT_EQ(score_flexible_path(raw, kUkrainePaths), 1);
}

TEST(ScoreFlexible, HallucinatedShortcut) {
  const std::string raw = "Ukraine borders Colombia directly: Ukraine -> Colombia.\nAnswer: Ukraine -> Colombia";
  EXPECT_EQ(score_flexible_path(raw, kUkrainePaths), 0);
}

TEST(ScoreFlexible, SeparatorsAndCase) {
  EXPECT_EQ(score_flexible_path("go from ukraine to south korea to colombia", kUkrainePaths), 1);
  EXPECT_EQ(score_flexible_path("**Ukraine**, **South Korea**, **Colombia**", kUkrainePaths), 1);
  EXPECT_EQ(score_flexible_path("Ukraine South Korea Colombia", kUkrainePaths), 0);
  EXPECT_EQ(score_flexible_path("Ukraine -> South Korean -> Colombia", kUkrainePaths), 0);
}

TEST(ScoreFlexible, MaximalChainsOnly) {
  const std::vector<std::string> labels = {"Ukraine", "South Korea", "Colombia", "Brunei"};
  const std::string longer = "Ukraine -> South Korea -> Colombia -> Brunei";
  EXPECT_EQ(score_flexible_path(longer, kUkrainePaths), 1);
  EXPECT_EQ(score_flexible_path(longer, kUkrainePaths, labels), 0);
  EXPECT_EQ(score_flexible_path("Brunei, Ukraine -> South Korea -> Colombia", kUkrainePaths, labels), 0);
  EXPECT_EQ(score_flexible_path("So: Ukraine -> South Korea -> Colombia.", kUkrainePaths, labels), 1);
}

TEST(ScoreRecord, FlexibleDominatesExact) {
  std::mt19937 rng(7);
  const std::vector<std::string> pieces = {"Ukraine", "South Korea", "Colombia", " -> ", ", ",
                                           " to ", "Answer: ", "\n", "so ", "Brunei",
                                           "Ukraine -> South Korea -> Colombia"};
  auto gold = path_gold(kUkrainePaths);
  int strict = 0;
  for (int i = 0; i < 2000; ++i) {
    EvalRecord r = rec("m", Format::ListOfEdges, TaskKind::ShortestPath, 0, 0);
    int n = std::uniform_int_distribution<int>(1, 12)(rng);
    for (int k = 0; k < n; ++k)
      r.raw_response += pieces[std::uniform_int_distribution<std::size_t>(0, pieces.size() - 1)(rng)];
    score_record(r, gold, {"Ukraine", "South Korea", "Colombia", "Brunei"});
    ASSERT_TRUE(r.flexible_score);
    ASSERT_GE(*r.flexible_score, *r.score) << r.raw_response;
    strict += *r.flexible_score > *r.score;
  }
  EXPECT_GT(strict, 0);
}

TEST(ScoreRecord, OnlyShortestPathGetsFlexible) {
  EvalRecord r = rec("m", Format::ListOfEdges, TaskKind::AggByRelation, 0, 0);
  r.raw_response = "Answer: 2";
  score_record(r, count_gold(2));
  EXPECT_EQ(r.score, 1);
  EXPECT_FALSE(r.flexible_score);
  EXPECT_EQ(r.parsed, 2);
}

TEST(EvalRecord, JsonRoundTrip) {
  EvalRecord r = rec("gpt", Format::RDFTurtle, TaskKind::ShortestPath, 7, 1, true);
  r.flexible_score = 1;
  r.raw_response = "Answer: A -> B";
  r.parsed = nlohmann::ordered_json::array({"A", "B"});
  r.meta = {{"path_length", 1}};
  r.input_tokens = 120;
  auto back = EvalRecord::from_json(nlohmann::json::parse(r.to_json().dump()));
  EXPECT_EQ(back.to_json().dump(), r.to_json().dump());
  EXPECT_EQ(back.key(), "ShortestPath/7/RDFTurtle/gpt/pseudo");
}

TEST(Aggregate, CellAccuracy) {
  std::vector<EvalRecord> rs;
  for (int i = 0; i < 10; ++i)
    rs.push_back(rec("m", Format::ListOfEdges, TaskKind::AggByRelation, i, i < 7));
  auto s = aggregate(rs);
  const auto& c = s.cells.at({Format::ListOfEdges, "m", TaskKind::AggByRelation, false});
  EXPECT_EQ(c.n, 10u);
  EXPECT_DOUBLE_EQ(c.accuracy(), 0.7);
  EXPECT_THAT(s.to_csv(), HasSubstr("ListOfEdges,m,AggByRelation,false,0.700000,10,0,0,"));
}

TEST(Aggregate, ErrorsLeaveTheDenominator) {
  std::vector<EvalRecord> rs = {rec("m", Format::ListOfEdges, TaskKind::AggByRelation, 0, 1),
                                rec("m", Format::ListOfEdges, TaskKind::AggByRelation, 1, 0)};
  EvalRecord err = rec("m", Format::ListOfEdges, TaskKind::AggByRelation, 2, 0);
  err.score.reset();
  err.error = "HTTP 500";
  rs.push_back(err);
  auto s = aggregate(rs);
  const auto& c = s.cells.at({Format::ListOfEdges, "m", TaskKind::AggByRelation, false});
  EXPECT_EQ(c.n, 2u);
  EXPECT_EQ(c.errors, 1u);
  EXPECT_DOUBLE_EQ(c.accuracy(), 0.5);
  EXPECT_EQ(s.total_errors, 1u);
}

TEST(Aggregate, EmptyInput) {
  try {
    aggregate({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "no records");
  }
}

TEST(BestFormat, HigherMeanWins) {
  std::vector<EvalRecord> rs;
  for (int i = 0; i < 100; ++i) {
    rs.push_back(rec("m", Format::ListOfEdges, TaskKind::AggByRelation, i, i < 41));
    rs.push_back(rec("m", Format::StructuredJSON, TaskKind::AggByRelation, i, i < 42));
  }
  auto best = aggregate(rs).best_format.at("m");
  EXPECT_EQ(best.format, Format::StructuredJSON);
  EXPECT_FALSE(best.tie);
}

TEST(BestFormat, TiesAreFlaggedAndAlphabetical) {
  std::vector<EvalRecord> rs;
  for (Format f : kAllFormats)
    for (int i = 0; i < 4; ++i) rs.push_back(rec("m", f, TaskKind::HighestDegree, i, i % 2));
  auto best = aggregate(rs).best_format.at("m");
  EXPECT_TRUE(best.tie);
  EXPECT_EQ(best.tied.size(), 5u);
  EXPECT_EQ(best.format, Format::JSONLD);
}

TEST(Aggregate, OrderIndependent) {
  auto rs = reference::records(20);
  auto a = aggregate(rs).to_json().dump();
  std::mt19937 rng(3);
  std::shuffle(rs.begin(), rs.end(), rng);
  EXPECT_EQ(aggregate(rs).to_json().dump(), a);
}

TEST(Aggregate, Breakdowns) {
  std::vector<EvalRecord> rs;
  for (std::int64_t count : {1, 2, 7, 12}) {
    EvalRecord r = rec("m", Format::ListOfEdges, TaskKind::AggByRelation, count, count < 5);
    r.meta = {{"direction", "incoming"}, {"true_count", count}};
    r.parsed = count;
    rs.push_back(r);
  }
  EvalRecord sp = rec("m", Format::ListOfEdges, TaskKind::ShortestPath, 0, 0);
  sp.meta = {{"path_length", 2}};
  sp.parsed = nlohmann::ordered_json::array({"A", "B"});
  sp.flexible_score = 1;
  rs.push_back(sp);
  auto s = aggregate(rs);
  std::vector<std::string> bins;
  for (const auto& b : s.breakdowns)
    if (b.dimension == "aggregation_size") bins.push_back(b.bin);
  EXPECT_THAT(bins, ElementsAre("1", "10+", "2", "5-9"));
  bool found = false;
  for (const auto& p : s.pairs)
    if (p.dimension == "predicted_path_length") {
      EXPECT_EQ(p.truth, "2");
      EXPECT_EQ(p.predicted, "1");
      found = true;
    }
  EXPECT_TRUE(found);
  EXPECT_EQ(s.cells.at({Format::ListOfEdges, "m", TaskKind::ShortestPath, false}).flexible_accuracy(),
            1.0);
}

TEST(AggregationBin, Edges) {
  EXPECT_EQ(aggregation_bin(1), "1");
  EXPECT_EQ(aggregation_bin(4), "4");
  EXPECT_EQ(aggregation_bin(5), "5-9");
  EXPECT_EQ(aggregation_bin(9), "5-9");
  EXPECT_EQ(aggregation_bin(10), "10+");
}

TEST(ReferenceTable, RowMeansReproduce) {
  auto s = aggregate(reference::records());
  int checked = 0;
  for (const auto& row : reference::full_results()) {
    if (row.kind == "format_overall") {
      Format f = format_from_string(row.format);
      for (const auto& [task, v] : row.task)
        EXPECT_NEAR(s.format_task_overall.at({f, task, row.pseudo}), v, 0.001);
      EXPECT_NEAR(s.format_overall.at({f, row.pseudo}), row.overall, 0.001);
      ++checked;
    } else if (row.kind == "all_formats") {
      for (const auto& [task, v] : row.task)
        EXPECT_NEAR(s.all_formats_task.at({row.model, task, row.pseudo}), v, 0.001);
      EXPECT_NEAR(s.all_formats_model.at({row.model, row.pseudo}), row.overall, 0.001);
      ++checked;
    } else if (row.kind == "overall_score") {
      for (const auto& [task, v] : row.task)
        EXPECT_NEAR(s.overall_task.at({task, row.pseudo}), v, 0.001);
      EXPECT_NEAR(s.overall.at(row.pseudo), row.overall, 0.001);
      ++checked;
    } else {
      EXPECT_NEAR(s.model_overall.at({format_from_string(row.format), row.model, row.pseudo}),
                  row.overall, 0.001);
    }
  }
  EXPECT_EQ(checked, 26);
  EXPECT_THAT(s.digest(), HasSubstr("Overall Score: 0.385 plain / 0.383 pseudo"));
}

TEST(ReferenceTable, BestFormatPerModel) {
  auto s = aggregate(reference::records());
  auto expected = reference::best_formats();
  ASSERT_EQ(s.best_format.size(), expected.size());
  for (const auto& [model, format] : expected)
    EXPECT_EQ(to_string(s.best_format.at(model).format), format) << model;
  EXPECT_EQ(s.best_format.at("nova-pro").format, Format::JSONLD);
  EXPECT_TRUE(s.best_format.at("llama3.2-1b-instruct").tie);
}
