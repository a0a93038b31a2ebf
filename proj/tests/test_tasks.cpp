#include <cmath>
#include <map>
#include <set>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "kgbench/tasks.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace kgbench;
using kgbench::testing::appendix_fixture;
using kgbench::testing::id;
using kgbench::testing::rel;
using ::testing::HasSubstr;

namespace {

KnowledgeGraph without_triple(const KnowledgeGraph& g, const Triple& drop) {
  KnowledgeGraph::Builder b;
  for (std::uint32_t i = 0; i < g.entity_count(); ++i) b.add_entity(g.entity(EntityId{i}));
  for (std::uint32_t i = 0; i < g.relation_count(); ++i) b.add_relation(g.relation(RelationId{i}));
  for (const Triple& t : g.triples())
    if (t != drop) b.add_triple(t);
  return std::move(b).build();
}

std::vector<std::string> labels(const KnowledgeGraph& g, const Path& p) {
  std::vector<std::string> out;
  for (EntityId e : p) out.push_back(g.label(e));
  return out;
}

TaskParams small_params(TaskKind task) {
  TaskParams p = TaskParams::defaults(task);
  p.sampling.num_seed_entities = std::min<std::size_t>(p.sampling.num_seed_entities, 3);
  p.sampling.max_edges = 20;
  p.sampling.min_degree = 1;
  return p;
}

}  // namespace

TEST(TaskNames, RoundTrip) {
  for (TaskKind t : kAllTasks) EXPECT_EQ(task_from_string(to_string(t)), t);
  EXPECT_THROW(task_from_string("Nope"), ConfigError);
}

TEST(TripleRetrieval, FixturePositiveAndNegative) {
  KnowledgeGraph g = appendix_fixture();
  Query q;
  q.task = TaskKind::TripleRetrieval;
  q.triple = {id(g, "Brunei"), rel(g, "member of"), id(g, "World Trade Organization")};
  Gold yes{AnswerKind::Boolean, true, {}, 0, {}};
  EXPECT_NO_THROW(verify(g, q, yes));
  q.triple.object = id(g, "G20");
  Gold no{AnswerKind::Boolean, false, {}, 0, {}};
  EXPECT_NO_THROW(verify(g, q, no));
  EXPECT_THROW(verify(g, q, yes), OracleMismatch);
}

TEST(TripleRetrieval, GeneratedLabelsMatchMembership) {
  Rng gen(61);
  for (int trial = 0; trial < 200; ++trial) {
    KnowledgeGraph g = kgbench::testing::random_graph(gen);
    for (bool positive : {true, false}) {
      Rng rng(trial);
      try {
        Posed p = gen_triple_retrieval(g, rng, positive);
        bool present = false;
        for (const Triple& t : g.triples()) present |= t == p.query.triple;
        EXPECT_EQ(present, positive);
        EXPECT_EQ(p.gold.truth, positive);
      } catch (const GenerationError&) {
        // Only possible when the graph is complete over its labels.
        EXPECT_FALSE(positive);
        EXPECT_EQ(g.triple_count(), g.entity_count() * g.entity_count() * g.relation_count());
      }
    }
  }
}

TEST(TripleRetrieval, SaturatedRelationSlotFallsBack) {
  KnowledgeGraph::Builder b;
  auto a = b.add_entity({"a", "", true, "a"});
  auto c = b.add_entity({"c", "", true, "c"});
  auto r = b.add_relation({"r", "r"});
  b.add_triple(a, r, c);
  KnowledgeGraph g = std::move(b).build();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Posed p = gen_triple_retrieval(g, rng, false);
    EXPECT_FALSE(g.contains(p.query.triple));
    EXPECT_EQ(p.query.triple.relation, r);
  }
}

TEST(TripleRetrieval, BatchIsBalanced) {
  for (std::size_t n : {1u, 10u, 99u, 100u}) {
    auto labels = triple_retrieval_labels(5, n);
    EXPECT_EQ(static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true)),
              (n + 1) / 2);
  }
  EXPECT_EQ(triple_retrieval_labels(5, 100), triple_retrieval_labels(5, 100));
  EXPECT_NE(triple_retrieval_labels(5, 100), triple_retrieval_labels(6, 100));
}

TEST(ShortestPath, FixtureUkraineColombia) {
  KnowledgeGraph k = appendix_fixture();
  TaskParams p = TaskParams::defaults(TaskKind::ShortestPath);
  p.sampling.num_seed_entities = 3;
  p.sampling.max_edges = 10;
  Rng rng(1);
  TaskInstance inst = shortest_path_instance(k, p, rng, id(k, "Ukraine"), id(k, "Colombia"));
  const KnowledgeGraph& g = inst.subgraph.graph;
  ASSERT_EQ(inst.gold.paths.size(), 1u);
  EXPECT_THAT(labels(g, inst.gold.paths[0]),
              ::testing::ElementsAre("Ukraine", "South Korea", "Colombia"));
  EXPECT_EQ(meta_json(g, inst.query, inst.gold)["path_length"], 2);
}

TEST(ShortestPath, AdjacentEndpoints) {
  KnowledgeGraph k = appendix_fixture();
  TaskParams p = TaskParams::defaults(TaskKind::ShortestPath);
  p.sampling.num_seed_entities = 2;
  p.sampling.max_edges = 10;
  Rng rng(1);
  TaskInstance inst = shortest_path_instance(k, p, rng, id(k, "Guatemala"), id(k, "European Union"));
  ASSERT_EQ(inst.gold.paths.size(), 1u);
  EXPECT_EQ(inst.gold.paths[0].size(), 2u);
  EXPECT_THROW(shortest_path_instance(k, p, rng, id(k, "Brunei"), id(k, "Brunei")),
               GenerationError);
  EXPECT_THROW(shortest_path_instance(k, p, rng, id(k, "Brunei"), id(k, "G20")), GenerationError);
}

TEST(ShortestPath, GoldMatchesExhaustiveSearchInEmittedSubgraph) {
  Rng gen(67);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    KnowledgeGraph k = kgbench::testing::random_graph(gen);
    TaskParams p = small_params(TaskKind::ShortestPath);
    p.sampling.max_edges = 8;
    EntityId s{static_cast<std::uint32_t>(gen.below(k.entity_count()))};
    EntityId t{static_cast<std::uint32_t>(gen.below(k.entity_count()))};
    if (s == t || !bfs_distance(k, s, t)) continue;
    Rng rng(trial);
    TaskInstance inst;
    try {
      inst = shortest_path_instance(k, p, rng, s, t);
    } catch (const Error& e) {
      // More protected edges than the budget allows.
      EXPECT_THAT(e.what(), HasSubstr("exceed max_edges"));
      continue;
    }
    const KnowledgeGraph& g = inst.subgraph.graph;
    EXPECT_EQ(inst.gold.paths, oracle::shortest_paths(g, inst.query.source, inst.query.target));
    EXPECT_EQ(inst.gold.paths.front().size() - 1, *bfs_distance(k, s, t));
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(AggByRelation, FixtureCounts) {
  KnowledgeGraph g = appendix_fixture();
  EXPECT_EQ(agg_by_relation_count(g, id(g, "South Korea"), rel(g, "diplomatic relation"),
                                  Direction::Outgoing),
            2u);
  EXPECT_EQ(agg_by_relation_count(g, id(g, "European Union"), rel(g, "diplomatic relation"),
                                  Direction::Incoming),
            1u);
  EXPECT_EQ(agg_by_relation_count(g, id(g, "Telugu"), rel(g, "member of"), Direction::Outgoing),
            0u);
}

TEST(AggByRelation, FixtureAnswerSetAndUniqueThree) {
  KnowledgeGraph g = appendix_fixture();
  std::set<std::size_t> values;
  std::vector<AggTuple> threes;
  for (const AggTuple& t : agg_by_relation_tuples(g)) {
    values.insert(t.count);
    if (t.count == 3) threes.push_back(t);
  }
  EXPECT_EQ(values, (std::set<std::size_t>{1, 2, 3}));
  ASSERT_EQ(threes.size(), 1u);
  EXPECT_EQ(threes[0].anchor, id(g, "Andhra Pradesh"));
  EXPECT_EQ(threes[0].relation, rel(g, "language used"));
  EXPECT_EQ(threes[0].direction, Direction::Outgoing);
}

TEST(AggByRelation, AnswerValuesAreUniform) {
  // A graph whose tuples are heavily skewed towards count 1.
  KnowledgeGraph g = appendix_fixture();
  std::map<std::int64_t, int> hist;
  Rng rng(71);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++hist[gen_agg_by_relation(g, rng).gold.count];
  ASSERT_EQ(hist.size(), 3u);
  double chi2 = 0;
  const double expected = draws / 3.0;
  for (auto [v, n] : hist) chi2 += (n - expected) * (n - expected) / expected;
  EXPECT_LT(chi2, 13.8);  // chi-square, 2 degrees of freedom, p = 0.001
}

TEST(AggNeighborProperty, FixtureCounts) {
  KnowledgeGraph g = appendix_fixture();
  EXPECT_EQ(agg_neighbor_property_count(g, id(g, "Ukraine"), rel(g, "member of")), 1u);
  EXPECT_EQ(agg_neighbor_property_count(g, id(g, "Guatemala"), rel(g, "diplomatic relation")),
            0u);
  KnowledgeGraph::Builder b;
  auto lone = b.add_entity({"lone", "", true, "l"});
  b.add_relation({"r", "r"});
  KnowledgeGraph iso = std::move(b).build();
  EXPECT_EQ(agg_neighbor_property_count(iso, lone, RelationId{0}), 0u);
}

TEST(AggNeighborProperty, SelfLoopMakesAnchorItsOwnNeighbor) {
  KnowledgeGraph::Builder b;
  auto s = b.add_entity({"s", "", true, "s"});
  auto r = b.add_relation({"r", "r"});
  b.add_triple(s, r, s);
  KnowledgeGraph g = std::move(b).build();
  EXPECT_EQ(agg_neighbor_property_count(g, s, r), 1u);
  EXPECT_EQ(oracle::agg_neighbor_property(g, s, r), 1u);
}

TEST(AggNeighborProperty, FixtureGeneratorPatterns) {
  KnowledgeGraph g = appendix_fixture();
  std::set<std::int64_t> seen;
  Rng rng(73);
  for (int i = 0; i < 500; ++i) {
    Posed p = gen_agg_neighbor_property(g, rng);
    EXPECT_EQ(static_cast<std::size_t>(p.gold.count),
              oracle::agg_neighbor_property(g, p.query.anchor, p.query.relation));
    seen.insert(p.gold.count);
  }
  std::set<std::int64_t> want;
  for (auto v : oracle::agg_neighbor_property_answers(g)) want.insert(static_cast<std::int64_t>(v));
  EXPECT_EQ(seen, want);
}

TEST(HighestDegree, FixtureTieAndResolution) {
  KnowledgeGraph g = appendix_fixture();
  EXPECT_FALSE(pose_highest_degree(g, Direction::Outgoing).has_value());
  Triple drop{id(g, "Andhra Pradesh"), rel(g, "language used"), id(g, "Odia")};
  KnowledgeGraph h = without_triple(g, drop);
  auto p = pose_highest_degree(h, Direction::Outgoing);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(h.label(p->gold.entity), "South Korea");
  EXPECT_EQ(p->gold.count, 3);
}

TEST(HighestDegree, StarCenterIncoming) {
  KnowledgeGraph::Builder b;
  auto c = b.add_entity({"center", "", true, "c"});
  auto r = b.add_relation({"r", "r"});
  for (int i = 0; i < 6; ++i)
    b.add_triple(b.add_entity({"x" + std::to_string(i), "", true, std::to_string(i)}), r, c);
  KnowledgeGraph g = std::move(b).build();
  auto p = pose_highest_degree(g, Direction::Incoming);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->gold.entity, c);
  EXPECT_EQ(p->gold.count, 6);
}

TEST(Oracles, GeneratorsAgreeWithBruteForceOnRandomGraphs) {
  Rng gen(79);
  for (int trial = 0; trial < 200; ++trial) {
    KnowledgeGraph g = kgbench::testing::random_graph(gen);
    Rng rng(trial);

    Posed a = gen_agg_by_relation(g, rng);
    EXPECT_EQ(static_cast<std::size_t>(a.gold.count),
              oracle::agg_by_relation(g, a.query.anchor, a.query.relation,
                                      a.query.direction == Direction::Outgoing));
    std::set<std::size_t> values;
    for (const AggTuple& t : agg_by_relation_tuples(g)) values.insert(t.count);
    EXPECT_EQ(values, oracle::agg_by_relation_answers(g));

    Posed n = gen_agg_neighbor_property(g, rng);
    EXPECT_EQ(static_cast<std::size_t>(n.gold.count),
              oracle::agg_neighbor_property(g, n.query.anchor, n.query.relation));
    values.clear();
    for (const AggTuple& t : agg_neighbor_property_tuples(g)) values.insert(t.count);
    EXPECT_EQ(values, oracle::agg_neighbor_property_answers(g));

    for (int dir = 0; dir < 3; ++dir) {
      auto table = oracle::degree_table(g, dir);
      auto top = *std::max_element(table.begin(), table.end());
      auto winners = std::count(table.begin(), table.end(), top);
      auto p = pose_highest_degree(g, static_cast<Direction>(dir));
      ASSERT_EQ(p.has_value(), winners == 1);
      if (p) {
        EXPECT_EQ(table[p->gold.entity.value], top);
        EXPECT_EQ(static_cast<std::size_t>(p->gold.count), top);
      }
    }
  }
}

TEST(Instances, ReproducibleInIsolationAndVerified) {
  KnowledgeGraph k = appendix_fixture();
  for (TaskKind task : kAllTasks) {
    TaskParams p = small_params(task);
    p.sampling.min_degree = 1;
    p.sampling.num_seed_entities = 2;
    p.sampling.max_edges = 10;
    auto labels = triple_retrieval_labels(3, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      std::optional<bool> pos = task == TaskKind::TripleRetrieval ? std::optional(bool(labels[i]))
                                                                  : std::nullopt;
      TaskInstance a, b;
      try {
        a = generate_instance(k, p, 3, i, pos);
      } catch (const GenerationError&) {
        continue;  // e.g. highest-degree ties on this tiny graph
      }
      b = generate_instance(k, p, 3, i, pos);
      EXPECT_EQ(a.rng_seed, b.rng_seed);
      EXPECT_EQ(a.gold, b.gold);
      EXPECT_EQ(a.subgraph.source_entity, b.subgraph.source_entity);
      EXPECT_NO_THROW(verify(a.subgraph.graph, a.query, a.gold));
    }
  }
}

TEST(Text, QuestionTemplates) {
  KnowledgeGraph g = appendix_fixture();
  Query q;
  q.task = TaskKind::AggByRelation;
  q.anchor = id(g, "South Korea");
  q.relation = rel(g, "diplomatic relation");
  q.direction = Direction::Outgoing;
  auto t = question_text(g, q);
  EXPECT_EQ(t.question,
            "How many outgoing relations of type diplomatic relation does South Korea have?");
  EXPECT_THAT(t.block, HasSubstr("Answer:"));

  q.task = TaskKind::AggNeighborProperty;
  q.anchor = id(g, "Ukraine");
  q.relation = rel(g, "member of");
  EXPECT_EQ(question_text(g, q).question,
            "How many of the directly connected entities to Ukraine have an outgoing property "
            "of type member of in the knowledge graph?");

  q.task = TaskKind::HighestDegree;
  q.direction = Direction::Total;
  EXPECT_THAT(question_text(g, q).question, HasSubstr("most total edges"));
}

TEST(Text, GoldJsonShapes) {
  KnowledgeGraph g = appendix_fixture();
  Gold path{AnswerKind::EntityPathSet, false,
            {{id(g, "Ukraine"), id(g, "South Korea"), id(g, "Colombia")}}, 0, {}};
  EXPECT_EQ(gold_json(g, path).dump(), R"([["Ukraine","South Korea","Colombia"]])");
  Gold count{AnswerKind::Count, false, {}, 3, {}};
  EXPECT_EQ(gold_json(g, count).dump(), "3");
  Gold label{AnswerKind::EntityLabel, false, {}, 3, id(g, "Brunei")};
  EXPECT_EQ(gold_json(g, label).dump(), "\"Brunei\"");
}
