#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "kgbench/runner.hpp"
#include "kgbench/util.hpp"
#include "support.hpp"

namespace kgbench {
namespace {

namespace fs = std::filesystem;
using kgbench::testing::source_path;
using ::testing::HasSubstr;

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("kgbench_runner_" + name + "_" +
                                           std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

nlohmann::json small_config(const fs::path& out, std::size_t n,
                            std::vector<std::string> tasks = {"TripleRetrieval", "ShortestPath"}) {
  const std::string d = source_path("data/synthetic_small/");
  nlohmann::json j;
  j["seed"] = 11;
  j["graph"] = {{"entities", d + "entities.tsv"},
                {"relations", d + "relations.tsv"},
                {"edges", d + "edges.tsv"},
                {"attribute_entities", d + "attributes.tsv"},
                {"attribute_relations", d + "attribute_relations.tsv"},
                {"attribute_edges", d + "attribute_edges.tsv"},
                {"categories", d + "categories.tsv"}};
  for (const auto& t : tasks) j["tasks"][t] = {{"instances", n}, {"sampling", {{"max_edges", 60}}}};
  j["pseudonymize"] = "off";
  j["pseudonyms"] = source_path("data/pseudonyms.csv");
  j["formats"] = {"ListOfEdges", "StructuredJSON", "StructuredYAML", "RDFTurtle", "JSONLD"};
  j["endpoints"] = {{{"model_id", "echo"}, {"dialect", "mock"}, {"echo_gold", true}}};
  j["output_dir"] = out.string();
  j["concurrency"] = 3;
  return j;
}

BenchConfig config_of(const nlohmann::json& j) { return BenchConfig::from_json(j, "/"); }

std::vector<std::string> lines_of(const fs::path& p) {
  const std::string text = read_file(p);
  std::vector<std::string> out;
  for (auto l : split_lines(text)) out.emplace_back(l);
  return out;
}

// ---- config -----------------------------------------------------------------

TEST(Config, SeedIsMandatory) {
  auto j = small_config("/tmp/x", 1);
  j.erase("seed");
  EXPECT_THROW(config_of(j), ConfigError);
}

TEST(Config, UnknownKeysAreRejected) {
  auto j = small_config("/tmp/x", 1);
  j["sed"] = 1;
  EXPECT_THROW(config_of(j), ConfigError);
  j.erase("sed");
  j["tasks"]["ShortestPath"]["instnces"] = 3;
  EXPECT_THROW(config_of(j), ConfigError);
}

TEST(Config, RequiresTaskFormatEndpointAndPositiveN) {
  auto j = small_config("/tmp/x", 1);
  j["endpoints"] = nlohmann::json::array();
  EXPECT_THROW(config_of(j), ConfigError);
  j = small_config("/tmp/x", 1);
  j["formats"] = nlohmann::json::array();
  EXPECT_THROW(config_of(j), ConfigError);
  j = small_config("/tmp/x", 0);
  EXPECT_THROW(config_of(j), ConfigError);
  j = small_config("/tmp/x", 1);
  for (auto& [k, v] : j["tasks"].items()) v["enabled"] = false;
  EXPECT_THROW(config_of(j), ConfigError);
}

TEST(Config, PathsResolveAgainstConfigDirectory) {
  TempDir dir("paths");
  nlohmann::json j = small_config("out", 1);
  j["graph"]["entities"] = "kg/entities.tsv";
  const fs::path file = dir.path() / "conf" / "bench.json";
  fs::create_directories(file.parent_path());
  write_file_atomic(file, j.dump());
  const BenchConfig c = BenchConfig::load(file);
  EXPECT_EQ(c.graph.entities, (dir.path() / "conf/kg/entities.tsv").string());
  EXPECT_EQ(c.output_dir, dir.path() / "conf/out");
}

TEST(Config, DefaultSamplingRowsPerTask) {
  auto j = small_config("/tmp/x", 1, {"AggByRelation", "HighestDegree"});
  j["tasks"]["AggByRelation"].erase("sampling");
  j["tasks"]["HighestDegree"].erase("sampling");
  const BenchConfig c = config_of(j);
  EXPECT_EQ(c.tasks.at(TaskKind::AggByRelation).params.sampling.radius, 2);
  EXPECT_EQ(c.tasks.at(TaskKind::AggByRelation).params.sampling.num_seed_entities, 1u);
  EXPECT_EQ(c.tasks.at(TaskKind::HighestDegree).params.sampling.radius, 1);
  EXPECT_EQ(c.tasks.at(TaskKind::HighestDegree).params.sampling.max_edges, 200u);
  EXPECT_FALSE(c.tasks.at(TaskKind::ShortestPath).enabled);
}

TEST(Config, OverridesNarrowTheRun) {
  BenchConfig c = config_of(small_config("/tmp/x", 2));
  Overrides ov;
  ov.tasks = std::vector<std::string>{"ShortestPath"};
  ov.formats = std::vector<std::string>{"RDFTurtle"};
  ov.seed = 99;
  ov.pseudo = "off";
  ov.apply(c);
  EXPECT_EQ(c.enabled_tasks(), std::vector<TaskKind>{TaskKind::ShortestPath});
  EXPECT_EQ(c.formats, std::vector<Format>{Format::RDFTurtle});
  EXPECT_EQ(c.seed, 99u);
  Overrides bad;
  bad.models = std::vector<std::string>{"missing"};
  EXPECT_THROW(bad.apply(c), ConfigError);
}

// ---- build ------------------------------------------------------------------

TEST(Build, SingleInstanceGivesSingleLineFile) {
  TempDir dir("single");
  auto j = small_config(dir.path() / "a", 1, {"HighestDegree"});
  const BuildResult r1 = build(config_of(j));
  ASSERT_EQ(r1.files.size(), 1u);
  EXPECT_EQ(lines_of(r1.files[0]).size(), 1u);
  const std::string manifest1 = read_file(dir.path() / "a/instances/manifest.json");
  build(config_of(j));
  EXPECT_EQ(read_file(dir.path() / "a/instances/manifest.json"), manifest1);
}

TEST(Build, PaperShapeGivesTenFilesAndThousandLines) {
  TempDir dir("paper");
  auto j = small_config(dir.path(), 100,
                        {"TripleRetrieval", "ShortestPath", "AggByRelation",
                         "AggNeighborProperty", "HighestDegree"});
  j["pseudonymize"] = "both";
  const BuildResult r = build(config_of(j));
  EXPECT_EQ(r.files.size(), 10u);
  std::size_t total = 0;
  for (const auto& f : r.files) total += lines_of(f).size();
  EXPECT_EQ(total, 1000u);
  EXPECT_EQ(r.instances, 1000u);
}

TEST(Build, RepeatedBuildIsByteIdentical) {
  TempDir dir("repeat");
  auto j = small_config(dir.path() / "a", 4,
                        {"TripleRetrieval", "ShortestPath", "AggByRelation",
                         "AggNeighborProperty", "HighestDegree"});
  j["pseudonymize"] = "both";
  const BuildResult a = build(config_of(j));
  j["output_dir"] = (dir.path() / "b").string();
  j["concurrency"] = 1;  // scheduling must not matter
  const BuildResult b = build(config_of(j));
  ASSERT_EQ(a.files.size(), b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i)
    EXPECT_EQ(read_file(a.files[i]), read_file(b.files[i])) << a.files[i];
}

TEST(Build, MissingSourceGraphIsConfigError) {
  TempDir dir("missing");
  auto j = small_config(dir.path(), 1);
  j["graph"]["edges"] = (dir.path() / "nope.tsv").string();
  EXPECT_THROW(build(config_of(j)), ConfigError);
}

TEST(Instance, JsonRoundTripRebuildsTheSubgraph) {
  TempDir dir("roundtrip");
  auto j = small_config(dir.path(), 3,
                        {"TripleRetrieval", "ShortestPath", "AggByRelation",
                         "AggNeighborProperty", "HighestDegree"});
  j["pseudonymize"] = "both";
  const BenchConfig c = config_of(j);
  const LoadedGraph k = load_labeled_tsv(c.graph);
  const PseudonymPool pool = PseudonymPool::load_csv(c.pseudonyms);
  for (TaskKind t : kAllTasks) {
    for (const StoredInstance& s : build_task(c, k.graph, t, &pool)) {
      const std::string line = s.to_json().dump();
      const StoredInstance back = StoredInstance::from_json(nlohmann::ordered_json::parse(line));
      EXPECT_EQ(back.to_json().dump(), line);
      const auto a = s.subgraph.graph.triples();
      const auto b = back.subgraph.graph.triples();
      EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
      EXPECT_EQ(back.gold, s.gold);
      EXPECT_NO_THROW(verify(back.subgraph.graph, back.query, back.gold));
    }
  }
}

TEST(Instance, PseudoTwinSharesTopologyQueryAndGold) {
  TempDir dir("twin");
  auto j = small_config(dir.path(), 4, {"ShortestPath", "HighestDegree"});
  j["pseudonymize"] = "both";
  const BenchConfig c = config_of(j);
  const LoadedGraph k = load_labeled_tsv(c.graph);
  const PseudonymPool pool = PseudonymPool::load_csv(c.pseudonyms);
  for (TaskKind t : {TaskKind::ShortestPath, TaskKind::HighestDegree}) {
    const auto all = build_task(c, k.graph, t, &pool);
    ASSERT_EQ(all.size(), 8u);
    for (std::size_t i = 0; i < all.size(); i += 2) {
      const StoredInstance& plain = all[i];
      const StoredInstance& twin = all[i + 1];
      ASSERT_FALSE(plain.pseudo);
      ASSERT_TRUE(twin.pseudo);
      EXPECT_EQ(plain.index, twin.index);
      const auto a = plain.subgraph.graph.triples();
      const auto b = twin.subgraph.graph.triples();
      EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
      EXPECT_EQ(plain.gold, twin.gold);
      EXPECT_FALSE(twin.pseudonyms.empty());
      for (const auto& [from, to] : twin.pseudonyms)
        EXPECT_FALSE(twin.subgraph.graph.find_entity(from)) << from;
    }
  }
}

// ---- run --------------------------------------------------------------------

TEST(Run, EchoMockScoresEveryRecord) {
  TempDir dir("echo");
  const BenchConfig c = config_of(small_config(dir.path(), 3));
  build(c);
  const RunResult r = run(c);
  EXPECT_EQ(r.records, 30u);  // 2 tasks x 3 instances x 5 formats
  EXPECT_EQ(r.errors, 0u);
  EXPECT_TRUE(r.complete);
  for (const auto& rec : read_records(r.records_file.string())) {
    ASSERT_TRUE(rec.score);
    EXPECT_EQ(*rec.score, 1) << rec.key();
    EXPECT_EQ(rec.config_digest, run_digest(c));
  }
}

TEST(Run, SingleFormatCountIsInstancesTimesEndpoints) {
  TempDir dir("oneformat");
  auto j = small_config(dir.path(), 3);
  j["formats"] = {"ListOfEdges"};
  j["endpoints"].push_back({{"model_id", "echo2"}, {"dialect", "mock"}, {"echo_gold", true}});
  const BenchConfig c = config_of(j);
  build(c);
  EXPECT_EQ(run(c).records, 6u * 2u);
}

TEST(Run, ResumeAfterInterruptMatchesUninterruptedRun) {
  TempDir dir("resume");
  auto j = small_config(dir.path() / "whole", 3);
  const BenchConfig whole = config_of(j);
  build(whole);
  run(whole);
  j["output_dir"] = (dir.path() / "split").string();
  const BenchConfig split = config_of(j);
  build(split);

  RunOptions first;
  first.limit = 10;
  const RunResult a = run(split, first);
  EXPECT_EQ(a.records, 10u);
  EXPECT_FALSE(a.complete);

  RunOptions again;
  again.resume = true;
  const RunResult b = run(split, again);
  EXPECT_EQ(b.skipped, 10u);
  EXPECT_EQ(b.executed, 20u);
  EXPECT_EQ(b.records, 30u);
  EXPECT_TRUE(b.complete);

  std::set<std::string> keys;
  for (const auto& r : read_records(b.records_file.string())) EXPECT_TRUE(keys.insert(r.key()).second);
  EXPECT_EQ(read_file(b.records_file), read_file(records_path(whole)));
}

TEST(Run, PartialTrailingLineIsDroppedOnResume) {
  TempDir dir("partial");
  const BenchConfig c = config_of(small_config(dir.path(), 2));
  build(c);
  RunOptions first;
  first.limit = 5;
  run(c, first);
  {
    std::ofstream out(records_path(c), std::ios::app);
    out << "{\"model_id\":\"echo\",\"form";  // crash mid-write
  }
  RunOptions again;
  again.resume = true;
  const RunResult r = run(c, again);
  EXPECT_EQ(r.records, 20u);
  EXPECT_NO_THROW(read_records(records_path(c).string()));
}

TEST(Run, RecordsAreDeterministic) {
  TempDir dir("determinism");
  auto j = small_config(dir.path() / "a", 3);
  build(config_of(j));
  run(config_of(j));
  j["output_dir"] = (dir.path() / "b").string();
  j["concurrency"] = 1;
  build(config_of(j));
  run(config_of(j));
  EXPECT_EQ(read_file(dir.path() / "a/records.jsonl"), read_file(dir.path() / "b/records.jsonl"));
}

TEST(Run, EndpointFailuresBecomeErrorRecords) {
  TempDir dir("errors");
  auto j = small_config(dir.path(), 2);
  j["endpoints"] = {{{"model_id", "silent"}, {"dialect", "mock"}}};  // no canned answers
  const BenchConfig c = config_of(j);
  build(c);
  const RunResult r = run(c);
  EXPECT_EQ(r.records, 20u);
  EXPECT_EQ(r.errors, 20u);
  for (const auto& rec : read_records(r.records_file.string())) {
    EXPECT_FALSE(rec.score);
    EXPECT_THAT(rec.error, HasSubstr("no canned response"));
  }
}

TEST(Run, InstancesFromAnotherConfigAreRejected) {
  TempDir dir("mismatch");
  auto j = small_config(dir.path(), 2);
  build(config_of(j));
  j["seed"] = 12;
  EXPECT_THROW(run(config_of(j)), ConfigError);
  RunOptions opt;
  opt.allow_digest_mismatch = true;
  EXPECT_EQ(run(config_of(j), opt).records, 20u);
}

TEST(Run, MissingInstanceFilesAreConfigError) {
  TempDir dir("nobuild");
  EXPECT_THROW(run(config_of(small_config(dir.path(), 2))), ConfigError);
}

TEST(Run, InstanceFilesAreSelfContained) {
  TempDir dir("selfcontained");
  auto j = small_config(dir.path() / "out", 2);
  const fs::path kg = dir.path() / "kg";
  fs::create_directories(kg);
  for (const char* f : {"entities.tsv", "relations.tsv", "edges.tsv"})
    fs::copy_file(source_path("data/synthetic_small/") + f, kg / f);
  j["graph"] = {{"entities", (kg / "entities.tsv").string()},
                {"relations", (kg / "relations.tsv").string()},
                {"edges", (kg / "edges.tsv").string()}};
  build(config_of(j));
  fs::remove_all(kg);
  EXPECT_EQ(run(config_of(j)).records, 20u);
}

// ---- report / validate / render ---------------------------------------------

TEST(Report, WritesSummariesAndDigest) {
  TempDir dir("report");
  const BenchConfig c = config_of(small_config(dir.path(), 2));
  build(c);
  run(c);
  const ReportResult r = report(c);
  EXPECT_EQ(r.files.size(), 3u);
  const std::string digest = read_file(dir.path() / "digest.txt");
  EXPECT_THAT(digest, HasSubstr("Overall Score: 1.000"));
  EXPECT_THAT(digest, HasSubstr(run_digest(c)));
  EXPECT_THAT(read_file(dir.path() / "summary.csv"),
              HasSubstr("format,model,task,pseudo,accuracy"));
}

TEST(Report, NoRecordsIsAnError) {
  TempDir dir("norecords");
  const BenchConfig c = config_of(small_config(dir.path(), 2));
  try {
    report(c);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_THAT(e.what(), HasSubstr("no records"));
  }
}

TEST(Validate, DetectsTamperedGold) {
  TempDir dir("tamper");
  auto j = small_config(dir.path(), 3, {"AggByRelation"});
  const BenchConfig c = config_of(j);
  build(c);
  EXPECT_TRUE(validate(c).failures.empty());

  const fs::path file = dir.path() / "instances" / instance_file_name(TaskKind::AggByRelation, false);
  auto lines = lines_of(file);
  auto first = nlohmann::json::parse(lines[0]);
  first["gold"] = first["gold"].get<int>() + 1;
  lines[0] = first.dump();
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  write_file_atomic(file, text);
  const ValidateResult v = validate(c);
  ASSERT_EQ(v.failures.size(), 1u);
  EXPECT_THAT(v.failures[0], HasSubstr("#0"));
}

TEST(Render, PromptEndsWithTheQuestion) {
  TempDir dir("render");
  const BenchConfig c = config_of(small_config(dir.path(), 2));
  build(c);
  const std::string p = render_prompt(c, TaskKind::ShortestPath, 1, Format::RDFTurtle, false);
  EXPECT_THAT(p, HasSubstr("@prefix"));
  EXPECT_THAT(p, HasSubstr("Answer: <your answer>"));
  EXPECT_THROW(render_prompt(c, TaskKind::ShortestPath, 9, Format::RDFTurtle, false), ConfigError);
}

// ---- command line -----------------------------------------------------------

int cli(const std::string& args) {
  const std::string cmd = std::string(KGBENCH_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli");
  auto j = small_config(dir.path() / "out", 2);
  write_file_atomic(dir.path() / "ok.json", j.dump());
  j["endpoints"] = {{{"model_id", "silent"}, {"dialect", "mock"}}};
  write_file_atomic(dir.path() / "fail.json", j.dump());
  write_file_atomic(dir.path() / "bad.json", "{\"graph\": {}}");

  const std::string ok = "--config " + (dir.path() / "ok.json").string();
  const std::string fail = "--config " + (dir.path() / "fail.json").string();
  EXPECT_EQ(cli("build " + ok), 0);
  EXPECT_EQ(cli("run " + ok), 0);
  EXPECT_EQ(cli("report " + ok), 0);
  EXPECT_EQ(cli("validate " + ok), 0);
  EXPECT_EQ(cli("run " + fail), 2);
  EXPECT_EQ(cli("build --config " + (dir.path() / "bad.json").string()), 1);
  EXPECT_EQ(cli("run " + ok + " --formats Bogus"), 1);
}

}  // namespace
}  // namespace kgbench
