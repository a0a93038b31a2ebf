#pragma once

// Build / run / report orchestration driven by one JSON config file.
//
// Config keys (paths are relative to the config file's directory):
//   seed                 required, unsigned integer
//   graph                {entities, relations, edges, attribute_entities,
//                         attribute_relations, attribute_edges, categories}
//   tasks                {"<TaskName>": {enabled, instances, sampling: {...},
//                         path_cap, max_attempts}}
//   pseudonymize         "off" | "on" | "both"
//   pseudonyms           pseudonym pool CSV (needed unless pseudonymize is off)
//   pseudonym_scope      "core_only" | "all_entities"
//   formats              list of format identifiers
//   endpoints            list of endpoint objects (see ModelEndpoint)
//   output_dir, cache_dir, concurrency, templates, swap_preambles

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgbench/eval.hpp"
#include "kgbench/gateway.hpp"
#include "kgbench/pseudonym.hpp"
#include "kgbench/tasks.hpp"
#include "kgbench/textualize.hpp"

namespace kgbench {

enum class PseudoMode { Off, On, Both };

std::string_view to_string(PseudoMode m);
PseudoMode pseudo_mode_from_string(std::string_view s);

struct TaskConfig {
  bool enabled = true;
  std::size_t instances = 100;
  TaskParams params;
};

struct BenchConfig {
  std::uint64_t seed = 0;
  TsvSources graph;
  std::map<TaskKind, TaskConfig> tasks;  // every task; see enabled
  PseudoMode pseudonymize = PseudoMode::Both;
  std::string pseudonyms;
  PseudonymScope pseudonym_scope = PseudonymScope::CoreOnly;
  std::vector<Format> formats;
  std::vector<ModelEndpoint> endpoints;
  std::filesystem::path output_dir = "out";
  std::filesystem::path cache_dir;  // output_dir/cache when empty
  std::size_t concurrency = 4;
  std::string templates;  // override file; empty for the defaults
  bool swap_preambles = false;

  static BenchConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static BenchConfig load(const std::filesystem::path& path);

  std::vector<TaskKind> enabled_tasks() const;
  std::vector<bool> pseudo_variants() const;  // false = plain, true = pseudo
  Templates load_templates() const;

  // Throws ConfigError unless there is at least one task, format and
  // endpoint and every enabled task has instances >= 1.
  void validate() const;
};

// Command-line overrides applied on top of a loaded config.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::vector<std::string>> tasks;
  std::optional<std::vector<std::string>> formats;
  std::optional<std::vector<std::string>> models;
  std::optional<std::string> pseudo;

  void apply(BenchConfig& c) const;
};

// ---------------------------------------------------------------------------
// Instance files: out/instances/<Task>.jsonl and <Task>.pseudo.jsonl, one
// instance per line. Every line is self-contained and carries the schema tag
// and the digest of the configuration that produced it.

inline constexpr const char* kInstanceSchema = "kgbench.instance/1";

// Content hashes of the build inputs that live outside the config file.
struct InputDigests {
  std::string graph;       // sha256 over the source-graph files
  std::string pseudonyms;  // sha256 of the pseudonym pool; empty when unused
};

struct StoredInstance {
  TaskKind task = TaskKind::TripleRetrieval;
  std::size_t index = 0;
  bool pseudo = false;
  std::uint64_t run_seed = 0;
  std::uint64_t instance_seed = 0;
  std::uint64_t pseudonym_seed = 0;  // pseudo only
  std::string config_digest;
  InputDigests inputs;

  Subgraph subgraph;  // source_entity/source_relation are left empty
  Query query;
  Gold gold;
  QuestionText question;
  nlohmann::ordered_json meta;
  // original label -> pseudonym, pseudo only
  std::vector<std::pair<std::string, std::string>> pseudonyms;

  GoldAnswer gold_answer() const { return GoldAnswer::from_gold(subgraph.graph, gold); }
  std::vector<std::string> entity_labels() const;

  nlohmann::ordered_json to_json() const;
  // Rebuilds the subgraph with the stored entity order, query and gold.
  static StoredInstance from_json(const nlohmann::ordered_json& j);
};

std::string instance_file_name(TaskKind task, bool pseudo);

std::vector<StoredInstance> read_instances(const std::filesystem::path& path);

// Throws ConfigError when a source file is missing.
InputDigests input_digests(const BenchConfig& c);

// Digest of everything that determines one task's instance file.
std::string build_digest(const BenchConfig& c, TaskKind task, bool pseudo,
                         const InputDigests& inputs);
// Digest of everything that determines the records of a run.
std::string run_digest(const BenchConfig& c);

struct BuildResult {
  std::vector<std::filesystem::path> files;
  std::size_t instances = 0;
  LoadReport load_report;
};

// Generates every enabled task's instances (plus pseudonymized twins) and
// writes them with a manifest. Files are written atomically and contain no
// timestamps.
BuildResult build(const BenchConfig& c);

// Instance generation without file output.
std::vector<StoredInstance> build_task(const BenchConfig& c, const KnowledgeGraph& k, TaskKind task,
                                       const PseudonymPool* pool);

struct RunOptions {
  bool resume = false;
  // Stop after this many new records; simulates an interrupted run.
  std::optional<std::size_t> limit;
  // Accept instance files whose digest differs from the current config.
  bool allow_digest_mismatch = false;
};

struct RunResult {
  std::size_t records = 0;   // total in the records file
  std::size_t executed = 0;  // produced by this invocation
  std::size_t skipped = 0;   // already present (resume)
  std::size_t errors = 0;    // error records in the file
  bool complete = false;     // every key of the cross-product present
  std::filesystem::path records_file;
};

// Executes task x instance x format x endpoint x pseudo against the instance
// files in output_dir. Records are appended as they complete; at the end the
// file is rewritten sorted by key.
RunResult run(const BenchConfig& c, const RunOptions& opt = {});

struct ReportResult {
  SummaryTable summary;
  std::vector<std::filesystem::path> files;
};

// Aggregates output_dir/records.jsonl into summary.csv, summary.json and
// digest.txt.
ReportResult report(const BenchConfig& c);

struct ValidateResult {
  std::size_t instances = 0;
  std::vector<std::string> failures;
};

// Recomputes every stored gold answer on its stored subgraph.
ValidateResult validate(const BenchConfig& c);

// Full prompt of one stored instance.
std::string render_prompt(const BenchConfig& c, TaskKind task, std::size_t index, Format format,
                          bool pseudo);

std::filesystem::path records_path(const BenchConfig& c);

}  // namespace kgbench
