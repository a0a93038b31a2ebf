#pragma once

// Response parsing, scoring, and aggregation of evaluation records.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgbench/tasks.hpp"
#include "kgbench/textualize.hpp"

namespace kgbench {

// Gold answer in label space, as stored in instance files.
struct GoldAnswer {
  AnswerKind kind = AnswerKind::Boolean;
  bool truth = false;
  std::int64_t count = 0;
  std::string entity;
  std::vector<std::vector<std::string>> paths;

  static GoldAnswer from_json(TaskKind task, const nlohmann::json& j);
  static GoldAnswer from_gold(const KnowledgeGraph& g, const Gold& gold);
};

// The answer text a perfect model would give ("True", "3", "A -> B -> C").
// Used as the echo-gold mock's hint.
std::string answer_text(const GoldAnswer& gold);

struct ParsedAnswer {
  bool ok = false;
  std::string span;   // text after the last answer marker
  std::string error;  // why parsing failed
  bool truth = false;
  std::int64_t count = 0;
  std::string label;
  std::vector<std::string> path;

  nlohmann::ordered_json to_json(AnswerKind kind) const;
};

// Takes the text after the last "Answer:" marker (case-insensitive; the next
// non-empty line when the marker ends its line) and coerces it for the task:
// True/False/Yes/No, a leading integer, a trimmed label, or a path split on
// "->", "→" or ",". Without a marker only a final line that is itself a
// boolean or integer is accepted.
ParsedAnswer parse_answer(TaskKind task, std::string_view raw);

// Booleans and counts by equality; labels by normalize_label equality; paths
// by normalized sequence equality with any gold path.
int score_exact(TaskKind task, const ParsedAnswer& parsed, const GoldAnswer& gold);

// 1 iff the response contains a gold path as a chain of labels joined by
// arrows, commas or "to". When `entity_labels` is non-empty the chain must be
// maximal: no further label of the graph may continue it on either side.
int score_flexible_path(std::string_view raw, const std::vector<std::vector<std::string>>& gold_paths,
                        const std::vector<std::string>& entity_labels = {});

// ---------------------------------------------------------------------------

struct EvalRecord {
  std::string model_id;
  Format format = Format::ListOfEdges;
  TaskKind task = TaskKind::TripleRetrieval;
  std::size_t instance_index = 0;
  bool pseudo = false;

  std::string raw_response;
  nlohmann::ordered_json parsed;  // null on parse failure
  bool parse_failed = false;
  std::optional<int> score;            // absent when error is set
  std::optional<int> flexible_score;   // ShortestPath only
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  std::string error;                   // gateway failure; excluded from accuracy

  bool truncated = false;
  bool cache_hit = false;
  int retries = 0;
  double temperature = 0.0;
  int max_tokens = 0;
  std::string prompt_sha256;
  nlohmann::ordered_json meta;  // task metadata copied from the instance
  std::string config_digest;    // digest of the run configuration

  // task/index/format/model/pseudo; unique within a run.
  std::string key() const;

  nlohmann::ordered_json to_json() const;
  static EvalRecord from_json(const nlohmann::json& j);
};

// Scores `raw` against an instance's gold and fills parsed/score fields.
void score_record(EvalRecord& r, const GoldAnswer& gold,
                  const std::vector<std::string>& entity_labels = {});

std::vector<EvalRecord> read_records(const std::string& path);

// ---------------------------------------------------------------------------

struct CellStats {
  std::size_t n = 0;  // scored records
  std::size_t correct = 0;
  std::size_t errors = 0;
  std::size_t parse_failures = 0;
  std::size_t flexible_n = 0;
  std::size_t flexible_correct = 0;

  double accuracy() const { return n ? double(correct) / double(n) : 0.0; }
  std::optional<double> flexible_accuracy() const {
    if (!flexible_n) return std::nullopt;
    return double(flexible_correct) / double(flexible_n);
  }
};

using CellKey = std::tuple<Format, std::string, TaskKind, bool>;  // format, model, task, pseudo

struct BestFormat {
  Format format = Format::ListOfEdges;
  double mean = 0.0;
  bool tie = false;
  std::vector<Format> tied;  // every format within tolerance of the best
};

// Accuracy split along one extra dimension (path length, aggregation size,
// direction).
struct BreakdownRow {
  std::string dimension;
  TaskKind task;
  std::string model;
  Format format;
  bool pseudo;
  std::string bin;
  std::size_t n = 0;
  std::size_t correct = 0;
};

// Counts of (gold value, predicted value) pairs.
struct PairRow {
  std::string dimension;
  TaskKind task;
  std::string model;
  Format format;
  bool pseudo;
  std::string truth;
  std::string predicted;
  std::size_t count = 0;
};

struct SummaryTable {
  std::map<CellKey, CellStats> cells;

  // Unweighted means over cells: per (format, model, pseudo) over tasks,
  // per (format, task, pseudo) over models, per (model, task, pseudo) over
  // formats, and per (task, pseudo) / pseudo over everything.
  std::map<std::tuple<Format, std::string, bool>, double> model_overall;
  std::map<std::tuple<Format, TaskKind, bool>, double> format_task_overall;
  std::map<std::tuple<Format, bool>, double> format_overall;
  std::map<std::tuple<std::string, TaskKind, bool>, double> all_formats_task;
  std::map<std::tuple<std::string, bool>, double> all_formats_model;
  std::map<std::tuple<TaskKind, bool>, double> overall_task;
  std::map<bool, double> overall;

  std::map<Format, double> mean_input_tokens;
  std::map<std::string, BestFormat> best_format;

  std::vector<BreakdownRow> breakdowns;
  std::vector<PairRow> pairs;

  std::size_t total_records = 0;
  std::size_t total_errors = 0;

  // Summary CSV: format,model,task,pseudo,accuracy,n,errors,parse_failures,
  // flexible_accuracy.
  std::string to_csv() const;
  nlohmann::ordered_json to_json() const;
  // Human-readable digest: overall rows, best format per model, token
  // ordering check.
  std::string digest() const;
};

// Tolerance under which two format means count as tied.
inline constexpr double kTieTolerance = 1e-9;

// Bins used for aggregation-size breakdowns.
std::string aggregation_bin(std::int64_t count);

// Throws Error("no records") on empty input. Order-independent.
SummaryTable aggregate(const std::vector<EvalRecord>& records);

// Argmax over formats of the mean of a model's cells (both pseudo settings
// pooled, tasks weighted equally). Ties within kTieTolerance go to the
// alphabetically first format identifier and are flagged.
std::map<std::string, BestFormat> best_format_per_model(const SummaryTable& summary);

}  // namespace kgbench
