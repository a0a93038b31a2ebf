#pragma once

// The five task families. A generator poses a query against a subgraph and
// computes its gold answer; everything is held in subgraph ids so that a
// pseudonymized twin (same topology, new labels) shares query and gold.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgbench/graph.hpp"
#include "kgbench/rng.hpp"
#include "kgbench/sampler.hpp"
#include "kgbench/templates.hpp"

namespace kgbench {

enum class TaskKind { TripleRetrieval, ShortestPath, AggByRelation, AggNeighborProperty, HighestDegree };

inline constexpr std::array<TaskKind, 5> kAllTasks = {
    TaskKind::TripleRetrieval, TaskKind::ShortestPath, TaskKind::AggByRelation,
    TaskKind::AggNeighborProperty, TaskKind::HighestDegree};

std::string_view to_string(TaskKind t);
TaskKind task_from_string(std::string_view s);

enum class AnswerKind { Boolean, EntityPathSet, Count, EntityLabel };
AnswerKind answer_kind(TaskKind t);
std::string_view to_string(AnswerKind k);

// Task parameters. Only the fields of the query's task are meaningful.
struct Query {
  TaskKind task = TaskKind::TripleRetrieval;
  Triple triple{};                 // TripleRetrieval (may be absent from G)
  EntityId source{}, target{};     // ShortestPath
  EntityId anchor{};               // aggregations
  RelationId relation{};           // aggregations
  Direction direction = Direction::Outgoing;  // AggByRelation, HighestDegree
};

struct Gold {
  AnswerKind kind = AnswerKind::Boolean;
  bool truth = false;        // Boolean
  std::vector<Path> paths;   // EntityPathSet, lexicographic
  std::int64_t count = 0;    // Count; also the winning degree for EntityLabel
  EntityId entity{};         // EntityLabel

  friend bool operator==(const Gold&, const Gold&) = default;
};

struct Posed {
  Query query;
  Gold gold;
};

// ---------------------------------------------------------------------------
// Reference computations on a graph, shared by the generators and verify().

std::size_t agg_by_relation_count(const KnowledgeGraph& g, EntityId s, RelationId r,
                                  Direction dir);

// Entities adjacent to s (either direction, s itself only through a
// self-loop) that have at least one outgoing r edge.
std::size_t agg_neighbor_property_count(const KnowledgeGraph& g, EntityId s, RelationId r);

// All entities attaining the maximum degree in `dir`, ascending id.
std::vector<EntityId> highest_degree_entities(const KnowledgeGraph& g, Direction dir);

struct AggTuple {
  EntityId anchor;
  RelationId relation;
  Direction direction;
  std::size_t count;
};

// Every (s, r, dir) with a non-zero count, sorted by (s, r, dir).
std::vector<AggTuple> agg_by_relation_tuples(const KnowledgeGraph& g);
// Every (s, r) with a non-zero count, sorted; direction is Outgoing.
std::vector<AggTuple> agg_neighbor_property_tuples(const KnowledgeGraph& g);

// ---------------------------------------------------------------------------
// Generators over a given graph.

// Positive: a uniformly drawn triple of g. Negative: one uniformly chosen
// slot of a uniformly drawn triple replaced by a uniformly chosen entity (or
// relation) of g such that the result is absent; when a slot has no valid
// replacement the other slots, then other triples, are tried.
Posed gen_triple_retrieval(const KnowledgeGraph& g, Rng& rng, bool positive);

// Two-stage: uniform over the distinct answer values, then uniform over the
// tuples realizing the chosen value.
Posed gen_agg_by_relation(const KnowledgeGraph& g, Rng& rng);
Posed gen_agg_neighbor_property(const KnowledgeGraph& g, Rng& rng);

// nullopt when the maximum degree in `dir` is attained by several entities.
std::optional<Posed> pose_highest_degree(const KnowledgeGraph& g, Direction dir);

// Gold for a shortest-path question on g: every shortest path from source to
// target, capped at `cap`.
Posed pose_shortest_path(const KnowledgeGraph& g, EntityId source, EntityId target,
                         std::size_t cap = 64);

// Recomputes the gold answer of `q` on g. Throws OracleMismatch when it
// differs from `gold`.
void verify(const KnowledgeGraph& g, const Query& q, const Gold& gold, std::size_t path_cap = 64);

// ---------------------------------------------------------------------------
// Full instances: subgraph sampling plus posing.

struct TaskParams {
  TaskKind task = TaskKind::TripleRetrieval;
  SamplingParams sampling;
  std::size_t path_cap = 64;
  // Subgraph redraws for HighestDegree ties and shortest-path endpoint draws.
  std::size_t max_attempts = 32;

  // Sampling row used for each task by default: 10 seeds, radius 1 and
  // min-degree 1 for retrieval, shortest path and highest degree; 1 seed,
  // radius 2 and min-degree 2 for both aggregations; 200 edges throughout.
  static TaskParams defaults(TaskKind task);
};

struct TaskInstance {
  TaskKind task = TaskKind::TripleRetrieval;
  std::size_t index = 0;
  std::uint64_t rng_seed = 0;
  Subgraph subgraph;
  Query query;
  Gold gold;
};

// Seed of instance `index` of `task` under a run seed.
std::uint64_t instance_seed(std::uint64_t run_seed, TaskKind task, std::size_t index);

// Balanced label vector for a TripleRetrieval batch: ceil(n/2) positives in
// a seeded random order.
std::vector<bool> triple_retrieval_labels(std::uint64_t run_seed, std::size_t n);

// Instance `index`, reproducible in isolation. `positive` is required for
// TripleRetrieval and ignored otherwise. The gold answer is verified before
// returning.
TaskInstance generate_instance(const KnowledgeGraph& k, const TaskParams& params,
                               std::uint64_t run_seed, std::size_t index,
                               std::optional<bool> positive = std::nullopt);

// Shortest-path instance with caller-chosen endpoints in k (source ids).
TaskInstance shortest_path_instance(const KnowledgeGraph& k, const TaskParams& params, Rng& rng,
                                    EntityId source, EntityId target);

// ---------------------------------------------------------------------------
// Text and serialization.

struct QuestionText {
  std::string question;
  std::string answer_format;
  std::string block;  // question_block template filled with the two above
};

QuestionText question_text(const KnowledgeGraph& g, const Query& q,
                           const Templates& t = Templates::defaults());

// Gold with labels from g: true/false, an integer, a label, or a list of
// label paths.
nlohmann::ordered_json gold_json(const KnowledgeGraph& g, const Gold& gold);

// Task-specific metadata with labels from g (direction, relation, anchor,
// true_count, path_length, is_positive, degree).
nlohmann::ordered_json meta_json(const KnowledgeGraph& g, const Query& q, const Gold& gold);

}  // namespace kgbench
