#include "kgbench/tasks.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "kgbench/error.hpp"

namespace kgbench {

std::string_view to_string(TaskKind t) {
  switch (t) {
    case TaskKind::TripleRetrieval:
      return "TripleRetrieval";
    case TaskKind::ShortestPath:
      return "ShortestPath";
    case TaskKind::AggByRelation:
      return "AggByRelation";
    case TaskKind::AggNeighborProperty:
      return "AggNeighborProperty";
    case TaskKind::HighestDegree:
      return "HighestDegree";
  }
  return "?";
}

TaskKind task_from_string(std::string_view s) {
  for (TaskKind t : kAllTasks)
    if (s == to_string(t)) return t;
  throw ConfigError("unknown task '" + std::string(s) + "'");
}

AnswerKind answer_kind(TaskKind t) {
  switch (t) {
    case TaskKind::TripleRetrieval:
      return AnswerKind::Boolean;
    case TaskKind::ShortestPath:
      return AnswerKind::EntityPathSet;
    case TaskKind::AggByRelation:
    case TaskKind::AggNeighborProperty:
      return AnswerKind::Count;
    case TaskKind::HighestDegree:
      return AnswerKind::EntityLabel;
  }
  return AnswerKind::Boolean;
}

std::string_view to_string(AnswerKind k) {
  switch (k) {
    case AnswerKind::Boolean:
      return "boolean";
    case AnswerKind::EntityPathSet:
      return "path_set";
    case AnswerKind::Count:
      return "count";
    case AnswerKind::EntityLabel:
      return "entity";
  }
  return "?";
}

// ---- reference computations -----------------------------------------------

std::size_t agg_by_relation_count(const KnowledgeGraph& g, EntityId s, RelationId r,
                                  Direction dir) {
  g.check(s);
  g.check(r);
  std::size_t n = 0;
  if (dir == Direction::Outgoing || dir == Direction::Total)
    for (const OutEdge& e : g.out_edges(s)) n += e.relation == r;
  if (dir == Direction::Incoming || dir == Direction::Total)
    for (const InEdge& e : g.in_edges(s)) n += e.relation == r;
  return n;
}

namespace {

bool has_outgoing(const KnowledgeGraph& g, EntityId e, RelationId r) {
  for (const OutEdge& oe : g.out_edges(e))
    if (oe.relation == r) return true;
  return false;
}

}  // namespace

std::size_t agg_neighbor_property_count(const KnowledgeGraph& g, EntityId s, RelationId r) {
  g.check(r);
  std::size_t n = 0;
  for (EntityId nb : g.neighbors(s)) n += has_outgoing(g, nb, r);
  return n;
}

std::vector<EntityId> highest_degree_entities(const KnowledgeGraph& g, Direction dir) {
  std::vector<EntityId> best;
  std::size_t top = 0;
  for (std::uint32_t i = 0; i < g.entity_count(); ++i) {
    EntityId e{i};
    std::size_t d = g.degree(e, dir);
    if (best.empty() || d > top) {
      best.clear();
      top = d;
    }
    if (d == top) best.push_back(e);
  }
  return best;
}

std::vector<AggTuple> agg_by_relation_tuples(const KnowledgeGraph& g) {
  std::map<std::tuple<EntityId, RelationId, Direction>, std::size_t> counts;
  for (const Triple& t : g.triples()) {
    ++counts[{t.subject, t.relation, Direction::Outgoing}];
    ++counts[{t.object, t.relation, Direction::Incoming}];
  }
  std::vector<AggTuple> out;
  for (const auto& [key, n] : counts)
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), n});
  return out;
}

std::vector<AggTuple> agg_neighbor_property_tuples(const KnowledgeGraph& g) {
  std::vector<AggTuple> out;
  for (std::uint32_t i = 0; i < g.entity_count(); ++i) {
    EntityId s{i};
    std::map<RelationId, std::size_t> counts;
    for (EntityId nb : g.neighbors(s)) {
      std::set<RelationId> rels;
      for (const OutEdge& oe : g.out_edges(nb)) rels.insert(oe.relation);
      for (RelationId r : rels) ++counts[r];
    }
    for (const auto& [r, n] : counts) out.push_back({s, r, Direction::Outgoing, n});
  }
  return out;
}

// ---- generators -------------------------------------------------------------

Posed gen_triple_retrieval(const KnowledgeGraph& g, Rng& rng, bool positive) {
  if (g.triple_count() == 0) throw GenerationError("triple retrieval: graph has no edges");
  Posed p;
  p.query.task = TaskKind::TripleRetrieval;
  p.gold.kind = AnswerKind::Boolean;
  const Triple base = g.triples()[rng.below(g.triple_count())];
  if (positive) {
    p.query.triple = base;
    p.gold.truth = true;
    return p;
  }

  // Valid replacements for one slot of t, ascending id.
  auto replacements = [&](const Triple& t, int slot) {
    std::vector<Triple> out;
    if (slot == 1) {
      for (std::uint32_t r = 0; r < g.relation_count(); ++r) {
        Triple c{t.subject, RelationId{r}, t.object};
        if (!g.contains(c)) out.push_back(c);
      }
    } else {
      for (std::uint32_t e = 0; e < g.entity_count(); ++e) {
        Triple c = t;
        (slot == 0 ? c.subject : c.object) = EntityId{e};
        if (!g.contains(c)) out.push_back(c);
      }
    }
    return out;
  };

  auto corrupt = [&](const Triple& t) {
    const int first = static_cast<int>(rng.below(3));
    for (int step = 0; step < 3; ++step) {
      auto cands = replacements(t, (first + step) % 3);
      if (cands.empty()) continue;
      p.query.triple = rng.pick(cands);
      return true;
    }
    return false;
  };
  if (corrupt(base)) return p;
  // Every slot of the drawn triple is saturated: try the others in random order.
  std::vector<Triple> rest;
  for (const Triple& t : g.triples())
    if (t != base) rest.push_back(t);
  rng.shuffle(rest);
  for (const Triple& t : rest)
    if (corrupt(t)) return p;
  throw GenerationError("triple retrieval: every possible triple is present");
}

namespace {

Posed two_stage(const std::vector<AggTuple>& tuples, Rng& rng, TaskKind task) {
  if (tuples.empty()) throw GenerationError(std::string(to_string(task)) + ": no answers");
  std::vector<std::size_t> values;
  for (const AggTuple& t : tuples) values.push_back(t.count);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const std::size_t a = rng.pick(values);
  std::vector<AggTuple> matching;
  for (const AggTuple& t : tuples)
    if (t.count == a) matching.push_back(t);
  const AggTuple& chosen = rng.pick(matching);
  Posed p;
  p.query.task = task;
  p.query.anchor = chosen.anchor;
  p.query.relation = chosen.relation;
  p.query.direction = chosen.direction;
  p.gold.kind = AnswerKind::Count;
  p.gold.count = static_cast<std::int64_t>(a);
  return p;
}

}  // namespace

Posed gen_agg_by_relation(const KnowledgeGraph& g, Rng& rng) {
  return two_stage(agg_by_relation_tuples(g), rng, TaskKind::AggByRelation);
}

Posed gen_agg_neighbor_property(const KnowledgeGraph& g, Rng& rng) {
  return two_stage(agg_neighbor_property_tuples(g), rng, TaskKind::AggNeighborProperty);
}

std::optional<Posed> pose_highest_degree(const KnowledgeGraph& g, Direction dir) {
  auto best = highest_degree_entities(g, dir);
  if (best.size() != 1) return std::nullopt;
  Posed p;
  p.query.task = TaskKind::HighestDegree;
  p.query.direction = dir;
  p.gold.kind = AnswerKind::EntityLabel;
  p.gold.entity = best[0];
  p.gold.count = static_cast<std::int64_t>(g.degree(best[0], dir));
  return p;
}

Posed pose_shortest_path(const KnowledgeGraph& g, EntityId source, EntityId target,
                         std::size_t cap) {
  Posed p;
  p.query.task = TaskKind::ShortestPath;
  p.query.source = source;
  p.query.target = target;
  p.gold.kind = AnswerKind::EntityPathSet;
  ShortestPaths sp = all_shortest_paths(g, source, target, cap);
  if (sp.paths.empty()) throw GenerationError("shortest path: target unreachable");
  if (sp.truncated) spdlog::info("shortest path: enumeration capped at {} paths", cap);
  p.gold.paths = std::move(sp.paths);
  return p;
}

void verify(const KnowledgeGraph& g, const Query& q, const Gold& gold, std::size_t path_cap) {
  auto mismatch = [&](const std::string& what) {
    throw OracleMismatch(std::string(to_string(q.task)) + ": " + what);
  };
  if (gold.kind != answer_kind(q.task)) mismatch("answer kind");
  switch (q.task) {
    case TaskKind::TripleRetrieval:
      if (g.contains(q.triple) != gold.truth) mismatch("membership");
      break;
    case TaskKind::ShortestPath:
      if (pose_shortest_path(g, q.source, q.target, path_cap).gold != gold) mismatch("paths");
      break;
    case TaskKind::AggByRelation:
      if (static_cast<std::int64_t>(agg_by_relation_count(g, q.anchor, q.relation,
                                                          q.direction)) != gold.count)
        mismatch("count");
      break;
    case TaskKind::AggNeighborProperty:
      if (static_cast<std::int64_t>(agg_neighbor_property_count(g, q.anchor, q.relation)) !=
          gold.count)
        mismatch("count");
      break;
    case TaskKind::HighestDegree: {
      auto best = highest_degree_entities(g, q.direction);
      if (best.size() != 1 || best[0] != gold.entity) mismatch("argmax");
      if (static_cast<std::int64_t>(g.degree(best[0], q.direction)) != gold.count)
        mismatch("degree");
      break;
    }
  }
}

// ---- full instances ---------------------------------------------------------

TaskParams TaskParams::defaults(TaskKind task) {
  TaskParams p;
  p.task = task;
  if (task == TaskKind::AggByRelation || task == TaskKind::AggNeighborProperty) {
    p.sampling.num_seed_entities = 1;
    p.sampling.radius = 2;
    p.sampling.min_degree = 2;
  } else {
    p.sampling.num_seed_entities = 10;
    p.sampling.radius = 1;
    p.sampling.min_degree = 1;
  }
  p.sampling.max_edges = 200;
  return p;
}

std::uint64_t instance_seed(std::uint64_t run_seed, TaskKind task, std::size_t index) {
  return child_seed(run_seed, "task/" + std::string(to_string(task)), index);
}

std::vector<bool> triple_retrieval_labels(std::uint64_t run_seed, std::size_t n) {
  std::vector<bool> labels(n, false);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) labels[i] = true;
  Rng rng(child_seed(run_seed, "task/TripleRetrieval/labels", 0));
  rng.shuffle(labels);
  return labels;
}

TaskInstance shortest_path_instance(const KnowledgeGraph& k, const TaskParams& params, Rng& rng,
                                    EntityId source, EntityId target) {
  if (source == target) throw GenerationError("shortest path: source equals target");
  ShortestPaths all = all_shortest_paths(k, source, target, params.path_cap);
  if (all.paths.empty()) throw GenerationError("shortest path: endpoints not connected");
  const Path& p1 = all.paths.front();

  SeedSpec spec;
  spec.fixed = {source, target};
  for (EntityId e : p1)
    if (std::find(spec.fixed.begin(), spec.fixed.end(), e) == spec.fixed.end())
      spec.fixed.push_back(e);
  for (std::size_t i = 0; i + 1 < p1.size(); ++i) {
    // The smallest triple joining consecutive path entities, either way round.
    std::optional<Triple> hop;
    for (const OutEdge& oe : k.out_edges(p1[i]))
      if (oe.object == p1[i + 1]) {
        hop = Triple{p1[i], oe.relation, oe.object};
        break;
      }
    for (const InEdge& ie : k.in_edges(p1[i]))
      if (ie.subject == p1[i + 1]) {
        Triple t{ie.subject, ie.relation, p1[i]};
        if (!hop || t < *hop) hop = t;
        break;
      }
    spec.protected_.push_back(*hop);
  }
  std::sort(spec.protected_.begin(), spec.protected_.end());
  spec.protected_.erase(std::unique(spec.protected_.begin(), spec.protected_.end()),
                        spec.protected_.end());

  TaskInstance inst;
  inst.task = TaskKind::ShortestPath;
  inst.subgraph = sample_subgraph(k, params.sampling, rng, spec);
  auto ls = inst.subgraph.local(source), lt = inst.subgraph.local(target);
  if (!ls || !lt) throw OracleMismatch("shortest path: endpoint missing from subgraph");
  Posed posed = pose_shortest_path(inst.subgraph.graph, *ls, *lt, params.path_cap);
  if (posed.gold.paths.front().size() != p1.size())
    throw OracleMismatch("shortest path: protected path did not survive");
  inst.query = posed.query;
  inst.gold = std::move(posed.gold);
  return inst;
}

TaskInstance generate_instance(const KnowledgeGraph& k, const TaskParams& params,
                               std::uint64_t run_seed, std::size_t index,
                               std::optional<bool> positive) {
  const std::uint64_t seed = instance_seed(run_seed, params.task, index);
  Rng rng(seed);
  TaskInstance inst;

  switch (params.task) {
    case TaskKind::TripleRetrieval: {
      if (!positive) throw Error("triple retrieval: instance label not supplied");
      inst.subgraph = sample_subgraph(k, params.sampling, rng);
      Posed p = gen_triple_retrieval(inst.subgraph.graph, rng, *positive);
      inst.query = p.query;
      inst.gold = p.gold;
      break;
    }
    case TaskKind::ShortestPath: {
      const auto pool = seed_pool(k);
      if (pool.size() < 2) throw GenerationError("shortest path: fewer than two seed entities");
      bool done = false;
      for (std::size_t attempt = 0; attempt < params.max_attempts && !done; ++attempt) {
        auto pick = rng.sample_indices(pool.size(), 2);
        EntityId s = pool[pick[0]], t = pool[pick[1]];
        if (!bfs_distance(k, s, t)) continue;
        inst = shortest_path_instance(k, params, rng, s, t);
        done = true;
      }
      if (!done) throw GenerationError("shortest path: no connected endpoint pair found");
      break;
    }
    case TaskKind::AggByRelation:
    case TaskKind::AggNeighborProperty: {
      inst.subgraph = sample_subgraph(k, params.sampling, rng);
      Posed p = params.task == TaskKind::AggByRelation
                    ? gen_agg_by_relation(inst.subgraph.graph, rng)
                    : gen_agg_neighbor_property(inst.subgraph.graph, rng);
      inst.query = p.query;
      inst.gold = p.gold;
      break;
    }
    case TaskKind::HighestDegree: {
      static constexpr Direction dirs[] = {Direction::Incoming, Direction::Outgoing,
                                           Direction::Total};
      const Direction dir = dirs[rng.below(3)];
      bool done = false;
      for (std::size_t attempt = 0; attempt < params.max_attempts && !done; ++attempt) {
        Subgraph sub = sample_subgraph(k, params.sampling, rng);
        if (auto p = pose_highest_degree(sub.graph, dir)) {
          inst.subgraph = std::move(sub);
          inst.query = p->query;
          inst.gold = p->gold;
          done = true;
        }
      }
      if (!done)
        throw GenerationError("highest degree: tied maximum after " +
                              std::to_string(params.max_attempts) + " subgraphs");
      break;
    }
  }
  inst.task = params.task;
  inst.index = index;
  inst.rng_seed = seed;
  verify(inst.subgraph.graph, inst.query, inst.gold, params.path_cap);
  return inst;
}

// ---- text ---------------------------------------------------------------------

QuestionText question_text(const KnowledgeGraph& g, const Query& q, const Templates& t) {
  std::map<std::string, std::string> vars;
  switch (q.task) {
    case TaskKind::TripleRetrieval:
      vars["subject"] = g.label(q.triple.subject);
      vars["relation"] = g.label(q.triple.relation);
      vars["object"] = g.label(q.triple.object);
      break;
    case TaskKind::ShortestPath:
      vars["source"] = g.label(q.source);
      vars["target"] = g.label(q.target);
      break;
    case TaskKind::AggByRelation:
      vars["anchor"] = g.label(q.anchor);
      vars["relation"] = g.label(q.relation);
      vars["direction"] = std::string(to_string(q.direction));
      break;
    case TaskKind::AggNeighborProperty:
      vars["anchor"] = g.label(q.anchor);
      vars["relation"] = g.label(q.relation);
      break;
    case TaskKind::HighestDegree:
      vars["direction"] = std::string(to_string(q.direction));
      break;
  }
  const std::string task(to_string(q.task));
  QuestionText out;
  out.question = t.fill("question." + task, vars);
  out.answer_format = t.fill("answer_format." + task, vars);
  out.block = t.fill("question_block", {{"question", out.question},
                                        {"answer_format", out.answer_format},
                                        {"answer_marker", t.get("answer_marker")}});
  return out;
}

nlohmann::ordered_json gold_json(const KnowledgeGraph& g, const Gold& gold) {
  switch (gold.kind) {
    case AnswerKind::Boolean:
      return gold.truth;
    case AnswerKind::Count:
      return gold.count;
    case AnswerKind::EntityLabel:
      return g.label(gold.entity);
    case AnswerKind::EntityPathSet: {
      nlohmann::ordered_json paths = nlohmann::ordered_json::array();
      for (const Path& p : gold.paths) {
        nlohmann::ordered_json labels = nlohmann::ordered_json::array();
        for (EntityId e : p) labels.push_back(g.label(e));
        paths.push_back(std::move(labels));
      }
      return paths;
    }
  }
  return nullptr;
}

nlohmann::ordered_json meta_json(const KnowledgeGraph& g, const Query& q, const Gold& gold) {
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  switch (q.task) {
    case TaskKind::TripleRetrieval:
      m["subject"] = g.label(q.triple.subject);
      m["relation"] = g.label(q.triple.relation);
      m["object"] = g.label(q.triple.object);
      m["is_positive"] = gold.truth;
      break;
    case TaskKind::ShortestPath:
      m["source"] = g.label(q.source);
      m["target"] = g.label(q.target);
      m["path_length"] = gold.paths.front().size() - 1;
      m["gold_paths"] = gold.paths.size();
      break;
    case TaskKind::AggByRelation:
      m["anchor"] = g.label(q.anchor);
      m["relation"] = g.label(q.relation);
      m["direction"] = to_string(q.direction);
      m["true_count"] = gold.count;
      break;
    case TaskKind::AggNeighborProperty:
      m["anchor"] = g.label(q.anchor);
      m["relation"] = g.label(q.relation);
      m["direction"] = "outgoing";
      m["true_count"] = gold.count;
      break;
    case TaskKind::HighestDegree:
      m["direction"] = to_string(q.direction);
      m["degree"] = gold.count;
      break;
  }
  return m;
}

}  // namespace kgbench
