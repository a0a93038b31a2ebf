#include "kgbench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "kgbench/util.hpp"

namespace kgbench {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view to_string(PseudoMode m) {
  switch (m) {
    case PseudoMode::Off:
      return "off";
    case PseudoMode::On:
      return "on";
    case PseudoMode::Both:
      return "both";
  }
  return "?";
}

PseudoMode pseudo_mode_from_string(std::string_view s) {
  if (s == "off") return PseudoMode::Off;
  if (s == "on") return PseudoMode::On;
  if (s == "both") return PseudoMode::Both;
  throw ConfigError("pseudonymize must be off, on or both, not '" + std::string(s) + "'");
}

// ---- config -----------------------------------------------------------------

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

SamplingParams sampling_from_json(const nlohmann::json& j, SamplingParams p) {
  check_keys(j, {"num_seed_entities", "radius", "max_edges", "min_degree", "max_attempts"},
             "sampling");
  p.num_seed_entities = j.value("num_seed_entities", p.num_seed_entities);
  p.radius = j.value("radius", p.radius);
  p.max_edges = j.value("max_edges", p.max_edges);
  p.min_degree = j.value("min_degree", p.min_degree);
  p.max_attempts = j.value("max_attempts", p.max_attempts);
  try {
    p.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("sampling: ") + e.what());
  }
  return p;
}

nlohmann::json sampling_to_json(const SamplingParams& p) {
  return {{"num_seed_entities", p.num_seed_entities},
          {"radius", p.radius},
          {"max_edges", p.max_edges},
          {"min_degree", p.min_degree},
          {"max_attempts", p.max_attempts}};
}

nlohmann::json task_to_json(const TaskConfig& t) {
  return {{"instances", t.instances},
          {"sampling", sampling_to_json(t.params.sampling)},
          {"path_cap", t.params.path_cap},
          {"max_attempts", t.params.max_attempts}};
}

TaskKind task_or_config_error(std::string_view s) {
  try {
    return task_from_string(s);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

Format format_or_config_error(std::string_view s) {
  try {
    return format_from_string(s);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::string> graph_files(const TsvSources& g) {
  return {g.entities,           g.relations,       g.edges,     g.attribute_entities,
          g.attribute_relations, g.attribute_edges, g.categories};
}

std::string file_sha(const std::string& path, const std::string& what) {
  if (!fs::exists(path)) throw ConfigError(what + " not found: " + path);
  return sha256_hex(read_file(path));
}

std::string json_digest(const nlohmann::json& j) { return sha256_hex(j.dump()); }

}  // namespace

BenchConfig BenchConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  check_keys(j,
             {"seed", "graph", "tasks", "pseudonymize", "pseudonyms", "pseudonym_scope", "formats",
              "endpoints", "output_dir", "cache_dir", "concurrency", "templates",
              "swap_preambles"},
             "config");
  BenchConfig c;
  try {
    if (!j.contains("seed")) throw ConfigError("config: seed is required");
    const auto& sj = j.at("seed");
    if (!sj.is_number_integer() || (!sj.is_number_unsigned() && sj.get<std::int64_t>() < 0))
      throw ConfigError("config: seed must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();

    if (!j.contains("graph")) throw ConfigError("config: graph is required");
    const auto& g = j.at("graph");
    check_keys(g,
               {"entities", "relations", "edges", "attribute_entities", "attribute_relations",
                "attribute_edges", "categories"},
               "graph");
    auto path = [&](const char* key) { return resolve(base_dir, g.value(key, std::string())); };
    c.graph.entities = path("entities");
    c.graph.relations = path("relations");
    c.graph.edges = path("edges");
    c.graph.attribute_entities = path("attribute_entities");
    c.graph.attribute_relations = path("attribute_relations");
    c.graph.attribute_edges = path("attribute_edges");
    c.graph.categories = path("categories");

    for (TaskKind t : kAllTasks) c.tasks[t] = TaskConfig{false, 100, TaskParams::defaults(t)};
    if (j.contains("tasks")) {
      if (!j.at("tasks").is_object()) throw ConfigError("config: tasks must be an object");
      for (auto& [name, tj] : j.at("tasks").items()) {
        const TaskKind t = task_or_config_error(name);
        check_keys(tj, {"enabled", "instances", "sampling", "path_cap", "max_attempts"},
                   "tasks." + name);
        TaskConfig& tc = c.tasks[t];
        tc.enabled = tj.value("enabled", true);
        const auto n = tj.value("instances", std::int64_t{100});
        if (n < 1) throw ConfigError("tasks." + name + ": instances must be >= 1");
        tc.instances = static_cast<std::size_t>(n);
        if (tj.contains("sampling"))
          tc.params.sampling = sampling_from_json(tj.at("sampling"), tc.params.sampling);
        tc.params.path_cap = tj.value("path_cap", tc.params.path_cap);
        tc.params.max_attempts = tj.value("max_attempts", tc.params.max_attempts);
      }
    } else {
      for (auto& [t, tc] : c.tasks) tc.enabled = true;
    }

    c.pseudonymize = pseudo_mode_from_string(j.value("pseudonymize", std::string("both")));
    c.pseudonyms = resolve(base_dir, j.value("pseudonyms", std::string()));
    c.pseudonym_scope =
        pseudonym_scope_from_string(j.value("pseudonym_scope", std::string("core_only")));

    if (j.contains("formats")) {
      for (const auto& f : j.at("formats")) c.formats.push_back(format_or_config_error(f.get<std::string>()));
    } else {
      c.formats.assign(kAllFormats.begin(), kAllFormats.end());
    }

    if (j.contains("endpoints")) {
      for (const auto& ej : j.at("endpoints")) {
        ModelEndpoint ep = ModelEndpoint::from_json(ej);
        if (!ep.replay_dir.empty()) ep.replay_dir = resolve(base_dir, ep.replay_dir.string());
        c.endpoints.push_back(std::move(ep));
      }
    }

    c.output_dir = resolve(base_dir, j.value("output_dir", std::string("out")));
    c.cache_dir = resolve(base_dir, j.value("cache_dir", std::string()));
    const auto conc = j.value("concurrency", std::int64_t{4});
    if (conc < 1 || conc > 256) throw ConfigError("config: concurrency must be in 1..256");
    c.concurrency = static_cast<std::size_t>(conc);
    c.templates = resolve(base_dir, j.value("templates", std::string()));
    c.swap_preambles = j.value("swap_preambles", false);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

BenchConfig BenchConfig::load(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path), nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j, fs::absolute(path).parent_path());
}

std::vector<TaskKind> BenchConfig::enabled_tasks() const {
  std::vector<TaskKind> out;
  for (TaskKind t : kAllTasks)
    if (auto it = tasks.find(t); it != tasks.end() && it->second.enabled) out.push_back(t);
  return out;
}

std::vector<bool> BenchConfig::pseudo_variants() const {
  switch (pseudonymize) {
    case PseudoMode::Off:
      return {false};
    case PseudoMode::On:
      return {true};
    case PseudoMode::Both:
      return {false, true};
  }
  return {false};
}

Templates BenchConfig::load_templates() const {
  Templates t = templates.empty() ? Templates::defaults() : Templates::load_overrides(templates);
  t.swap_loe_json_preambles = swap_preambles;
  return t;
}

void BenchConfig::validate() const {
  if (enabled_tasks().empty()) throw ConfigError("config: no task enabled");
  if (formats.empty()) throw ConfigError("config: no formats");
  if (endpoints.empty()) throw ConfigError("config: no endpoints");
  for (TaskKind t : enabled_tasks())
    if (tasks.at(t).instances < 1)
      throw ConfigError("tasks." + std::string(to_string(t)) + ": instances must be >= 1");
  std::set<std::string> ids;
  for (const auto& ep : endpoints)
    if (!ids.insert(ep.model_id).second)
      throw ConfigError("config: duplicate endpoint model_id '" + ep.model_id + "'");
  std::set<Format> fs_;
  for (Format f : formats)
    if (!fs_.insert(f).second)
      throw ConfigError("config: duplicate format '" + std::string(to_string(f)) + "'");
  if (pseudonymize != PseudoMode::Off && pseudonyms.empty())
    throw ConfigError("config: pseudonyms (pool CSV) is required when pseudonymize is on");
}

void Overrides::apply(BenchConfig& c) const {
  if (seed) c.seed = *seed;
  if (output_dir) c.output_dir = *output_dir;
  if (tasks) {
    std::set<TaskKind> keep;
    for (const auto& s : *tasks) keep.insert(task_or_config_error(s));
    for (auto& [t, tc] : c.tasks) tc.enabled = keep.count(t) > 0;
  }
  if (formats) {
    c.formats.clear();
    for (const auto& s : *formats) c.formats.push_back(format_or_config_error(s));
  }
  if (models) {
    std::vector<ModelEndpoint> kept;
    for (const auto& m : *models) {
      auto it = std::find_if(c.endpoints.begin(), c.endpoints.end(),
                             [&](const ModelEndpoint& ep) { return ep.model_id == m; });
      if (it == c.endpoints.end()) throw ConfigError("--models: unknown model '" + m + "'");
      kept.push_back(*it);
    }
    c.endpoints = std::move(kept);
  }
  if (pseudo) c.pseudonymize = pseudo_mode_from_string(*pseudo);
  c.validate();
}

// ---- digests ----------------------------------------------------------------

InputDigests input_digests(const BenchConfig& c) {
  InputDigests d;
  if (c.graph.entities.empty() || c.graph.relations.empty() || c.graph.edges.empty())
    throw ConfigError("config: graph.entities, graph.relations and graph.edges are required");
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : graph_files(c.graph))
    files.push_back(f.empty() ? std::string() : file_sha(f, "source graph file"));
  d.graph = json_digest(files);
  if (c.pseudonymize != PseudoMode::Off) d.pseudonyms = file_sha(c.pseudonyms, "pseudonym pool");
  return d;
}

std::string build_digest(const BenchConfig& c, TaskKind task, bool pseudo,
                         const InputDigests& inputs) {
  nlohmann::json j;
  j["schema"] = kInstanceSchema;
  j["seed"] = c.seed;
  j["graph"] = inputs.graph;
  j["task"] = to_string(task);
  j["params"] = task_to_json(c.tasks.at(task));
  j["templates"] = c.load_templates().digest();
  if (pseudo) {
    j["pseudonyms"] = inputs.pseudonyms;
    j["pseudonym_scope"] = to_string(c.pseudonym_scope);
  }
  return json_digest(j);
}

std::string run_digest(const BenchConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  for (TaskKind t : c.enabled_tasks()) j["tasks"][std::string(to_string(t))] = task_to_json(c.tasks.at(t));
  j["pseudonymize"] = to_string(c.pseudonymize);
  j["pseudonym_scope"] = to_string(c.pseudonym_scope);
  for (Format f : c.formats) j["formats"].push_back(to_string(f));
  for (const auto& ep : c.endpoints) {
    nlohmann::json e = {{"model_id", ep.model_id},
                        {"wire_model", ep.wire_model},
                        {"dialect", to_string(ep.dialect)},
                        {"base_url", ep.base_url},
                        {"temperature", ep.temperature},
                        {"max_tokens", ep.max_tokens},
                        {"echo_gold", ep.echo_gold},
                        {"canned", ep.canned},
                        {"default_response", ep.default_response.value_or("")},
                        {"replay_dir", ep.replay_dir.string()}};
    j["endpoints"].push_back(std::move(e));
  }
  j["templates"] = c.load_templates().digest();
  return json_digest(j);
}

// ---- instance serialization -------------------------------------------------

namespace {

ojson query_json(const KnowledgeGraph& g, const Query& q) {
  ojson j = ojson::object();
  switch (q.task) {
    case TaskKind::TripleRetrieval:
      j["subject"] = g.label(q.triple.subject);
      j["relation"] = g.label(q.triple.relation);
      j["object"] = g.label(q.triple.object);
      break;
    case TaskKind::ShortestPath:
      j["source"] = g.label(q.source);
      j["target"] = g.label(q.target);
      break;
    case TaskKind::AggByRelation:
    case TaskKind::AggNeighborProperty:
      j["anchor"] = g.label(q.anchor);
      j["relation"] = g.label(q.relation);
      j["direction"] = to_string(q.direction);
      break;
    case TaskKind::HighestDegree:
      j["direction"] = to_string(q.direction);
      break;
  }
  return j;
}

ojson label_triple(const KnowledgeGraph& g, const Triple& t) {
  return ojson::array({g.label(t.subject), g.label(t.relation), g.label(t.object)});
}

EntityId entity_by_label(const KnowledgeGraph& g, const std::string& label) {
  auto e = g.find_entity(label);
  if (!e) throw Error("unknown entity '" + label + "'");
  return *e;
}

RelationId relation_by_label(const KnowledgeGraph& g, const std::string& label) {
  auto r = g.find_relation(label);
  if (!r) throw Error("unknown relation '" + label + "'");
  return *r;
}

Triple triple_from_json(const KnowledgeGraph& g, const ojson& t) {
  if (!t.is_array() || t.size() != 3) throw Error("triple must be a 3-element array");
  return Triple{entity_by_label(g, t[0].get<std::string>()),
                relation_by_label(g, t[1].get<std::string>()),
                entity_by_label(g, t[2].get<std::string>())};
}

}  // namespace

std::vector<std::string> StoredInstance::entity_labels() const {
  std::vector<std::string> out;
  const auto& g = subgraph.graph;
  for (std::uint32_t i = 0; i < g.entity_count(); ++i) out.push_back(g.label(EntityId{i}));
  return out;
}

ojson StoredInstance::to_json() const {
  const KnowledgeGraph& g = subgraph.graph;
  ojson j;
  j["schema"] = kInstanceSchema;
  j["config_digest"] = config_digest;
  j["inputs"] = {{"graph", inputs.graph}, {"pseudonyms", inputs.pseudonyms}};
  j["task"] = to_string(task);
  j["index"] = index;
  j["pseudo"] = pseudo;
  j["seeds"] = {{"run", run_seed}, {"instance", instance_seed}};
  if (pseudo) j["seeds"]["pseudonyms"] = pseudonym_seed;

  ojson entities = ojson::array();
  for (std::uint32_t i = 0; i < g.entity_count(); ++i) {
    const auto& e = g.entity(EntityId{i});
    entities.push_back(ojson::array({e.label, e.category, e.core}));
  }
  ojson relations = ojson::array();
  for (std::uint32_t i = 0; i < g.relation_count(); ++i)
    relations.push_back(g.label(RelationId{i}));
  ojson triples = ojson::array();
  for (const Triple& t : g.triples()) triples.push_back(label_triple(g, t));
  j["graph"] = {{"entities", entities}, {"relations", relations}, {"triples", triples}};

  ojson seeds = ojson::array();
  for (EntityId e : subgraph.seed_entities) seeds.push_back(g.label(e));
  j["seed_entities"] = seeds;
  ojson prot = ojson::array();
  for (const Triple& t : subgraph.protected_triples) prot.push_back(label_triple(g, t));
  j["protected_triples"] = prot;

  j["query"] = query_json(g, query);
  j["question"] = question.question;
  j["answer_format"] = question.answer_format;
  j["question_block"] = question.block;
  j["gold"] = gold_json(g, gold);
  j["meta"] = meta;
  if (pseudo) {
    ojson pairs = ojson::array();
    for (const auto& [from, to] : pseudonyms) pairs.push_back(ojson::array({from, to}));
    j["pseudonyms"] = pairs;
  }
  return j;
}

StoredInstance StoredInstance::from_json(const ojson& j) {
  StoredInstance s;
  try {
    if (j.value("schema", std::string()) != kInstanceSchema)
      throw Error("unsupported schema '" + j.value("schema", std::string()) + "'");
    s.config_digest = j.at("config_digest").get<std::string>();
    s.inputs.graph = j.at("inputs").value("graph", std::string());
    s.inputs.pseudonyms = j.at("inputs").value("pseudonyms", std::string());
    s.task = task_from_string(j.at("task").get<std::string>());
    s.index = j.at("index").get<std::size_t>();
    s.pseudo = j.at("pseudo").get<bool>();
    s.run_seed = j.at("seeds").at("run").get<std::uint64_t>();
    s.instance_seed = j.at("seeds").at("instance").get<std::uint64_t>();
    if (s.pseudo) s.pseudonym_seed = j.at("seeds").at("pseudonyms").get<std::uint64_t>();

    const auto& gj = j.at("graph");
    KnowledgeGraph::Builder b;
    std::unordered_map<std::string, EntityId> ents;
    std::unordered_map<std::string, RelationId> rels;
    for (const auto& e : gj.at("entities")) {
      KnowledgeGraph::EntityInfo info{e.at(0).get<std::string>(), e.at(1).get<std::string>(),
                                      e.at(2).get<bool>(), std::string()};
      const std::string label = info.label;
      if (!ents.emplace(label, b.add_entity(std::move(info))).second)
        throw Error("duplicate entity label '" + label + "'");
    }
    for (const auto& r : gj.at("relations")) {
      const std::string label = r.get<std::string>();
      if (!rels.emplace(label, b.add_relation({label, std::string()})).second)
        throw Error("duplicate relation label '" + label + "'");
    }
    auto ent = [&](const ojson& v) {
      auto it = ents.find(v.get<std::string>());
      if (it == ents.end()) throw Error("triple names unknown entity '" + v.get<std::string>() + "'");
      return it->second;
    };
    for (const auto& t : gj.at("triples")) {
      auto it = rels.find(t.at(1).get<std::string>());
      if (it == rels.end())
        throw Error("triple names unknown relation '" + t.at(1).get<std::string>() + "'");
      b.add_triple(ent(t.at(0)), it->second, ent(t.at(2)));
    }
    s.subgraph.graph = std::move(b).build();
    const KnowledgeGraph& g = s.subgraph.graph;

    for (const auto& e : j.at("seed_entities"))
      s.subgraph.seed_entities.push_back(entity_by_label(g, e.get<std::string>()));
    for (const auto& t : j.at("protected_triples"))
      s.subgraph.protected_triples.push_back(triple_from_json(g, t));

    const auto& q = j.at("query");
    s.query.task = s.task;
    switch (s.task) {
      case TaskKind::TripleRetrieval:
        s.query.triple = {entity_by_label(g, q.at("subject").get<std::string>()),
                          relation_by_label(g, q.at("relation").get<std::string>()),
                          entity_by_label(g, q.at("object").get<std::string>())};
        break;
      case TaskKind::ShortestPath:
        s.query.source = entity_by_label(g, q.at("source").get<std::string>());
        s.query.target = entity_by_label(g, q.at("target").get<std::string>());
        break;
      case TaskKind::AggByRelation:
      case TaskKind::AggNeighborProperty:
        s.query.anchor = entity_by_label(g, q.at("anchor").get<std::string>());
        s.query.relation = relation_by_label(g, q.at("relation").get<std::string>());
        s.query.direction = direction_from_string(q.at("direction").get<std::string>());
        break;
      case TaskKind::HighestDegree:
        s.query.direction = direction_from_string(q.at("direction").get<std::string>());
        break;
    }

    s.meta = j.at("meta");
    const GoldAnswer ga = GoldAnswer::from_json(s.task, j.at("gold"));
    s.gold.kind = ga.kind;
    s.gold.truth = ga.truth;
    s.gold.count = ga.count;
    if (ga.kind == AnswerKind::EntityLabel) {
      s.gold.entity = entity_by_label(g, ga.entity);
      s.gold.count = s.meta.at("degree").get<std::int64_t>();
    }
    for (const auto& p : ga.paths) {
      Path path;
      for (const auto& label : p) path.push_back(entity_by_label(g, label));
      s.gold.paths.push_back(std::move(path));
    }

    s.question.question = j.at("question").get<std::string>();
    s.question.answer_format = j.at("answer_format").get<std::string>();
    s.question.block = j.at("question_block").get<std::string>();
    if (s.pseudo && j.contains("pseudonyms"))
      for (const auto& p : j.at("pseudonyms"))
        s.pseudonyms.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("instance: ") + e.what());
  }
  return s;
}

std::string instance_file_name(TaskKind task, bool pseudo) {
  return std::string(to_string(task)) + (pseudo ? ".pseudo.jsonl" : ".jsonl");
}

std::vector<StoredInstance> read_instances(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("instance file not found: " + path.string());
  const std::string text = read_file(path);
  std::vector<StoredInstance> out;
  std::size_t n = 0;
  for (std::string_view line : split_lines(text)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(StoredInstance::from_json(ojson::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), n, e.what());
    } catch (const Error& e) {
      throw ParseError(path.string(), n, e.what());
    }
  }
  return out;
}

// ---- build ------------------------------------------------------------------

namespace {

fs::path instances_dir(const BenchConfig& c) { return c.output_dir / "instances"; }

// Calls fn(i) for i in [0, n) on up to `threads` workers; rethrows the
// exception of the lowest failing index.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::optional<std::size_t> failed_at;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failed_at || i < *failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void write_manifest(const BenchConfig& c) {
  const fs::path dir = instances_dir(c);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  ojson m;
  m["schema"] = "kgbench.manifest/1";
  m["files"] = ojson::array();
  for (const auto& f : files) {
    const std::string text = read_file(f);
    std::size_t lines = 0;
    std::string digest;
    for (std::string_view line : split_lines(text)) {
      if (trim(line).empty()) continue;
      if (!lines++) digest = nlohmann::json::parse(line).value("config_digest", std::string());
    }
    m["files"].push_back({{"name", f.filename().string()},
                          {"lines", lines},
                          {"sha256", sha256_hex(text)},
                          {"config_digest", digest}});
  }
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

std::vector<StoredInstance> build_task(const BenchConfig& c, const KnowledgeGraph& k,
                                       TaskKind task, const PseudonymPool* pool) {
  const TaskConfig& tc = c.tasks.at(task);
  const Templates templates = c.load_templates();
  const auto variants = c.pseudo_variants();
  const bool want_plain = std::find(variants.begin(), variants.end(), false) != variants.end();
  const bool want_pseudo = std::find(variants.begin(), variants.end(), true) != variants.end();
  if (want_pseudo && !pool) throw ConfigError("build: pseudonym pool not loaded");

  std::vector<bool> labels;
  if (task == TaskKind::TripleRetrieval) labels = triple_retrieval_labels(c.seed, tc.instances);

  const std::size_t per = std::size_t(want_plain) + std::size_t(want_pseudo);
  std::vector<StoredInstance> out(tc.instances * per);
  parallel_for(tc.instances, c.concurrency, [&](std::size_t i) {
    std::optional<bool> positive;
    if (task == TaskKind::TripleRetrieval) positive = labels[i];
    TaskInstance ti = generate_instance(k, tc.params, c.seed, i, positive);

    StoredInstance plain;
    plain.task = task;
    plain.index = i;
    plain.run_seed = c.seed;
    plain.instance_seed = ti.rng_seed;
    plain.query = ti.query;
    plain.gold = ti.gold;
    plain.question = question_text(ti.subgraph.graph, ti.query, templates);
    plain.meta = meta_json(ti.subgraph.graph, ti.query, ti.gold);

    std::size_t slot = i * per;
    if (want_pseudo) {
      StoredInstance ps = plain;
      ps.pseudo = true;
      ps.pseudonym_seed = child_seed(ti.rng_seed, "pseudonyms", 0);
      Rng rng(ps.pseudonym_seed);
      const PseudonymMapping mapping = build_mapping(ti.subgraph.graph, *pool, rng, c.pseudonym_scope);
      ps.subgraph = apply_mapping(ti.subgraph, mapping);
      verify(ps.subgraph.graph, ps.query, ps.gold, tc.params.path_cap);
      ps.question = question_text(ps.subgraph.graph, ps.query, templates);
      ps.meta = meta_json(ps.subgraph.graph, ps.query, ps.gold);
      for (const auto& [e, name] : mapping.pairs)
        ps.pseudonyms.emplace_back(ti.subgraph.graph.label(e), name);
      ps.subgraph.source_entity.clear();
      ps.subgraph.source_relation.clear();
      out[slot + (want_plain ? 1 : 0)] = std::move(ps);
    }
    if (want_plain) {
      plain.subgraph = std::move(ti.subgraph);
      plain.subgraph.source_entity.clear();
      plain.subgraph.source_relation.clear();
      out[slot] = std::move(plain);
    }
  });
  return out;
}

BuildResult build(const BenchConfig& c) {
  c.validate();
  const InputDigests inputs = input_digests(c);
  LoadedGraph loaded = load_labeled_tsv(c.graph);
  spdlog::info("loaded graph: {}", loaded.report.to_json());

  std::optional<PseudonymPool> pool;
  if (c.pseudonymize != PseudoMode::Off) pool = PseudonymPool::load_csv(c.pseudonyms);

  BuildResult result;
  result.load_report = loaded.report;
  const fs::path dir = instances_dir(c);
  fs::create_directories(dir);
  for (TaskKind task : c.enabled_tasks()) {
    std::vector<StoredInstance> all = build_task(c, loaded.graph, task, pool ? &*pool : nullptr);
    for (bool pseudo : c.pseudo_variants()) {
      const std::string digest = build_digest(c, task, pseudo, inputs);
      std::string text;
      for (auto& inst : all) {
        if (inst.pseudo != pseudo) continue;
        inst.config_digest = digest;
        inst.inputs = inputs;
        if (!pseudo) inst.inputs.pseudonyms.clear();
        text += inst.to_json().dump();
        text += '\n';
        ++result.instances;
      }
      const fs::path path = dir / instance_file_name(task, pseudo);
      write_file_atomic(path, text);
      result.files.push_back(path);
      spdlog::info("wrote {}", path.string());
    }
  }
  write_manifest(c);
  return result;
}

// ---- run --------------------------------------------------------------------

fs::path records_path(const BenchConfig& c) { return c.output_dir / "records.jsonl"; }

namespace {

bool record_less(const EvalRecord& a, const EvalRecord& b) {
  return std::forward_as_tuple(a.task, a.instance_index, a.format, a.model_id, a.pseudo) <
         std::forward_as_tuple(b.task, b.instance_index, b.format, b.model_id, b.pseudo);
}

// Reads the records file of an interrupted run. A malformed final line is a
// partial write and is dropped; malformed lines elsewhere are errors.
std::vector<EvalRecord> read_partial_records(const fs::path& path) {
  std::vector<EvalRecord> out;
  if (!fs::exists(path)) return out;
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (trim(lines[n]).empty()) continue;
    try {
      out.push_back(EvalRecord::from_json(nlohmann::json::parse(lines[n])));
    } catch (const std::exception& e) {
      const bool last = n + 1 == lines.size();
      if (!last) throw ParseError(path.string(), n + 1, e.what());
      spdlog::warn("{}:{}: dropping partial record", path.string(), n + 1);
    }
  }
  return out;
}

std::string records_text(std::vector<EvalRecord> records) {
  std::stable_sort(records.begin(), records.end(), record_less);
  std::string text;
  for (const auto& r : records) {
    text += r.to_json().dump();
    text += '\n';
  }
  return text;
}

struct Job {
  const StoredInstance* instance;
  Format format;
  const ModelEndpoint* endpoint;
};

}  // namespace

RunResult run(const BenchConfig& c, const RunOptions& opt) {
  c.validate();
  const Templates templates = c.load_templates();
  const std::string digest = run_digest(c);

  // Current input digests where the sources are still present; instance
  // files remain usable without them.
  std::optional<InputDigests> current;
  try {
    current = input_digests(c);
  } catch (const ConfigError& e) {
    spdlog::info("source inputs unavailable ({}); trusting stored input digests", e.what());
  }

  std::vector<std::vector<StoredInstance>> files;
  for (TaskKind task : c.enabled_tasks()) {
    for (bool pseudo : c.pseudo_variants()) {
      const fs::path path = instances_dir(c) / instance_file_name(task, pseudo);
      if (!fs::exists(path))
        throw ConfigError("missing instance file " + path.string() + "; run build first");
      auto insts = read_instances(path);
      const std::size_t want = c.tasks.at(task).instances;
      if (insts.size() != want)
        throw ConfigError(path.string() + ": " + std::to_string(insts.size()) +
                          " instances, config asks for " + std::to_string(want));
      for (const auto& inst : insts) {
        InputDigests in = current ? *current : inst.inputs;
        if (!pseudo) in.pseudonyms.clear();
        const std::string expected = build_digest(c, task, pseudo, in);
        if (inst.config_digest != expected) {
          if (!opt.allow_digest_mismatch)
            throw ConfigError(path.string() +
                              ": built from a different configuration (digest mismatch); "
                              "rebuild or override");
          spdlog::warn("{}: digest mismatch accepted", path.string());
          break;
        }
      }
      files.push_back(std::move(insts));
    }
  }

  // Canonical job order: task, instance, format, model, plain before pseudo.
  std::vector<Job> jobs;
  {
    std::vector<const StoredInstance*> all;
    for (const auto& f : files)
      for (const auto& inst : f) all.push_back(&inst);
    std::stable_sort(all.begin(), all.end(), [](const StoredInstance* a, const StoredInstance* b) {
      return std::tie(a->task, a->index, a->pseudo) < std::tie(b->task, b->index, b->pseudo);
    });
    std::vector<const StoredInstance*> ordered;
    for (std::size_t i = 0; i < all.size();) {
      std::size_t j = i;
      while (j < all.size() && all[j]->task == all[i]->task && all[j]->index == all[i]->index) ++j;
      for (Format f : c.formats)
        for (const auto& ep : c.endpoints)
          for (std::size_t k = i; k < j; ++k) jobs.push_back({all[k], f, &ep});
      i = j;
    }
  }

  const fs::path out_path = records_path(c);
  fs::create_directories(c.output_dir);
  std::vector<EvalRecord> existing;
  if (opt.resume) {
    existing = read_partial_records(out_path);
  } else if (fs::exists(out_path) && fs::file_size(out_path) > 0) {
    spdlog::warn("{} exists; starting a fresh run (use --resume to continue it)", out_path.string());
  }
  // Rewrite cleanly so appends never follow a partial line.
  {
    std::map<std::string, EvalRecord> dedup;
    for (auto& r : existing) dedup.emplace(r.key(), std::move(r));
    existing.clear();
    for (auto& [k, r] : dedup) existing.push_back(std::move(r));
    write_file_atomic(out_path, records_text(existing));
  }
  std::set<std::string> done;
  for (const auto& r : existing) done.insert(r.key());

  std::vector<const Job*> todo;
  RunResult result;
  result.records_file = out_path;
  for (const auto& job : jobs) {
    EvalRecord probe;
    probe.task = job.instance->task;
    probe.instance_index = job.instance->index;
    probe.format = job.format;
    probe.model_id = job.endpoint->model_id;
    probe.pseudo = job.instance->pseudo;
    if (done.count(probe.key()))
      ++result.skipped;
    else
      todo.push_back(&job);
  }
  if (opt.limit && todo.size() > *opt.limit) todo.resize(*opt.limit);
  spdlog::info("run: {} jobs, {} already done, {} to execute", jobs.size(), result.skipped,
               todo.size());

  Gateway gateway(c.endpoints);
  const ResponseCache cache(c.cache_dir.empty() ? c.output_dir / "cache" : c.cache_dir);
  std::ofstream out(out_path, std::ios::app | std::ios::binary);
  if (!out) throw Error("cannot append to " + out_path.string());
  std::mutex out_mu;
  std::atomic<std::size_t> executed{0};

  parallel_for(todo.size(), c.concurrency, [&](std::size_t i) {
    const Job& job = *todo[i];
    const StoredInstance& inst = *job.instance;
    const ModelEndpoint& ep = *job.endpoint;
    EvalRecord r;
    r.model_id = ep.model_id;
    r.format = job.format;
    r.task = inst.task;
    r.instance_index = inst.index;
    r.pseudo = inst.pseudo;
    r.temperature = ep.temperature;
    r.max_tokens = ep.max_tokens;
    r.meta = inst.meta;
    r.config_digest = digest;
    try {
      const TextualizedPrompt prompt =
          render(inst.subgraph.graph, job.format, inst.question.block, templates);
      r.prompt_sha256 = sha256_hex(prompt.full_prompt);
      const GoldAnswer gold = inst.gold_answer();
      CompletionRequest req{prompt.full_prompt, answer_text(gold)};
      const CompletionResult res = cached_complete(cache, gateway, ep.model_id, req);
      r.raw_response = res.text;
      r.input_tokens = res.input_tokens;
      r.output_tokens = res.output_tokens;
      r.truncated = res.truncated;
      r.cache_hit = res.cache_hit;
      r.retries = res.retries;
      score_record(r, gold, inst.entity_labels());
    } catch (const GatewayError& e) {
      r.error = e.what();
    } catch (const Error& e) {
      r.error = std::string("internal: ") + e.what();
    }
    if (!r.error.empty()) {
      r.score.reset();
      r.flexible_score.reset();
      spdlog::warn("{}: {}", r.key(), r.error);
    }
    const std::string line = r.to_json().dump() + "\n";
    std::lock_guard lock(out_mu);
    out << line;
    out.flush();
    ++executed;
  });
  out.close();

  std::vector<EvalRecord> all = read_partial_records(out_path);
  write_file_atomic(out_path, records_text(all));
  std::set<std::string> keys;
  for (const auto& r : all) {
    keys.insert(r.key());
    if (!r.error.empty()) ++result.errors;
  }
  result.records = all.size();
  result.executed = executed.load();
  result.complete = true;
  for (const auto& job : jobs) {
    EvalRecord probe;
    probe.task = job.instance->task;
    probe.instance_index = job.instance->index;
    probe.format = job.format;
    probe.model_id = job.endpoint->model_id;
    probe.pseudo = job.instance->pseudo;
    if (!keys.count(probe.key())) {
      result.complete = false;
      break;
    }
  }
  return result;
}

// ---- report -----------------------------------------------------------------

ReportResult report(const BenchConfig& c) {
  const fs::path path = records_path(c);
  std::vector<EvalRecord> records;
  if (fs::exists(path)) records = read_records(path.string());
  ReportResult result;
  result.summary = aggregate(records);

  std::set<std::string> digests;
  for (const auto& r : records) digests.insert(r.config_digest);

  ojson j = result.summary.to_json();
  j["config_digests"] = digests;
  const std::string digest_list = [&] {
    std::string s;
    for (const auto& d : digests) s += (s.empty() ? "" : ", ") + d;
    return s;
  }();

  fs::create_directories(c.output_dir);
  const fs::path csv = c.output_dir / "summary.csv";
  const fs::path js = c.output_dir / "summary.json";
  const fs::path txt = c.output_dir / "digest.txt";
  write_file_atomic(csv, result.summary.to_csv());
  write_file_atomic(js, j.dump(2) + "\n");
  write_file_atomic(txt, "Config digest: " + digest_list + "\n" + result.summary.digest());
  result.files = {csv, js, txt};
  return result;
}

// ---- validate / render ------------------------------------------------------

ValidateResult validate(const BenchConfig& c) {
  const Templates templates = c.load_templates();
  ValidateResult result;
  for (TaskKind task : c.enabled_tasks()) {
    for (bool pseudo : c.pseudo_variants()) {
      const fs::path path = instances_dir(c) / instance_file_name(task, pseudo);
      for (const auto& inst : read_instances(path)) {
        ++result.instances;
        const std::string where = path.filename().string() + "#" + std::to_string(inst.index);
        try {
          verify(inst.subgraph.graph, inst.query, inst.gold, c.tasks.at(task).params.path_cap);
        } catch (const OracleMismatch& e) {
          result.failures.push_back(where + ": " + e.what());
        }
        const QuestionText q = question_text(inst.subgraph.graph, inst.query, templates);
        if (q.block != inst.question.block)
          result.failures.push_back(where + ": stored question differs from the template");
        if (inst.pseudonyms.empty()) continue;
        for (Format f : c.formats) {
          const auto prompt = render(inst.subgraph.graph, f, inst.question.block, templates);
          for (const auto& [original, replacement] : inst.pseudonyms)
            if (contains_word(prompt.full_prompt, original))
              result.failures.push_back(where + ": original label '" + original + "' in " +
                                        std::string(to_string(f)) + " prompt");
        }
      }
    }
  }
  return result;
}

std::string render_prompt(const BenchConfig& c, TaskKind task, std::size_t index, Format format,
                          bool pseudo) {
  const fs::path path = instances_dir(c) / instance_file_name(task, pseudo);
  for (const auto& inst : read_instances(path))
    if (inst.index == index)
      return render(inst.subgraph.graph, format, inst.question.block, c.load_templates()).full_prompt;
  throw ConfigError(path.string() + ": no instance " + std::to_string(index));
}

}  // namespace kgbench
