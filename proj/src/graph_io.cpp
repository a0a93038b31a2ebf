#include <algorithm>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "kgbench/graph.hpp"
#include "kgbench/util.hpp"

namespace kgbench {
namespace {

bool is_header(std::string_view first_field) {
  static const char* names[] = {"id",          "entityid",   "entity_id", "relationid",
                                "relation_id", "headentity", "head",      "head_id"};
  std::string f = to_lower_ascii(trim(first_field));
  return std::find(std::begin(names), std::end(names), f) != std::end(names);
}

struct Row {
  std::size_t line;
  std::vector<std::string_view> fields;
};

// Non-blank rows; a recognised header on the first line is skipped.
std::vector<Row> read_rows(const std::string& file, const std::string& text,
                           std::size_t min_fields) {
  std::vector<Row> rows;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto fields = split(lines[i], '\t');
    if (i == 0 && is_header(fields[0])) continue;
    if (fields.size() < min_fields)
      throw ParseError(file, i + 1,
                       "expected at least " + std::to_string(min_fields) +
                           " tab-separated fields, got " + std::to_string(fields.size()));
    for (auto& f : fields) f = trim(f);
    if (fields[0].empty()) throw ParseError(file, i + 1, "empty id field");
    rows.push_back({i + 1, std::move(fields)});
  }
  return rows;
}

class Loader {
 public:
  void entities(const std::string& file, bool core) {
    std::string text = read_file(file);
    for (const Row& row : read_rows(file, text, 2)) {
      std::string key(row.fields[0]);
      if (entity_ids_.count(key))
        throw ParseError(file, row.line, "duplicate entity id '" + key + "'");
      entity_ids_.emplace(key, EntityId{static_cast<std::uint32_t>(entities_.size())});
      // Label is the last column, so id<TAB>wikidata_id<TAB>label loads too.
      entities_.push_back({std::string(row.fields.back()), "", core, std::move(key)});
      ++(core ? report_.core_entities : report_.attribute_entities);
    }
  }

  void relations(const std::string& file, bool core) {
    std::string text = read_file(file);
    for (const Row& row : read_rows(file, text, 2)) {
      std::string key(row.fields[0]);
      if (relation_ids_.count(key))
        throw ParseError(file, row.line, "duplicate relation id '" + key + "'");
      relation_ids_.emplace(key, RelationId{static_cast<std::uint32_t>(relations_.size())});
      relations_.push_back({std::string(row.fields.back()), std::move(key)});
      ++(core ? report_.core_relations : report_.attribute_relations);
    }
  }

  void categories(const std::string& file) {
    std::string text = read_file(file);
    for (const Row& row : read_rows(file, text, 2))
      entities_[entity(file, row.line, row.fields[0]).value].category =
          std::string(row.fields[1]);
  }

  // Returns the number of new (non-duplicate) triples.
  std::size_t edges(const std::string& file) {
    std::string text = read_file(file);
    std::size_t added = 0;
    for (const Row& row : read_rows(file, text, 3)) {
      EntityId head = entity(file, row.line, row.fields[0]);
      EntityId tail = entity(file, row.line, row.fields[1]);
      RelationId rel = relation(file, row.line, row.fields[2]);
      Triple t{head, rel, tail};
      if (!seen_.insert(t).second) {
        ++report_.duplicate_edges;
        continue;
      }
      ++added;
    }
    return added;
  }

  LoadedGraph finish() && {
    KnowledgeGraph::Builder b;
    for (auto& e : entities_) b.add_entity(std::move(e));
    for (auto& r : relations_) b.add_relation(std::move(r));
    for (const Triple& t : seen_) b.add_triple(t);
    KnowledgeGraph g = std::move(b).build();
    report_.triples = g.triple_count();
    return {std::move(g), report_};
  }

  LoadReport& report() { return report_; }

 private:
  EntityId entity(const std::string& file, std::size_t line, std::string_view key) {
    auto it = entity_ids_.find(std::string(key));
    if (it == entity_ids_.end())
      throw ParseError(file, line, "unknown entity id '" + std::string(key) + "'");
    return it->second;
  }
  RelationId relation(const std::string& file, std::size_t line, std::string_view key) {
    auto it = relation_ids_.find(std::string(key));
    if (it == relation_ids_.end())
      throw ParseError(file, line, "unknown relation id '" + std::string(key) + "'");
    return it->second;
  }

  std::vector<KnowledgeGraph::EntityInfo> entities_;
  std::vector<KnowledgeGraph::RelationInfo> relations_;
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
  std::set<Triple> seen_;
  LoadReport report_;
};

}  // namespace

std::string LoadReport::to_json() const {
  nlohmann::ordered_json j;
  j["core_entities"] = core_entities;
  j["attribute_entities"] = attribute_entities;
  j["core_relations"] = core_relations;
  j["attribute_relations"] = attribute_relations;
  j["core_facts"] = core_facts;
  j["attribute_facts"] = attribute_facts;
  j["duplicate_edges"] = duplicate_edges;
  j["triples"] = triples;
  return j.dump();
}

LoadedGraph load_labeled_tsv(const TsvSources& src) {
  Loader loader;
  loader.entities(src.entities, true);
  if (!src.attribute_entities.empty()) loader.entities(src.attribute_entities, false);
  loader.relations(src.relations, true);
  if (!src.attribute_relations.empty()) loader.relations(src.attribute_relations, false);
  if (!src.categories.empty()) loader.categories(src.categories);

  std::size_t core = loader.edges(src.edges);
  if (core == 0) throw Error("empty edge file: " + src.edges);
  std::size_t attr = src.attribute_edges.empty() ? 0 : loader.edges(src.attribute_edges);
  loader.report().core_facts = core;
  loader.report().attribute_facts = attr;

  LoadedGraph loaded = std::move(loader).finish();
  if (loaded.report.duplicate_edges > 0)
    spdlog::info("loader: dropped {} duplicate edges", loaded.report.duplicate_edges);
  return loaded;
}

LoadedGraph load_labeled_tsv(const std::string& entities_file,
                             const std::string& relations_file,
                             const std::string& edges_file) {
  TsvSources src;
  src.entities = entities_file;
  src.relations = relations_file;
  src.edges = edges_file;
  return load_labeled_tsv(src);
}

}  // namespace kgbench
