#pragma once

// Labeled directed multigraph K = (entities, relations, triples).
//
// Entities and relations live in separate dense id spaces. Triples form a
// set (duplicates collapse at build time) and are kept sorted by
// (subject, relation, object) id, which fixes the iteration order for every
// downstream consumer. Out/in adjacency are CSR arrays over that order.
// The graph is immutable once built.

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgbench/error.hpp"

namespace kgbench {

struct EntityId {
  std::uint32_t value = 0;
  friend auto operator<=>(EntityId, EntityId) = default;
};

struct RelationId {
  std::uint32_t value = 0;
  friend auto operator<=>(RelationId, RelationId) = default;
};

struct Triple {
  EntityId subject;
  RelationId relation;
  EntityId object;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct OutEdge {
  RelationId relation;
  EntityId object;
};

struct InEdge {
  RelationId relation;
  EntityId subject;
};

enum class Direction { Incoming, Outgoing, Total };

std::string_view to_string(Direction d);
Direction direction_from_string(std::string_view s);

using Path = std::vector<EntityId>;

class KnowledgeGraph {
 public:
  struct EntityInfo {
    std::string label;
    std::string category;    // empty when the source has no category data
    bool core = true;        // core (anchor) entity vs attribute entity
    std::string source_key;  // id token in the source files
  };
  struct RelationInfo {
    std::string label;
    std::string source_key;
  };

  class Builder {
   public:
    EntityId add_entity(EntityInfo info);
    RelationId add_relation(RelationInfo info);
    // Ids must already exist. Duplicates are counted and dropped at build().
    void add_triple(Triple t);
    void add_triple(EntityId s, RelationId r, EntityId o) { add_triple({s, r, o}); }

    std::size_t entity_count() const { return entities_.size(); }
    std::size_t relation_count() const { return relations_.size(); }

    KnowledgeGraph build() &&;
    // Number of triples dropped as duplicates by the last build().
    std::size_t duplicates() const { return duplicates_; }

   private:
    std::vector<EntityInfo> entities_;
    std::vector<RelationInfo> relations_;
    std::vector<Triple> triples_;
    std::size_t duplicates_ = 0;
    friend class KnowledgeGraph;
  };

  KnowledgeGraph() = default;

  std::size_t entity_count() const { return entities_.size(); }
  std::size_t relation_count() const { return relations_.size(); }
  std::size_t triple_count() const { return triples_.size(); }
  std::size_t duplicates_dropped() const { return duplicates_; }

  const EntityInfo& entity(EntityId e) const;
  const RelationInfo& relation(RelationId r) const;
  const std::string& label(EntityId e) const { return entity(e).label; }
  const std::string& label(RelationId r) const { return relation(r).label; }
  bool is_core(EntityId e) const { return entity(e).core; }
  bool has_categories() const;

  std::span<const Triple> triples() const { return triples_; }
  std::span<const OutEdge> out_edges(EntityId e) const;
  std::span<const InEdge> in_edges(EntityId e) const;

  bool contains(const Triple& t) const;
  bool contains(EntityId s, RelationId r, EntityId o) const {
    return contains(Triple{s, r, o});
  }

  // A self-loop counts once for in, once for out, twice for total.
  std::size_t degree(EntityId e, Direction d) const;

  // Distinct entities sharing at least one edge with e, either direction,
  // ascending id. Contains e itself iff e has a self-loop.
  std::vector<EntityId> neighbors(EntityId e) const;

  std::optional<EntityId> find_entity(std::string_view label) const;
  std::optional<RelationId> find_relation(std::string_view label) const;

  // Same topology and ids, entity labels replaced. labels.size() must equal
  // entity_count().
  KnowledgeGraph with_entity_labels(std::vector<std::string> labels) const;

  void check(EntityId e) const;
  void check(RelationId r) const;

 private:
  std::vector<EntityInfo> entities_;
  std::vector<RelationInfo> relations_;
  std::vector<Triple> triples_;
  std::vector<std::uint32_t> out_offsets_;
  std::vector<OutEdge> out_;
  std::vector<std::uint32_t> in_offsets_;
  std::vector<InEdge> in_;
  std::unordered_map<std::string, EntityId> entity_by_label_;
  std::unordered_map<std::string, RelationId> relation_by_label_;
  std::size_t duplicates_ = 0;

  void index();
};

// Undirected hop distance; nullopt when b is unreachable from a.
std::optional<std::size_t> bfs_distance(const KnowledgeGraph& g, EntityId a,
                                        EntityId b);

// Undirected hop distance from a to every entity, -1 where unreachable.
// Exploration stops beyond max_hops.
std::vector<int> bfs_distances(
    const KnowledgeGraph& g, EntityId a,
    int max_hops = std::numeric_limits<int>::max());

struct ShortestPaths {
  std::vector<Path> paths;  // lexicographic by entity id sequence
  bool truncated = false;   // true when the cap cut enumeration short
};

// Every minimum-length undirected path from a to b. a must differ from b.
ShortestPaths all_shortest_paths(
    const KnowledgeGraph& g, EntityId a, EntityId b,
    std::size_t cap = std::numeric_limits<std::size_t>::max());

// True iff some triple joins u and v in either direction.
bool adjacent(const KnowledgeGraph& g, EntityId u, EntityId v);

// ---------------------------------------------------------------------------
// Loading

struct TsvSources {
  std::string entities;             // id<TAB>label, core entities
  std::string relations;            // id<TAB>label
  std::string edges;                // head<TAB>tail<TAB>relation
  std::string attribute_entities;   // optional, id<TAB>label
  std::string attribute_relations;  // optional, id<TAB>label
  std::string attribute_edges;      // optional, same layout as edges
  std::string categories;           // optional, entity_id<TAB>category
};

struct LoadReport {
  std::size_t core_entities = 0;
  std::size_t attribute_entities = 0;
  std::size_t core_relations = 0;
  std::size_t attribute_relations = 0;
  std::size_t core_facts = 0;       // after deduplication
  std::size_t attribute_facts = 0;  // after deduplication
  std::size_t duplicate_edges = 0;
  std::size_t triples = 0;

  std::string to_json() const;
};

struct LoadedGraph {
  KnowledgeGraph graph;
  LoadReport report;
};

LoadedGraph load_labeled_tsv(const TsvSources& sources);

// Convenience for the plain three-file layout.
LoadedGraph load_labeled_tsv(const std::string& entities_file,
                             const std::string& relations_file,
                             const std::string& edges_file);

}  // namespace kgbench
