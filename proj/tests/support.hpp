#pragma once

// Shared helpers for the test binaries: fixture loading and random graphs.

#include <string>

#include "kgbench/graph.hpp"
#include "kgbench/rng.hpp"

namespace kgbench::testing {

inline std::string source_path(const std::string& rel) {
  return std::string(KGBENCH_SOURCE_DIR) + "/" + rel;
}

// The seven-country example graph with ten edges.
inline KnowledgeGraph appendix_fixture() {
  const std::string dir = source_path("data/fixtures/appendix_d/");
  TsvSources src;
  src.entities = dir + "entities.tsv";
  src.attribute_entities = dir + "attributes.tsv";
  src.relations = dir + "relations.tsv";
  src.edges = dir + "edges.tsv";
  src.categories = dir + "categories.tsv";
  return load_labeled_tsv(src).graph;
}

inline EntityId id(const KnowledgeGraph& g, std::string_view label) {
  auto e = g.find_entity(label);
  if (!e) throw Error("test: no entity " + std::string(label));
  return *e;
}

inline RelationId rel(const KnowledgeGraph& g, std::string_view label) {
  auto r = g.find_relation(label);
  if (!r) throw Error("test: no relation " + std::string(label));
  return *r;
}

struct RandomGraphSpec {
  std::size_t max_nodes = 12;
  std::size_t max_edges = 30;
  std::size_t max_relations = 4;
  bool self_loops = true;
  bool awkward_labels = false;  // punctuation, quotes, YAML-reserved words
};

// Labels that stress quoting in every format.
inline std::string awkward_label(Rng& rng, std::size_t i) {
  static const char* pool[] = {"true",        "null",     "12",        "3.5",
                               "a, b",        "x (y)",    "say \"hi\"", "back\\slash",
                               "key: value",  "# hash",   "- dash",    " padded ",
                               "tab\there",   "colon:",   "[list]",    "{map}",
                               "amp & more",  "Zoë",      "@at",       "'single'",
                               "ex:1",        "yes",      "~",         "ends with ."};
  constexpr std::size_t n = sizeof(pool) / sizeof(pool[0]);
  if (rng.below(3) == 0) return "Node " + std::to_string(i);
  return std::string(pool[rng.below(n)]) + " " + std::to_string(i);
}

inline KnowledgeGraph random_graph(Rng& rng, const RandomGraphSpec& spec = {}) {
  KnowledgeGraph::Builder b;
  const std::size_t n = 2 + rng.below(spec.max_nodes - 1);
  const std::size_t nr = 1 + rng.below(spec.max_relations);
  for (std::size_t i = 0; i < n; ++i) {
    std::string label = spec.awkward_labels ? awkward_label(rng, i) : "E" + std::to_string(i);
    b.add_entity({label, rng.coin() ? "Country" : "", rng.below(4) != 0, "Q" + std::to_string(i)});
  }
  for (std::size_t r = 0; r < nr; ++r) {
    std::string label = spec.awkward_labels ? awkward_label(rng, 100 + r) : "r" + std::to_string(r);
    b.add_relation({label, "P" + std::to_string(r)});
  }
  const std::size_t m = 1 + rng.below(spec.max_edges);
  for (std::size_t k = 0; k < m; ++k) {
    EntityId s{static_cast<std::uint32_t>(rng.below(n))};
    EntityId o{static_cast<std::uint32_t>(rng.below(n))};
    if (s == o && !spec.self_loops) continue;
    b.add_triple(s, RelationId{static_cast<std::uint32_t>(rng.below(nr))}, o);
  }
  return std::move(b).build();
}

}  // namespace kgbench::testing
