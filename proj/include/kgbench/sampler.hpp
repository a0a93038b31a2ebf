#pragma once

// Ego-graph subgraph sampling: union the radius-r ego-graphs of the seed
// entities, peel low-degree entities to a fixed point, then randomly prune
// unprotected edges down to the edge budget.

#include <cstdint>
#include <optional>
#include <vector>

#include "kgbench/graph.hpp"
#include "kgbench/rng.hpp"

namespace kgbench {

struct SamplingParams {
  std::size_t num_seed_entities = 10;
  int radius = 1;
  std::size_t max_edges = 200;
  std::size_t min_degree = 1;
  // Resampling budget when the filter leaves nothing behind.
  std::size_t max_attempts = 16;

  void validate() const;
};

// A sampled context graph. `graph` is re-indexed densely, preserving the
// source id order, so rendering order matches the source graph's.
struct Subgraph {
  KnowledgeGraph graph;
  std::vector<EntityId> seed_entities;   // subgraph ids, seeds that survived
  std::vector<Triple> protected_triples; // subgraph ids, sorted
  std::vector<EntityId> source_entity;   // subgraph id -> source id
  std::vector<RelationId> source_relation;

  std::optional<EntityId> local(EntityId source_id) const;
};

// Triples with both endpoints within undirected distance `radius` of e.
std::vector<Triple> ego_graph(const KnowledgeGraph& k, EntityId e, int radius);

// Repeatedly removes entities whose total degree in `triples` is below
// min_degree, with their incident triples, until nothing changes. Entities in
// `pinned` are never removed.
std::vector<Triple> min_degree_filter(std::vector<Triple> triples, std::size_t min_degree,
                                      const std::vector<EntityId>& pinned = {});

// Uniformly drops unprotected triples until max_edges remain. `protected_`
// must be a subset of `triples` no larger than max_edges.
std::vector<Triple> prune_to_max_edges(std::vector<Triple> triples,
                                       const std::vector<Triple>& protected_,
                                       std::size_t max_edges, Rng& rng);

// Builds the dense re-indexed graph for a triple subset of k.
Subgraph induce_subgraph(const KnowledgeGraph& k, const std::vector<Triple>& triples,
                         const std::vector<EntityId>& seeds,
                         const std::vector<Triple>& protected_);

struct SeedSpec {
  std::vector<EntityId> fixed;         // always seeds (source ids)
  std::vector<Triple> protected_;      // must survive into the result
};

// Entities eligible as random seeds: core entities with at least one edge.
std::vector<EntityId> seed_pool(const KnowledgeGraph& k);

// Full pipeline. Random seeds top `spec.fixed` up to num_seed_entities,
// drawn without replacement from seed_pool(k).
Subgraph sample_subgraph(const KnowledgeGraph& k, const SamplingParams& params, Rng& rng,
                         const SeedSpec& spec = {});

}  // namespace kgbench
