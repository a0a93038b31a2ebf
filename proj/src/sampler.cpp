#include "kgbench/sampler.hpp"

#include <algorithm>
#include <set>
#include <spdlog/spdlog.h>
#include <string>
#include <unordered_map>

#include "kgbench/error.hpp"

namespace kgbench {

void SamplingParams::validate() const {
  if (num_seed_entities < 1) throw ConfigError("sampling: seed_entities must be >= 1");
  if (radius < 1) throw ConfigError("sampling: radius must be >= 1");
  if (max_edges < 1) throw ConfigError("sampling: max_edges must be >= 1");
  if (min_degree < 1) throw ConfigError("sampling: min_degree must be >= 1");
  if (max_edges < num_seed_entities)
    throw ConfigError("sampling: max_edges must be >= seed_entities");
  if (max_attempts < 1) throw ConfigError("sampling: max_attempts must be >= 1");
}

std::optional<EntityId> Subgraph::local(EntityId source_id) const {
  auto it = std::lower_bound(source_entity.begin(), source_entity.end(), source_id);
  if (it == source_entity.end() || *it != source_id) return std::nullopt;
  return EntityId{static_cast<std::uint32_t>(it - source_entity.begin())};
}

std::vector<Triple> ego_graph(const KnowledgeGraph& k, EntityId e, int radius) {
  const std::vector<int> dist = bfs_distances(k, e, radius);
  std::vector<Triple> out;
  for (std::uint32_t s = 0; s < dist.size(); ++s) {
    if (dist[s] < 0) continue;
    for (const OutEdge& oe : k.out_edges(EntityId{s}))
      if (dist[oe.object.value] >= 0) out.push_back({EntityId{s}, oe.relation, oe.object});
  }
  // Subjects ascend and each out-list is sorted, so `out` is already sorted.
  return out;
}

std::vector<Triple> min_degree_filter(std::vector<Triple> triples, std::size_t min_degree,
                                      const std::vector<EntityId>& pinned) {
  if (min_degree <= 1 || triples.empty()) return triples;
  std::set<EntityId> pin(pinned.begin(), pinned.end());
  std::unordered_map<std::uint32_t, std::size_t> degree;
  for (const Triple& t : triples) {
    ++degree[t.subject.value];
    ++degree[t.object.value];
  }
  std::set<std::uint32_t> removed;
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [e, d] : degree) {
      if (d < min_degree && !removed.count(e) && !pin.count(EntityId{e})) {
        removed.insert(e);
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Triple> kept;
    for (const Triple& t : triples)
      if (!removed.count(t.subject.value) && !removed.count(t.object.value))
        kept.push_back(t);
    triples.swap(kept);
    degree.clear();
    for (const Triple& t : triples) {
      ++degree[t.subject.value];
      ++degree[t.object.value];
    }
  }
  return triples;
}

std::vector<Triple> prune_to_max_edges(std::vector<Triple> triples,
                                       const std::vector<Triple>& protected_,
                                       std::size_t max_edges, Rng& rng) {
  if (protected_.size() > max_edges)
    throw Error("prune: " + std::to_string(protected_.size()) +
                " protected triples exceed max_edges " + std::to_string(max_edges));
  if (triples.size() <= max_edges) return triples;
  std::set<Triple> keep(protected_.begin(), protected_.end());
  std::vector<Triple> candidates;
  for (const Triple& t : triples)
    if (!keep.count(t)) candidates.push_back(t);
  std::size_t protected_present = triples.size() - candidates.size();
  if (protected_present != keep.size())
    throw Error("prune: protected triple missing from input");
  for (std::size_t i : rng.sample_indices(candidates.size(), max_edges - keep.size()))
    keep.insert(candidates[i]);
  return {keep.begin(), keep.end()};
}

Subgraph induce_subgraph(const KnowledgeGraph& k, const std::vector<Triple>& triples,
                         const std::vector<EntityId>& seeds,
                         const std::vector<Triple>& protected_) {
  Subgraph sub;
  std::set<EntityId> ents;
  std::set<RelationId> rels;
  for (const Triple& t : triples) {
    ents.insert(t.subject);
    ents.insert(t.object);
    rels.insert(t.relation);
  }
  sub.source_entity.assign(ents.begin(), ents.end());
  sub.source_relation.assign(rels.begin(), rels.end());

  // Labels must be unique inside a context graph or questions and answers
  // become ambiguous; colliding labels get the source id appended.
  std::unordered_map<std::string, std::size_t> label_count;
  for (EntityId e : sub.source_entity) ++label_count[k.label(e)];

  KnowledgeGraph::Builder b;
  for (EntityId e : sub.source_entity) {
    KnowledgeGraph::EntityInfo info = k.entity(e);
    if (label_count[info.label] > 1) info.label += " [" + info.source_key + "]";
    b.add_entity(std::move(info));
  }
  std::unordered_map<std::string, std::size_t> relation_label_count;
  for (RelationId r : sub.source_relation) ++relation_label_count[k.label(r)];
  for (RelationId r : sub.source_relation) {
    KnowledgeGraph::RelationInfo info = k.relation(r);
    if (relation_label_count[info.label] > 1) info.label += " [" + info.source_key + "]";
    b.add_relation(std::move(info));
  }
  auto rel_local = [&](RelationId r) {
    auto it = std::lower_bound(sub.source_relation.begin(), sub.source_relation.end(), r);
    return RelationId{static_cast<std::uint32_t>(it - sub.source_relation.begin())};
  };
  auto map_triple = [&](const Triple& t) {
    return Triple{*sub.local(t.subject), rel_local(t.relation), *sub.local(t.object)};
  };
  for (const Triple& t : triples) b.add_triple(map_triple(t));
  sub.graph = std::move(b).build();

  for (EntityId s : seeds)
    if (auto l = sub.local(s)) sub.seed_entities.push_back(*l);
  for (const Triple& t : protected_) {
    if (!std::binary_search(triples.begin(), triples.end(), t))
      throw Error("induce: protected triple not in subgraph");
    sub.protected_triples.push_back(map_triple(t));
  }
  std::sort(sub.protected_triples.begin(), sub.protected_triples.end());
  return sub;
}

std::vector<EntityId> seed_pool(const KnowledgeGraph& k) {
  std::vector<EntityId> pool;
  for (std::uint32_t i = 0; i < k.entity_count(); ++i) {
    EntityId e{i};
    if (k.is_core(e) && k.degree(e, Direction::Total) > 0) pool.push_back(e);
  }
  return pool;
}

Subgraph sample_subgraph(const KnowledgeGraph& k, const SamplingParams& params, Rng& rng,
                         const SeedSpec& spec) {
  params.validate();
  for (EntityId e : spec.fixed) k.check(e);
  for (const Triple& t : spec.protected_)
    if (!k.contains(t)) throw Error("sample: protected triple not in source graph");

  std::vector<EntityId> pool;
  if (spec.fixed.size() < params.num_seed_entities) {
    std::set<EntityId> fixed(spec.fixed.begin(), spec.fixed.end());
    for (EntityId e : seed_pool(k))
      if (!fixed.count(e)) pool.push_back(e);
  }
  const std::size_t extra =
      std::min(pool.size(), params.num_seed_entities -
                                std::min(params.num_seed_entities, spec.fixed.size()));
  if (spec.fixed.empty() && extra == 0) throw GenerationError("sample: empty seed pool");

  // With no random component a retry cannot change the outcome.
  const std::size_t attempts = extra == 0 ? 1 : params.max_attempts;
  std::vector<EntityId> pinned;
  for (const Triple& t : spec.protected_) {
    pinned.push_back(t.subject);
    pinned.push_back(t.object);
  }

  for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
    std::vector<EntityId> seeds = spec.fixed;
    for (std::size_t i : rng.sample_indices(pool.size(), extra)) seeds.push_back(pool[i]);

    std::set<Triple> combined(spec.protected_.begin(), spec.protected_.end());
    for (EntityId s : seeds)
      for (const Triple& t : ego_graph(k, s, params.radius)) combined.insert(t);

    std::vector<Triple> filtered = min_degree_filter(
        std::vector<Triple>(combined.begin(), combined.end()), params.min_degree, pinned);
    if (filtered.empty()) {
      spdlog::debug("sample: attempt {} filtered to empty, resampling", attempt);
      continue;
    }
    std::vector<Triple> pruned =
        prune_to_max_edges(std::move(filtered), spec.protected_, params.max_edges, rng);
    return induce_subgraph(k, pruned, seeds, spec.protected_);
  }
  throw GenerationError("sample: min-degree filter emptied the graph after " +
                        std::to_string(attempts) + " attempts");
}

}  // namespace kgbench
