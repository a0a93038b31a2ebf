#pragma once

// Brute-force reference answers, written against the raw triple list only so
// they share no code with the library's generators.

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "kgbench/graph.hpp"

namespace kgbench::oracle {

inline bool joined(const KnowledgeGraph& g, EntityId u, EntityId v) {
  for (const Triple& t : g.triples())
    if ((t.subject == u && t.object == v) || (t.subject == v && t.object == u)) return true;
  return false;
}

inline void extend_paths(const KnowledgeGraph& g, EntityId at, EntityId b, Path& cur,
                         std::vector<bool>& used, std::vector<Path>& out) {
  if (at == b) {
    out.push_back(cur);
    return;
  }
  for (std::uint32_t v = 0; v < g.entity_count(); ++v) {
    EntityId n{v};
    if (used[v] || !joined(g, at, n)) continue;
    used[v] = true;
    cur.push_back(n);
    extend_paths(g, n, b, cur, used, out);
    cur.pop_back();
    used[v] = false;
  }
}

// Every minimum-length simple path, found by enumerating all simple paths.
inline std::vector<Path> shortest_paths(const KnowledgeGraph& g, EntityId a, EntityId b) {
  std::vector<Path> all;
  Path cur{a};
  std::vector<bool> used(g.entity_count(), false);
  used[a.value] = true;
  extend_paths(g, a, b, cur, used, all);
  if (all.empty()) return all;
  std::size_t best = all.front().size();
  for (const auto& p : all) best = std::min(best, p.size());
  std::vector<Path> shortest;
  for (auto& p : all)
    if (p.size() == best) shortest.push_back(p);
  std::sort(shortest.begin(), shortest.end());
  return shortest;
}

// |{e : (s,r,e) in T}| or |{e : (e,r,s) in T}|.
inline std::size_t agg_by_relation(const KnowledgeGraph& g, EntityId s, RelationId r,
                                   bool outgoing) {
  std::set<EntityId> hits;
  for (const Triple& t : g.triples()) {
    if (t.relation != r) continue;
    if (outgoing && t.subject == s) hits.insert(t.object);
    if (!outgoing && t.object == s) hits.insert(t.subject);
  }
  return hits.size();
}

// |{e1 : some triple joins s and e1, and some (e1, r, _) exists}|.
inline std::size_t agg_neighbor_property(const KnowledgeGraph& g, EntityId s, RelationId r) {
  std::size_t n = 0;
  for (std::uint32_t i = 0; i < g.entity_count(); ++i) {
    EntityId e1{i};
    bool linked = false, has_r = false;
    for (const Triple& t : g.triples()) {
      if ((t.subject == s && t.object == e1) || (t.subject == e1 && t.object == s)) linked = true;
      if (t.subject == e1 && t.relation == r) has_r = true;
    }
    n += linked && has_r;
  }
  return n;
}

// Degree table by direction: 0 incoming, 1 outgoing, 2 total.
inline std::vector<std::size_t> degree_table(const KnowledgeGraph& g, int dir) {
  std::vector<std::size_t> d(g.entity_count(), 0);
  for (const Triple& t : g.triples()) {
    if (dir != 0) ++d[t.subject.value];
    if (dir != 1) ++d[t.object.value];
  }
  return d;
}

// Distinct non-zero AggByRelation answers over every (s, r, dir).
inline std::set<std::size_t> agg_by_relation_answers(const KnowledgeGraph& g) {
  std::set<std::size_t> out;
  for (std::uint32_t s = 0; s < g.entity_count(); ++s)
    for (std::uint32_t r = 0; r < g.relation_count(); ++r)
      for (bool o : {false, true})
        if (auto n = agg_by_relation(g, EntityId{s}, RelationId{r}, o)) out.insert(n);
  return out;
}

inline std::set<std::size_t> agg_neighbor_property_answers(const KnowledgeGraph& g) {
  std::set<std::size_t> out;
  for (std::uint32_t s = 0; s < g.entity_count(); ++s)
    for (std::uint32_t r = 0; r < g.relation_count(); ++r)
      if (auto n = agg_neighbor_property(g, EntityId{s}, RelationId{r})) out.insert(n);
  return out;
}

}  // namespace kgbench::oracle
