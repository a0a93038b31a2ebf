#include "kgbench/graph.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

namespace kgbench {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Incoming:
      return "incoming";
    case Direction::Outgoing:
      return "outgoing";
    case Direction::Total:
      return "total";
  }
  return "?";
}

Direction direction_from_string(std::string_view s) {
  if (s == "incoming") return Direction::Incoming;
  if (s == "outgoing") return Direction::Outgoing;
  if (s == "total") return Direction::Total;
  throw Error("unknown direction '" + std::string(s) + "'");
}

EntityId KnowledgeGraph::Builder::add_entity(EntityInfo info) {
  EntityId id{static_cast<std::uint32_t>(entities_.size())};
  entities_.push_back(std::move(info));
  return id;
}

RelationId KnowledgeGraph::Builder::add_relation(RelationInfo info) {
  RelationId id{static_cast<std::uint32_t>(relations_.size())};
  relations_.push_back(std::move(info));
  return id;
}

void KnowledgeGraph::Builder::add_triple(Triple t) {
  if (t.subject.value >= entities_.size() || t.object.value >= entities_.size())
    throw Error("triple references unknown entity id");
  if (t.relation.value >= relations_.size())
    throw Error("triple references unknown relation id");
  triples_.push_back(t);
}

KnowledgeGraph KnowledgeGraph::Builder::build() && {
  KnowledgeGraph g;
  std::sort(triples_.begin(), triples_.end());
  auto last = std::unique(triples_.begin(), triples_.end());
  duplicates_ = static_cast<std::size_t>(triples_.end() - last);
  triples_.erase(last, triples_.end());
  g.entities_ = std::move(entities_);
  g.relations_ = std::move(relations_);
  g.triples_ = std::move(triples_);
  g.duplicates_ = duplicates_;
  g.index();
  return g;
}

void KnowledgeGraph::index() {
  const std::size_t n = entities_.size();
  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const Triple& t : triples_) {
    ++out_offsets_[t.subject.value + 1];
    ++in_offsets_[t.object.value + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    in_offsets_[i + 1] += in_offsets_[i];
  }
  out_.resize(triples_.size());
  in_.resize(triples_.size());
  std::vector<std::uint32_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
  std::vector<std::uint32_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  // Triples are sorted, so both indices come out ordered by (relation, other).
  for (const Triple& t : triples_) {
    out_[out_fill[t.subject.value]++] = {t.relation, t.object};
  }
  std::vector<Triple> by_object(triples_);
  std::sort(by_object.begin(), by_object.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.object, a.relation, a.subject) <
           std::tie(b.object, b.relation, b.subject);
  });
  for (const Triple& t : by_object) {
    in_[in_fill[t.object.value]++] = {t.relation, t.subject};
  }

  entity_by_label_.clear();
  relation_by_label_.clear();
  for (std::uint32_t i = 0; i < entities_.size(); ++i)
    entity_by_label_.try_emplace(entities_[i].label, EntityId{i});
  for (std::uint32_t i = 0; i < relations_.size(); ++i)
    relation_by_label_.try_emplace(relations_[i].label, RelationId{i});
}

void KnowledgeGraph::check(EntityId e) const {
  if (e.value >= entities_.size())
    throw Error("unknown entity id " + std::to_string(e.value));
}

void KnowledgeGraph::check(RelationId r) const {
  if (r.value >= relations_.size())
    throw Error("unknown relation id " + std::to_string(r.value));
}

const KnowledgeGraph::EntityInfo& KnowledgeGraph::entity(EntityId e) const {
  check(e);
  return entities_[e.value];
}

const KnowledgeGraph::RelationInfo& KnowledgeGraph::relation(RelationId r) const {
  check(r);
  return relations_[r.value];
}

bool KnowledgeGraph::has_categories() const {
  return std::any_of(entities_.begin(), entities_.end(),
                     [](const EntityInfo& e) { return !e.category.empty(); });
}

std::span<const OutEdge> KnowledgeGraph::out_edges(EntityId e) const {
  check(e);
  return std::span<const OutEdge>(out_).subspan(
      out_offsets_[e.value], out_offsets_[e.value + 1] - out_offsets_[e.value]);
}

std::span<const InEdge> KnowledgeGraph::in_edges(EntityId e) const {
  check(e);
  return std::span<const InEdge>(in_).subspan(
      in_offsets_[e.value], in_offsets_[e.value + 1] - in_offsets_[e.value]);
}

bool KnowledgeGraph::contains(const Triple& t) const {
  check(t.subject);
  check(t.relation);
  check(t.object);
  return std::binary_search(triples_.begin(), triples_.end(), t);
}

std::size_t KnowledgeGraph::degree(EntityId e, Direction d) const {
  switch (d) {
    case Direction::Incoming:
      return in_edges(e).size();
    case Direction::Outgoing:
      return out_edges(e).size();
    case Direction::Total:
      return in_edges(e).size() + out_edges(e).size();
  }
  return 0;
}

std::vector<EntityId> KnowledgeGraph::neighbors(EntityId e) const {
  std::vector<EntityId> out;
  for (const OutEdge& oe : out_edges(e)) out.push_back(oe.object);
  for (const InEdge& ie : in_edges(e)) out.push_back(ie.subject);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view label) const {
  auto it = entity_by_label_.find(std::string(label));
  if (it == entity_by_label_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view label) const {
  auto it = relation_by_label_.find(std::string(label));
  if (it == relation_by_label_.end()) return std::nullopt;
  return it->second;
}

KnowledgeGraph KnowledgeGraph::with_entity_labels(std::vector<std::string> labels) const {
  if (labels.size() != entities_.size())
    throw Error("relabel: expected " + std::to_string(entities_.size()) +
                " labels, got " + std::to_string(labels.size()));
  KnowledgeGraph g(*this);
  for (std::size_t i = 0; i < labels.size(); ++i)
    g.entities_[i].label = std::move(labels[i]);
  g.entity_by_label_.clear();
  for (std::uint32_t i = 0; i < g.entities_.size(); ++i)
    g.entity_by_label_.try_emplace(g.entities_[i].label, EntityId{i});
  return g;
}

// ---------------------------------------------------------------------------

std::vector<int> bfs_distances(const KnowledgeGraph& g, EntityId a, int max_hops) {
  g.check(a);
  std::vector<int> dist(g.entity_count(), -1);
  std::deque<EntityId> queue{a};
  dist[a.value] = 0;
  auto visit = [&](EntityId from, EntityId to) {
    if (dist[to.value] < 0) {
      dist[to.value] = dist[from.value] + 1;
      queue.push_back(to);
    }
  };
  while (!queue.empty()) {
    EntityId u = queue.front();
    queue.pop_front();
    if (dist[u.value] >= max_hops) continue;
    for (const OutEdge& e : g.out_edges(u)) visit(u, e.object);
    for (const InEdge& e : g.in_edges(u)) visit(u, e.subject);
  }
  return dist;
}

std::optional<std::size_t> bfs_distance(const KnowledgeGraph& g, EntityId a,
                                        EntityId b) {
  g.check(b);
  if (a == b) {
    g.check(a);
    return 0;
  }
  auto dist = bfs_distances(g, a);
  if (dist[b.value] < 0) return std::nullopt;
  return static_cast<std::size_t>(dist[b.value]);
}

bool adjacent(const KnowledgeGraph& g, EntityId u, EntityId v) {
  for (const OutEdge& e : g.out_edges(u))
    if (e.object == v) return true;
  for (const InEdge& e : g.in_edges(u))
    if (e.subject == v) return true;
  return false;
}

ShortestPaths all_shortest_paths(const KnowledgeGraph& g, EntityId a, EntityId b,
                                 std::size_t cap) {
  g.check(a);
  g.check(b);
  if (a == b) throw Error("all_shortest_paths: source equals destination");
  ShortestPaths result;
  // Distances to b let the forward walk from a only take steps that stay on
  // some shortest path; walking neighbors in ascending id order then yields
  // paths in lexicographic order.
  const std::vector<int> to_b = bfs_distances(g, b);
  if (to_b[a.value] < 0 || cap == 0) {
    result.truncated = to_b[a.value] >= 0;
    return result;
  }

  Path current{a};
  struct Frame {
    std::vector<EntityId> next;
    std::size_t pos = 0;
  };
  auto successors = [&](EntityId u) {
    std::vector<EntityId> next;
    for (EntityId v : g.neighbors(u))
      if (to_b[v.value] == to_b[u.value] - 1) next.push_back(v);
    return next;
  };
  std::vector<Frame> stack;
  stack.push_back({successors(a), 0});
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.pos == top.next.size()) {
      stack.pop_back();
      current.pop_back();
      continue;
    }
    EntityId v = top.next[top.pos++];
    current.push_back(v);
    if (v == b) {
      if (result.paths.size() == cap) {
        result.truncated = true;
        return result;
      }
      result.paths.push_back(current);
      current.pop_back();
      continue;
    }
    stack.push_back({successors(v), 0});
  }
  return result;
}

}  // namespace kgbench
