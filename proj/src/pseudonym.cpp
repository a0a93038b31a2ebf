#include "kgbench/pseudonym.hpp"

#include <set>
#include <unordered_set>

#include "kgbench/error.hpp"
#include "kgbench/util.hpp"

namespace kgbench {
namespace {

// Minimal RFC 4180 field reader for a single-column file.
std::string parse_csv_field(std::string_view line, const std::string& file, std::size_t no) {
  std::string_view t = trim(line);
  if (t.empty() || t.front() != '"') {
    if (t.find('"') != std::string_view::npos)
      throw ParseError(file, no, "stray quote in unquoted field");
    return std::string(t);
  }
  std::string out;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] == '"') {
      if (i + 1 < t.size() && t[i + 1] == '"') {
        out.push_back('"');
        ++i;
      } else {
        if (i + 1 != t.size()) throw ParseError(file, no, "text after closing quote");
        return out;
      }
    } else {
      out.push_back(t[i]);
    }
  }
  throw ParseError(file, no, "unterminated quoted field");
}

}  // namespace

PseudonymPool::PseudonymPool(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw Error("pseudonym pool is empty");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) {
    if (trim(l).empty()) throw Error("pseudonym pool contains an empty label");
    if (!seen.insert(l).second) throw Error("duplicate pseudonym '" + l + "'");
  }
}

PseudonymPool PseudonymPool::load_csv(const std::string& path) {
  std::string text = read_file(path);
  auto lines = split_lines(text);
  std::vector<std::string> labels;
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    std::string field = parse_csv_field(lines[i], path, i + 1);
    if (!header_seen) {
      if (field != "label") throw ParseError(path, i + 1, "expected header 'label'");
      header_seen = true;
      continue;
    }
    labels.push_back(std::move(field));
  }
  try {
    return PseudonymPool(std::move(labels));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string_view to_string(PseudonymScope s) {
  return s == PseudonymScope::CoreOnly ? "core_only" : "all_entities";
}

PseudonymScope pseudonym_scope_from_string(std::string_view s) {
  if (s == "core_only") return PseudonymScope::CoreOnly;
  if (s == "all_entities") return PseudonymScope::AllEntities;
  throw ConfigError("unknown pseudonym scope '" + std::string(s) + "'");
}

PseudonymMapping build_mapping(const KnowledgeGraph& g, const PseudonymPool& pool, Rng& rng,
                               PseudonymScope scope) {
  const std::size_t n = g.entity_count();
  std::vector<bool> in_scope(n, false);
  std::unordered_set<std::string> existing;
  for (std::uint32_t i = 0; i < n; ++i) {
    EntityId e{i};
    existing.insert(g.label(e));
    in_scope[i] = scope == PseudonymScope::AllEntities || g.is_core(e);
  }
  // An unmapped label that mentions a mapped one ("Embassy of X") would leak
  // X, so such entities join the scope, repeated until nothing changes.
  for (bool grew = true; grew;) {
    grew = false;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (in_scope[i]) continue;
      for (std::uint32_t j = 0; j < n && !in_scope[i]; ++j)
        if (in_scope[j] && contains_word(g.label(EntityId{i}), g.label(EntityId{j})))
          in_scope[i] = grew = true;
    }
  }
  std::vector<EntityId> scoped;
  for (std::uint32_t i = 0; i < n; ++i)
    if (in_scope[i]) scoped.push_back(EntityId{i});
  PseudonymMapping mapping;
  if (scoped.empty()) return mapping;

  // Pool labels that equal or mention a graph label are unusable.
  std::vector<const std::string*> usable;
  for (const auto& l : pool.labels()) {
    bool ok = !existing.count(l);
    for (std::size_t k = 0; ok && k < scoped.size(); ++k)
      ok = !contains_word(l, g.label(scoped[k]));
    if (ok) usable.push_back(&l);
  }
  if (usable.size() < scoped.size())
    throw GenerationError("pseudonym pool exhausted: need " + std::to_string(scoped.size()) +
                          ", have " + std::to_string(usable.size()));
  auto picks = rng.sample_indices(usable.size(), scoped.size());
  for (std::size_t i = 0; i < scoped.size(); ++i)
    mapping.pairs.emplace(scoped[i], *usable[picks[i]]);
  return mapping;
}

KnowledgeGraph apply_mapping(const KnowledgeGraph& g, const PseudonymMapping& mapping) {
  std::vector<std::string> labels;
  labels.reserve(g.entity_count());
  for (std::uint32_t i = 0; i < g.entity_count(); ++i) labels.push_back(g.label(EntityId{i}));
  std::set<std::string> used;
  for (const auto& [e, label] : mapping.pairs) {
    if (e.value >= g.entity_count())
      throw Error("mapping references entity " + std::to_string(e.value) +
                  " absent from the graph");
    if (!used.insert(label).second) throw Error("mapping is not injective: '" + label + "'");
    labels[e.value] = label;
  }
  return g.with_entity_labels(std::move(labels));
}

Subgraph apply_mapping(const Subgraph& g, const PseudonymMapping& mapping) {
  Subgraph out = g;
  out.graph = apply_mapping(g.graph, mapping);
  return out;
}

}  // namespace kgbench
