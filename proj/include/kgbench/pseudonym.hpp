#pragma once

#include <map>
#include <string>
#include <vector>

#include "kgbench/graph.hpp"
#include "kgbench/rng.hpp"
#include "kgbench/sampler.hpp"

namespace kgbench {

// Synthetic entity labels, loaded once from a one-column CSV.
class PseudonymPool {
 public:
  explicit PseudonymPool(std::vector<std::string> labels);

  // CSV with a `label` header and one label per row. Fields may be quoted.
  static PseudonymPool load_csv(const std::string& path);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }

 private:
  std::vector<std::string> labels_;
};

enum class PseudonymScope { CoreOnly, AllEntities };

std::string_view to_string(PseudonymScope s);
PseudonymScope pseudonym_scope_from_string(std::string_view s);

// Injective entity -> pseudonym assignment over a subset of one graph.
struct PseudonymMapping {
  std::map<EntityId, std::string> pairs;

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
};

// Draws pseudonyms without replacement. Entities whose label mentions a
// scoped label as a whole word are mapped too, so no original label survives
// in the relabeled graph. Pool labels that equal a graph label, or mention a
// mapped one, are skipped. Throws GenerationError when the pool is too
// small.
PseudonymMapping build_mapping(const KnowledgeGraph& g, const PseudonymPool& pool, Rng& rng,
                               PseudonymScope scope = PseudonymScope::CoreOnly);

KnowledgeGraph apply_mapping(const KnowledgeGraph& g, const PseudonymMapping& mapping);
Subgraph apply_mapping(const Subgraph& g, const PseudonymMapping& mapping);

}  // namespace kgbench
