#include "kgbench/textualize.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include <nlohmann/json.hpp>

#include "kgbench/error.hpp"
#include "kgbench/util.hpp"

namespace kgbench {

std::string_view to_string(Format f) {
  switch (f) {
    case Format::ListOfEdges:
      return "ListOfEdges";
    case Format::StructuredJSON:
      return "StructuredJSON";
    case Format::StructuredYAML:
      return "StructuredYAML";
    case Format::RDFTurtle:
      return "RDFTurtle";
    case Format::JSONLD:
      return "JSONLD";
  }
  return "?";
}

std::string_view display_name(Format f) {
  switch (f) {
    case Format::ListOfEdges:
      return "List of Edges";
    case Format::StructuredJSON:
      return "Structured JSON";
    case Format::StructuredYAML:
      return "Structured YAML";
    case Format::RDFTurtle:
      return "RDF Turtle";
    case Format::JSONLD:
      return "JSON-LD";
  }
  return "?";
}

Format format_from_string(std::string_view s) {
  std::string key;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c))) key.push_back(c);
  key = to_lower_ascii(key);
  if (key == "listofedges" || key == "loe" || key == "edges") return Format::ListOfEdges;
  if (key == "structuredjson" || key == "json") return Format::StructuredJSON;
  if (key == "structuredyaml" || key == "yaml") return Format::StructuredYAML;
  if (key == "rdfturtle" || key == "turtle" || key == "ttl") return Format::RDFTurtle;
  if (key == "jsonld") return Format::JSONLD;
  throw Error("unknown format '" + std::string(s) + "'");
}

std::vector<SubjectGroup> group_edges(const KnowledgeGraph& g) {
  std::vector<SubjectGroup> groups;
  for (std::uint32_t s = 0; s < g.entity_count(); ++s) {
    auto edges = g.out_edges(EntityId{s});
    if (edges.empty()) continue;
    SubjectGroup group{EntityId{s}, {}};
    // out_edges is sorted by (relation id, object id).
    for (const OutEdge& e : edges) {
      if (group.relations.empty() || group.relations.back().relation != e.relation)
        group.relations.push_back({e.relation, {}});
      group.relations.back().objects.push_back(e.object);
    }
    std::stable_sort(group.relations.begin(), group.relations.end(),
                     [&](const RelationGroup& a, const RelationGroup& b) {
                       return g.label(a.relation) < g.label(b.relation);
                     });
    groups.push_back(std::move(group));
  }
  return groups;
}

namespace {

std::string pascal_case(std::string_view category) {
  std::string out;
  bool upper = true;
  for (char c : category) {
    if (!std::isalnum(static_cast<unsigned char>(c))) {
      upper = true;
      continue;
    }
    if (upper && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    out.push_back(c);
    upper = false;
  }
  return out.empty() ? "Entity" : out;
}

std::size_t digits(std::size_t n) {
  std::size_t d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

// ---- List of Edges --------------------------------------------------------

bool loe_needs_quotes(std::string_view s) {
  if (s.empty() || s.front() == ' ' || s.back() == ' ' || s.front() == '"') return true;
  for (char c : s)
    if (c == ',' || c == '(' || c == ')' || c == '"' || c == '\\' ||
        static_cast<unsigned char>(c) < 0x20)
      return true;
  return false;
}

std::string c_escape(std::string_view s, bool unicode_escapes = false) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          static const char* hex = "0123456789ABCDEF";
          out += unicode_escapes ? "\\u00" : "\\x";
          out.push_back(hex[(c >> 4) & 0xf]);
          out.push_back(hex[c & 0xf]);
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

std::string loe_label(std::string_view s) {
  return loe_needs_quotes(s) ? "\"" + c_escape(s) + "\"" : std::string(s);
}

std::string render_list_of_edges(const KnowledgeGraph& g) {
  std::string out = "Edges: [\n";
  bool first = true;
  for (const SubjectGroup& sg : group_edges(g)) {
    for (const RelationGroup& rg : sg.relations) {
      for (EntityId o : rg.objects) {
        if (!first) out += ",\n";
        first = false;
        out += "(" + loe_label(g.label(sg.subject)) + ", " + loe_label(g.label(rg.relation)) +
               ", " + loe_label(g.label(o)) + ")";
      }
    }
  }
  out += "\n]";
  return out;
}

// ---- Structured JSON ------------------------------------------------------

std::string render_structured_json(const KnowledgeGraph& g) {
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  for (const SubjectGroup& sg : group_edges(g)) {
    nlohmann::ordered_json rels = nlohmann::ordered_json::object();
    for (const RelationGroup& rg : sg.relations) {
      nlohmann::ordered_json objs = nlohmann::ordered_json::array();
      for (EntityId o : rg.objects) objs.push_back(g.label(o));
      rels[g.label(rg.relation)] = std::move(objs);
    }
    root[g.label(sg.subject)] = std::move(rels);
  }
  return root.dump(4);
}

// ---- Structured YAML ------------------------------------------------------

bool yaml_looks_special(std::string_view s) {
  static const char* reserved[] = {"true", "false", "yes", "no", "on", "off",
                                   "null", "~",     "y",   "n"};
  std::string lower = to_lower_ascii(s);
  for (const char* r : reserved)
    if (lower == r) return true;
  double d;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ec == std::errc() && ptr == s.data() + s.size()) return true;
  return false;
}

bool yaml_needs_quotes(std::string_view s) {
  if (s.empty() || s.front() == ' ' || s.back() == ' ') return true;
  if (std::string_view("-?:,[]{}#&*!|>'\"%@`").find(s.front()) != std::string_view::npos)
    return true;
  if (s.back() == ':') return true;
  if (s.find(": ") != std::string_view::npos || s.find(" #") != std::string_view::npos)
    return true;
  for (char c : s)
    if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) return true;
  return yaml_looks_special(s);
}

std::string yaml_scalar(std::string_view s) {
  return yaml_needs_quotes(s) ? "\"" + c_escape(s) + "\"" : std::string(s);
}

std::string render_structured_yaml(const KnowledgeGraph& g) {
  std::string out;
  bool first = true;
  for (const SubjectGroup& sg : group_edges(g)) {
    if (!first) out += "\n\n";
    first = false;
    out += yaml_scalar(g.label(sg.subject)) + ":";
    for (const RelationGroup& rg : sg.relations) {
      out += "\n  " + yaml_scalar(g.label(rg.relation)) + ":";
      for (EntityId o : rg.objects) out += "\n    - " + yaml_scalar(g.label(o));
    }
  }
  return out;
}

// ---- RDF Turtle -----------------------------------------------------------

std::string turtle_string(std::string_view s) { return "\"" + c_escape(s, true) + "\""; }

std::string render_turtle(const KnowledgeGraph& g) {
  IriScheme iris = assign_iris(g);
  auto groups = group_edges(g);
  std::map<EntityId, const SubjectGroup*> by_subject;
  for (const SubjectGroup& sg : groups) by_subject[sg.subject] = &sg;

  std::vector<std::string> blocks;
  blocks.push_back(
      "@prefix ex: <http://example.org/countries#> .\n"
      "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n"
      "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .");
  for (RelationId r : iris.relations)
    blocks.push_back(iris.relation_iri[r.value] + " a rdf:Property ;\n    rdfs:label " +
                     turtle_string(g.label(r)) + " .");
  for (EntityId e : iris.node_order) {
    std::string b = iris.entity_iri[e.value] + " a " + iris.entity_type[e.value] +
                    " ;\n    rdfs:label " + turtle_string(g.label(e));
    auto it = by_subject.find(e);
    if (it != by_subject.end()) {
      for (const RelationGroup& rg : it->second->relations) {
        b += " ;\n    " + iris.relation_iri[rg.relation.value] + " ";
        for (std::size_t i = 0; i < rg.objects.size(); ++i) {
          if (i) b += ", ";
          b += iris.entity_iri[rg.objects[i].value];
        }
      }
    }
    b += " .";
    blocks.push_back(std::move(b));
  }
  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += "\n\n";
    out += blocks[i];
  }
  return out;
}

// ---- JSON-LD --------------------------------------------------------------

std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

std::string render_jsonld(const KnowledgeGraph& g) {
  IriScheme iris = assign_iris(g);
  auto groups = group_edges(g);
  std::map<EntityId, const SubjectGroup*> by_subject;
  for (const SubjectGroup& sg : groups) by_subject[sg.subject] = &sg;

  // The "@context" object is nested one level deeper than JSON-LD expects;
  // that is the layout the reference prompts use.
  std::string out =
      "{\n"
      "  \"@context\": {\n"
      "    \"@context\": {\n"
      "      \"ex\": \"http://example.org/countries#\",\n"
      "      \"label\": \"rdfs:label\",\n"
      "      \"rdf\": \"http://www.w3.org/1999/02/22-rdf-syntax-ns#\",\n"
      "      \"rdfs\": \"http://www.w3.org/2000/01/rdf-schema#\",\n"
      "      \"type\": \"@type\"\n"
      "    }\n"
      "  },\n"
      "  \"@graph\": [";
  std::vector<std::string> nodes;
  for (RelationId r : iris.relations)
    nodes.push_back("    {\n      \"@id\": " + json_string(iris.relation_iri[r.value]) +
                    ",\n      \"label\": " + json_string(g.label(r)) +
                    ",\n      \"type\": \"rdf:Property\"\n    }");
  for (EntityId e : iris.node_order) {
    std::string n = "    {\n      \"@id\": " + json_string(iris.entity_iri[e.value]) +
                    ",\n      \"type\": " + json_string(iris.entity_type[e.value]) +
                    ",\n      \"label\": " + json_string(g.label(e));
    auto it = by_subject.find(e);
    if (it != by_subject.end()) {
      for (const RelationGroup& rg : it->second->relations) {
        n += ",\n      " + json_string(iris.relation_iri[rg.relation.value]) + ": ";
        if (rg.objects.size() == 1) {
          n += "{ \"@id\": " + json_string(iris.entity_iri[rg.objects[0].value]) + " }";
          continue;
        }
        n += "[";
        for (std::size_t i = 0; i < rg.objects.size(); ++i) {
          n += i ? ",\n" : "\n";
          n += "        { \"@id\": " + json_string(iris.entity_iri[rg.objects[i].value]) + " }";
        }
        n += "\n      ]";
      }
    }
    n += "\n    }";
    nodes.push_back(std::move(n));
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out += i ? ",\n" : "\n";
    out += nodes[i];
  }
  out += "\n  ]\n}";
  return out;
}

}  // namespace

IriScheme assign_iris(const KnowledgeGraph& g) {
  IriScheme s;
  s.entity_iri.assign(g.entity_count(), "");
  s.entity_type.assign(g.entity_count(), "ex:Entity");
  s.relation_iri.assign(g.relation_count(), "");
  const bool typed = g.has_categories();
  for (std::uint32_t i = 0; i < g.entity_count(); ++i) {
    const auto& cat = g.entity(EntityId{i}).category;
    if (typed && !cat.empty()) s.entity_type[i] = "ex:" + pascal_case(cat);
  }

  std::vector<bool> used(g.relation_count(), false);
  for (const Triple& t : g.triples()) used[t.relation.value] = true;
  for (std::uint32_t r = 0; r < g.relation_count(); ++r) {
    if (!used[r]) continue;
    s.relations.push_back(RelationId{r});
    s.relation_iri[r] = "ex:R" + std::to_string(s.relations.size());
  }

  auto groups = group_edges(g);
  std::vector<bool> is_subject(g.entity_count(), false);
  for (const SubjectGroup& sg : groups) is_subject[sg.subject.value] = true;

  // First pass: children per subject, in first-reference order.
  std::vector<std::vector<EntityId>> children(groups.size());
  std::vector<bool> claimed(g.entity_count(), false);
  std::size_t max_children = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (const RelationGroup& rg : groups[i].relations)
      for (EntityId o : rg.objects)
        if (!is_subject[o.value] && !claimed[o.value]) {
          claimed[o.value] = true;
          children[i].push_back(o);
        }
    max_children = std::max(max_children, children[i].size());
  }
  const std::size_t width = std::max<std::size_t>(2, digits(max_children));

  for (std::size_t i = 0; i < groups.size(); ++i) {
    const std::string anchor = std::to_string(i + 1);
    s.entity_iri[groups[i].subject.value] = "ex:" + anchor;
    s.node_order.push_back(groups[i].subject);
    for (std::size_t j = 0; j < children[i].size(); ++j) {
      std::string n = std::to_string(j + 1);
      n.insert(0, width - n.size(), '0');
      s.entity_iri[children[i][j].value] = "ex:" + anchor + n;
      s.node_order.push_back(children[i][j]);
    }
  }
  return s;
}

namespace {

// Every format keys on labels, so two entities (or two relations) sharing a
// label cannot be told apart in the output.
void require_unique_labels(const KnowledgeGraph& g) {
  std::map<std::string_view, std::uint32_t> seen;
  for (std::uint32_t i = 0; i < g.entity_count(); ++i) {
    auto [it, fresh] = seen.emplace(g.label(EntityId{i}), i);
    if (!fresh)
      throw Error("render: entities " + std::to_string(it->second) + " and " +
                  std::to_string(i) + " share the label '" + g.label(EntityId{i}) + "'");
  }
  seen.clear();
  for (std::uint32_t i = 0; i < g.relation_count(); ++i) {
    auto [it, fresh] = seen.emplace(g.label(RelationId{i}), i);
    if (!fresh)
      throw Error("render: relations " + std::to_string(it->second) + " and " +
                  std::to_string(i) + " share the label '" + g.label(RelationId{i}) + "'");
  }
}

}  // namespace

std::string render_body(const KnowledgeGraph& g, Format f) {
  if (g.triple_count() == 0) throw Error("render: graph has no edges");
  require_unique_labels(g);
  switch (f) {
    case Format::ListOfEdges:
      return render_list_of_edges(g);
    case Format::StructuredJSON:
      return render_structured_json(g);
    case Format::StructuredYAML:
      return render_structured_yaml(g);
    case Format::RDFTurtle:
      return render_turtle(g);
    case Format::JSONLD:
      return render_jsonld(g);
  }
  throw Error("render: unknown format");
}

std::string preamble(Format f, const Templates& t) {
  return t.get("preamble." + std::string(to_string(f)));
}

std::string render_context(const KnowledgeGraph& g, Format f, const Templates& t) {
  std::string key = "context." + std::string(to_string(f));
  return t.fill(key, {{"preamble", preamble(f, t)}, {"graph", render_body(g, f)}});
}

TextualizedPrompt render(const KnowledgeGraph& g, Format f, std::string_view question_block,
                         const Templates& t) {
  TextualizedPrompt p;
  p.format = f;
  p.preamble = preamble(f, t);
  p.body = render_body(g, f);
  p.context = t.fill("context." + std::string(to_string(f)),
                     {{"preamble", p.preamble}, {"graph", p.body}});
  p.full_prompt = question_block.empty()
                      ? p.context
                      : t.fill("prompt", {{"context", p.context},
                                          {"question_block", std::string(question_block)}});
  p.approx_tokens = approx_token_count(p.full_prompt);
  return p;
}

}  // namespace kgbench
