#pragma once

// Graph textualization: the five prompt formats, their companion parsers,
// and an approximate token counter.
//
// Canonical order shared by every format: subjects by ascending entity id,
// relations by label (byte order) within a subject, objects by ascending
// entity id within a relation. Entity ids follow source order, so this
// reproduces the edge order of the source data.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "kgbench/graph.hpp"
#include "kgbench/templates.hpp"

namespace kgbench {

enum class Format { ListOfEdges, StructuredJSON, StructuredYAML, RDFTurtle, JSONLD };

inline constexpr std::array<Format, 5> kAllFormats = {
    Format::ListOfEdges, Format::StructuredJSON, Format::StructuredYAML, Format::RDFTurtle,
    Format::JSONLD};

std::string_view to_string(Format f);     // "ListOfEdges", ...
std::string_view display_name(Format f);  // "List of Edges", ...
// Accepts the identifier, the display name, or a lowercase alias.
Format format_from_string(std::string_view s);

struct RelationGroup {
  RelationId relation;
  std::vector<EntityId> objects;
};

struct SubjectGroup {
  EntityId subject;
  std::vector<RelationGroup> relations;
};

std::vector<SubjectGroup> group_edges(const KnowledgeGraph& g);

// IRIs for the RDF formats. Subjects are numbered ex:1, ex:2, ... in canonical
// order. An entity that never appears as a subject is numbered under the
// first subject that references it: ex:<subject number><child number>, the
// child number zero-padded to a graph-wide width of at least two digits
// (ex:101, ex:102, ...). Relations used by g get ex:R1, ex:R2, ... by
// ascending relation id.
struct IriScheme {
  std::vector<std::string> entity_iri;    // by entity id
  std::vector<std::string> entity_type;   // by entity id, "ex:Country" or "ex:Entity"
  std::vector<std::string> relation_iri;  // by relation id, empty when unused
  std::vector<RelationId> relations;      // used relations in declaration order
  // Node blocks in output order: each subject followed by the children
  // numbered under it.
  std::vector<EntityId> node_order;
};

IriScheme assign_iris(const KnowledgeGraph& g);

std::string render_body(const KnowledgeGraph& g, Format f);

struct TextualizedPrompt {
  Format format;
  std::string preamble;
  std::string body;
  std::string context;      // preamble + graph header + body
  std::string full_prompt;  // context + question block
  std::size_t approx_tokens = 0;
};

std::string preamble(Format f, const Templates& t = Templates::defaults());

// Preamble, "Knowledge Graph:" header, and body, laid out per template.
std::string render_context(const KnowledgeGraph& g, Format f,
                           const Templates& t = Templates::defaults());

// `question_block` is appended after the context; pass an empty string for a
// context-only prompt.
TextualizedPrompt render(const KnowledgeGraph& g, Format f, std::string_view question_block,
                         const Templates& t = Templates::defaults());

// ---------------------------------------------------------------------------
// Companion parsers. Each accepts exactly what render_body emits and returns
// the (subject, relation, object) label triples in document order.

using LabelTriple = std::array<std::string, 3>;

std::vector<LabelTriple> parse_body(std::string_view body, Format f);

// ---------------------------------------------------------------------------
// Approximate subword token count.
//
// Text is split the way byte-level BPE pre-tokenizers do (letter runs with an
// optional leading space, digit runs, punctuation runs, whitespace runs) and
// each piece is charged:
//   letter run of n bytes       1 + (n - 1) / 8
//   digit run of n              ceil(n / 3)
//   punctuation run of n        ceil(n / 2)
//   newline or multi-space run  1   (a single space joins the next piece)
//   non-ASCII code point        1
// The count is deterministic and never decreases when text is appended.
std::size_t approx_token_count(std::string_view text);

}  // namespace kgbench
