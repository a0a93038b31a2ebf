// Companion parsers for the five prompt formats. Each one accepts exactly the
// subset of its syntax that render_body produces.

#include <map>
#include <optional>

#include <nlohmann/json.hpp>

#include "kgbench/error.hpp"
#include "kgbench/textualize.hpp"
#include "kgbench/util.hpp"

namespace kgbench {
namespace {

[[noreturn]] void fail(Format f, std::size_t line, const std::string& what) {
  throw ParseError(std::string(to_string(f)), line, what);
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Reads a double-quoted string starting at s[pos] == '"'. Understands
// \" \\ \n \r \t \xHH and \u00HH. Advances pos past the closing quote.
std::optional<std::string> read_quoted(std::string_view s, std::size_t& pos) {
  if (pos >= s.size() || s[pos] != '"') return std::nullopt;
  std::string out;
  for (std::size_t i = pos + 1; i < s.size(); ++i) {
    char c = s[i];
    if (c == '"') {
      pos = i + 1;
      return out;
    }
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (++i >= s.size()) return std::nullopt;
    switch (s[i]) {
      case '"':
        out.push_back('"');
        break;
      case '\\':
        out.push_back('\\');
        break;
      case 'n':
        out.push_back('\n');
        break;
      case 'r':
        out.push_back('\r');
        break;
      case 't':
        out.push_back('\t');
        break;
      case 'x':
      case 'u': {
        std::size_t n = s[i] == 'x' ? 2 : 4;
        if (i + n >= s.size()) return std::nullopt;
        unsigned v = 0;
        for (std::size_t k = 1; k <= n; ++k) {
          int h = hex_value(s[i + k]);
          if (h < 0) return std::nullopt;
          v = v * 16 + static_cast<unsigned>(h);
        }
        if (v > 0x7f) return std::nullopt;  // only control escapes are emitted
        out.push_back(static_cast<char>(v));
        i += n;
        break;
      }
      default:
        return std::nullopt;
    }
  }
  return std::nullopt;
}

// ---- List of Edges --------------------------------------------------------

std::vector<LabelTriple> parse_list_of_edges(std::string_view body) {
  const Format f = Format::ListOfEdges;
  auto lines = split_lines(body);
  if (lines.size() < 2 || lines.front() != "Edges: [" || lines.back() != "]")
    fail(f, 1, "expected 'Edges: [' ... ']'");
  std::vector<LabelTriple> out;
  for (std::size_t n = 1; n + 1 < lines.size(); ++n) {
    std::string_view line = lines[n];
    std::size_t pos = 0;
    if (line.empty() || line[pos++] != '(') fail(f, n + 1, "expected '('");
    LabelTriple t;
    for (int slot = 0; slot < 3; ++slot) {
      const char stop = slot < 2 ? ',' : ')';
      if (pos < line.size() && line[pos] == '"') {
        auto q = read_quoted(line, pos);
        if (!q) fail(f, n + 1, "bad quoted label");
        t[slot] = std::move(*q);
      } else {
        std::size_t end = line.find(stop, pos);
        if (end == std::string_view::npos) fail(f, n + 1, "unterminated label");
        t[slot] = std::string(line.substr(pos, end - pos));
        pos = end;
      }
      if (pos >= line.size() || line[pos] != stop) fail(f, n + 1, "expected separator");
      ++pos;
      if (slot < 2) {
        if (pos >= line.size() || line[pos] != ' ') fail(f, n + 1, "expected ', '");
        ++pos;
      }
    }
    const bool last = n + 2 == lines.size();
    if (line.substr(pos) != (last ? "" : ",")) fail(f, n + 1, "unexpected trailing text");
    out.push_back(std::move(t));
  }
  return out;
}

// ---- Structured JSON ------------------------------------------------------

std::vector<LabelTriple> parse_structured_json(std::string_view body) {
  nlohmann::ordered_json root;
  try {
    root = nlohmann::ordered_json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    fail(Format::StructuredJSON, 0, e.what());
  }
  std::vector<LabelTriple> out;
  for (auto& [subject, rels] : root.items())
    for (auto& [relation, objects] : rels.items())
      for (auto& o : objects) out.push_back({subject, relation, o.get<std::string>()});
  return out;
}

// ---- Structured YAML ------------------------------------------------------

std::string yaml_decode(std::string_view s, std::size_t line) {
  if (!s.empty() && s.front() == '"') {
    std::size_t pos = 0;
    auto q = read_quoted(s, pos);
    if (!q || pos != s.size()) fail(Format::StructuredYAML, line, "bad quoted scalar");
    return *q;
  }
  return std::string(s);
}

std::vector<LabelTriple> parse_structured_yaml(std::string_view body) {
  const Format f = Format::StructuredYAML;
  std::vector<LabelTriple> out;
  std::optional<std::string> subject, relation;
  auto lines = split_lines(body);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = lines[n];
    if (line.empty()) continue;
    if (line.substr(0, 6) == "    - ") {
      if (!relation) fail(f, n + 1, "list item outside a relation");
      out.push_back({*subject, *relation, yaml_decode(line.substr(6), n + 1)});
    } else if (line.substr(0, 2) == "  " && line[2] != ' ') {
      if (!subject || line.back() != ':') fail(f, n + 1, "bad relation key");
      relation = yaml_decode(line.substr(2, line.size() - 3), n + 1);
    } else if (line[0] != ' ') {
      if (line.back() != ':') fail(f, n + 1, "bad subject key");
      subject = yaml_decode(line.substr(0, line.size() - 1), n + 1);
      relation.reset();
    } else {
      fail(f, n + 1, "unexpected indentation");
    }
  }
  return out;
}

// ---- RDF Turtle -----------------------------------------------------------

struct TurtleToken {
  enum Kind { Name, String, Punct } kind;
  std::string text;
  std::size_t line;
};

std::vector<TurtleToken> tokenize_turtle(std::string_view s) {
  const Format f = Format::RDFTurtle;
  std::vector<TurtleToken> toks;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == '@') {
      // @prefix name: <iri> .
      std::size_t end = s.find('\n', i);
      std::string_view dir = s.substr(i, end == std::string_view::npos ? s.npos : end - i);
      if (dir.substr(0, 8) != "@prefix " || dir.size() < 2 || dir.substr(dir.size() - 2) != " .")
        fail(f, line, "bad directive");
      i += dir.size();
    } else if (c == '"') {
      auto q = read_quoted(s, i);
      if (!q) fail(f, line, "bad string literal");
      toks.push_back({TurtleToken::String, std::move(*q), line});
    } else if (c == ',' || c == ';' || c == '.') {
      toks.push_back({TurtleToken::Punct, std::string(1, c), line});
      ++i;
    } else {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == ':' ||
                              s[j] == '_' || s[j] == '-'))
        ++j;
      if (j == i) fail(f, line, std::string("unexpected character '") + c + "'");
      toks.push_back({TurtleToken::Name, std::string(s.substr(i, j - i)), line});
      i = j;
    }
  }
  return toks;
}

std::vector<LabelTriple> parse_turtle(std::string_view body) {
  const Format f = Format::RDFTurtle;
  auto toks = tokenize_turtle(body);
  std::map<std::string, std::string> labels;
  std::vector<std::array<std::string, 3>> edges;  // IRIs

  std::size_t i = 0;
  auto expect_name = [&]() -> const std::string& {
    if (i >= toks.size() || toks[i].kind != TurtleToken::Name)
      fail(f, i < toks.size() ? toks[i].line : 0, "expected a name");
    return toks[i++].text;
  };
  while (i < toks.size()) {
    const std::string subject = expect_name();
    while (true) {
      const std::string predicate = expect_name();
      while (true) {
        if (i >= toks.size()) fail(f, 0, "unexpected end of input");
        const TurtleToken& obj = toks[i++];
        if (predicate == "rdfs:label") {
          if (obj.kind != TurtleToken::String) fail(f, obj.line, "label must be a string");
          labels[subject] = obj.text;
        } else if (predicate == "a") {
          if (obj.kind != TurtleToken::Name) fail(f, obj.line, "type must be a name");
        } else {
          if (obj.kind != TurtleToken::Name) fail(f, obj.line, "object must be a name");
          edges.push_back({subject, predicate, obj.text});
        }
        if (i < toks.size() && toks[i].text == ",") {
          ++i;
          continue;
        }
        break;
      }
      if (i >= toks.size()) fail(f, 0, "missing '.'");
      if (toks[i].text == ";") {
        ++i;
        continue;
      }
      if (toks[i].text == ".") {
        ++i;
        break;
      }
      fail(f, toks[i].line, "expected ';' or '.'");
    }
  }

  auto label_of = [&](const std::string& iri) {
    auto it = labels.find(iri);
    if (it == labels.end()) fail(f, 0, "no rdfs:label for " + iri);
    return it->second;
  };
  std::vector<LabelTriple> out;
  for (const auto& [s, p, o] : edges) out.push_back({label_of(s), label_of(p), label_of(o)});
  return out;
}

// ---- JSON-LD --------------------------------------------------------------

std::vector<LabelTriple> parse_jsonld(std::string_view body) {
  const Format f = Format::JSONLD;
  nlohmann::ordered_json root;
  try {
    root = nlohmann::ordered_json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    fail(f, 0, e.what());
  }
  if (!root.contains("@graph") || !root["@graph"].is_array()) fail(f, 0, "missing @graph");
  std::map<std::string, std::string> labels;
  std::vector<std::array<std::string, 3>> edges;
  for (const auto& node : root["@graph"]) {
    const std::string id = node.at("@id").get<std::string>();
    labels[id] = node.at("label").get<std::string>();
    for (auto& [key, value] : node.items()) {
      if (key == "@id" || key == "label" || key == "type") continue;
      if (value.is_object()) {
        edges.push_back({id, key, value.at("@id").get<std::string>()});
      } else if (value.is_array()) {
        for (const auto& v : value) edges.push_back({id, key, v.at("@id").get<std::string>()});
      } else {
        fail(f, 0, "unexpected value for " + key);
      }
    }
  }
  auto label_of = [&](const std::string& iri) {
    auto it = labels.find(iri);
    if (it == labels.end()) fail(f, 0, "no label for " + iri);
    return it->second;
  };
  std::vector<LabelTriple> out;
  for (const auto& [s, p, o] : edges) out.push_back({label_of(s), label_of(p), label_of(o)});
  return out;
}

}  // namespace

std::vector<LabelTriple> parse_body(std::string_view body, Format f) {
  switch (f) {
    case Format::ListOfEdges:
      return parse_list_of_edges(body);
    case Format::StructuredJSON:
      return parse_structured_json(body);
    case Format::StructuredYAML:
      return parse_structured_yaml(body);
    case Format::RDFTurtle:
      return parse_turtle(body);
    case Format::JSONLD:
      return parse_jsonld(body);
  }
  throw Error("parse: unknown format");
}

}  // namespace kgbench
