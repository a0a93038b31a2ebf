#include "kgbench/templates.hpp"

#include <cctype>

#include "kgbench/error.hpp"
#include "kgbench/util.hpp"
#include "kgbench_default_templates.hpp"

namespace kgbench {

const Templates& Templates::defaults() {
  static const Templates t = parse(kDefaultTemplates, "data/templates.txt");
  return t;
}

Templates Templates::parse(std::string_view text, const std::string& origin) {
  Templates t;
  std::string current;
  std::string body;
  bool in_section = false;
  auto flush = [&] {
    if (!in_section) return;
    while (!body.empty() && body.back() == '\n') body.pop_back();
    t.sections_[current] = body;
  };
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.size() > 4 && line.substr(0, 2) == "[[" && line.substr(line.size() - 2) == "]]") {
      flush();
      current = std::string(trim(line.substr(2, line.size() - 4)));
      if (current.empty()) throw ParseError(origin, i + 1, "empty section name");
      body.clear();
      in_section = true;
      continue;
    }
    if (!in_section) {
      if (trim(line).empty() || line.front() == '#') continue;
      throw ParseError(origin, i + 1, "text outside of a [[section]]");
    }
    body.append(line);
    body.push_back('\n');
  }
  flush();
  return t;
}

Templates Templates::load_overrides(const std::string& path) {
  Templates t = defaults();
  Templates user = parse(read_file(path), path);
  for (auto& [k, v] : user.sections_) t.sections_[k] = v;
  return t;
}

bool Templates::has(std::string_view key) const {
  if (sections_.count(std::string(key))) return true;
  auto dot = key.rfind('.');
  return dot != std::string_view::npos && sections_.count(std::string(key.substr(0, dot)));
}

const std::string& Templates::get(std::string_view key) const {
  std::string k(key);
  if (swap_loe_json_preambles) {
    if (k == "preamble.ListOfEdges")
      k = "preamble.StructuredJSON";
    else if (k == "preamble.StructuredJSON")
      k = "preamble.ListOfEdges";
  }
  auto it = sections_.find(k);
  if (it != sections_.end()) return it->second;
  auto dot = k.rfind('.');
  if (dot != std::string::npos) {
    it = sections_.find(k.substr(0, dot));
    if (it != sections_.end()) return it->second;
  }
  throw Error("missing template '" + k + "'");
}

std::string substitute(std::string_view text, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      auto close = text.find('}', i);
      if (close != std::string_view::npos) {
        std::string name(text.substr(i + 1, close - i - 1));
        bool ident = !name.empty();
        for (char c : name)
          if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) ident = false;
        if (ident) {
          auto it = vars.find(name);
          if (it == vars.end()) throw Error("template placeholder {" + name + "} not provided");
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string Templates::fill(std::string_view key,
                            const std::map<std::string, std::string>& vars) const {
  return substitute(get(key), vars);
}

std::string Templates::digest() const {
  std::string all = swap_loe_json_preambles ? "swap=1\n" : "swap=0\n";
  for (const auto& [k, v] : sections_) {
    all += k;
    all.push_back('\0');
    all += v;
    all.push_back('\0');
  }
  return sha256_hex(all);
}

}  // namespace kgbench
