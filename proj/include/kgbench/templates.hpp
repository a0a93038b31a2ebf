#pragma once

#include <map>
#include <string>
#include <string_view>

namespace kgbench {

// Named text templates with {placeholder} substitution. The defaults are
// compiled in from data/templates.txt; a user file overrides individual
// sections.
class Templates {
 public:
  static const Templates& defaults();

  // Parses the [[section]] format.
  static Templates parse(std::string_view text, const std::string& origin = "<string>");

  // Defaults overlaid with the sections of `path`.
  static Templates load_overrides(const std::string& path);

  // Exact key, else the part before the last '.', else throws.
  const std::string& get(std::string_view key) const;
  bool has(std::string_view key) const;

  // Substitutes {name} from vars; unknown placeholders throw.
  std::string fill(std::string_view key, const std::map<std::string, std::string>& vars) const;

  void set(std::string key, std::string body) { sections_[std::move(key)] = std::move(body); }

  // Exchanges the List-of-Edges and Structured-JSON preambles at lookup time.
  bool swap_loe_json_preambles = false;

  // Stable hash over every section and the swap flag.
  std::string digest() const;

  const std::map<std::string, std::string>& sections() const { return sections_; }

 private:
  std::map<std::string, std::string> sections_;
};

std::string substitute(std::string_view text, const std::map<std::string, std::string>& vars);

}  // namespace kgbench
