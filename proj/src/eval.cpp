#include "kgbench/eval.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "kgbench/util.hpp"

namespace kgbench {

// ---- gold -------------------------------------------------------------------

GoldAnswer GoldAnswer::from_json(TaskKind task, const nlohmann::json& j) {
  GoldAnswer g;
  g.kind = answer_kind(task);
  try {
    switch (g.kind) {
      case AnswerKind::Boolean:
        g.truth = j.get<bool>();
        break;
      case AnswerKind::Count:
        g.count = j.get<std::int64_t>();
        break;
      case AnswerKind::EntityLabel:
        g.entity = j.get<std::string>();
        break;
      case AnswerKind::EntityPathSet:
        g.paths = j.get<std::vector<std::vector<std::string>>>();
        if (g.paths.empty()) throw Error("empty gold path set");
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("gold for " + std::string(to_string(task)) + ": " + e.what());
  }
  return g;
}

GoldAnswer GoldAnswer::from_gold(const KnowledgeGraph& g, const Gold& gold) {
  GoldAnswer out;
  out.kind = gold.kind;
  out.truth = gold.truth;
  out.count = gold.count;
  if (gold.kind == AnswerKind::EntityLabel) out.entity = g.label(gold.entity);
  for (const Path& p : gold.paths) {
    std::vector<std::string> labels;
    for (EntityId e : p) labels.push_back(g.label(e));
    out.paths.push_back(std::move(labels));
  }
  return out;
}

std::string answer_text(const GoldAnswer& gold) {
  switch (gold.kind) {
    case AnswerKind::Boolean:
      return gold.truth ? "True" : "False";
    case AnswerKind::Count:
      return std::to_string(gold.count);
    case AnswerKind::EntityLabel:
      return gold.entity;
    case AnswerKind::EntityPathSet: {
      std::string s;
      for (const auto& label : gold.paths.front()) {
        if (!s.empty()) s += " -> ";
        s += label;
      }
      return s;
    }
  }
  return {};
}

// ---- parsing ----------------------------------------------------------------

namespace {

bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u);
}

// Strips markdown emphasis, backticks and matching quotes around s.
std::string_view unwrap(std::string_view s) {
  for (bool changed = true; changed;) {
    changed = false;
    s = trim(s);
    while (!s.empty() && (s.front() == '*' || s.front() == '`')) {
      s.remove_prefix(1);
      changed = true;
    }
    while (!s.empty() && (s.back() == '*' || s.back() == '`')) {
      s.remove_suffix(1);
      changed = true;
    }
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
      s = s.substr(1, s.size() - 2);
      changed = true;
    }
  }
  return s;
}

std::optional<bool> coerce_bool(std::string_view s, bool whole) {
  s = unwrap(s);
  std::size_t end = 0;
  while (end < s.size() && std::isalpha(static_cast<unsigned char>(s[end]))) ++end;
  std::string word = to_lower_ascii(s.substr(0, end));
  std::string_view rest = trim(s.substr(end));
  while (!rest.empty() && (rest.back() == '.' || rest.back() == '!')) rest.remove_suffix(1);
  if (whole && !rest.empty()) return std::nullopt;
  if (word == "true" || word == "yes") return true;
  if (word == "false" || word == "no") return false;
  return std::nullopt;
}

std::optional<std::int64_t> coerce_int(std::string_view s, bool whole) {
  s = unwrap(s);
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  std::size_t digits = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == digits) return std::nullopt;
  std::string_view rest = trim(s.substr(i));
  if (!rest.empty() && rest.back() == '.') rest.remove_suffix(1);
  if (whole && !rest.empty()) return std::nullopt;
  if (i < s.size() && is_word_byte(s[i])) return std::nullopt;  // "3rd", "4x"
  try {
    return std::stoll(std::string(s.substr(0, i)));
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
}

std::optional<std::vector<std::string>> coerce_path(std::string_view s) {
  s = unwrap(s);
  if (s.size() >= 3 && s.back() == '.' && s[s.size() - 2] == ']') s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    out.emplace_back(unwrap(s.substr(start, end - start)));
  };
  for (std::size_t i = 0; i < s.size();) {
    if (s.compare(i, 2, "->") == 0) {
      flush(i);
      i += 2;
      start = i;
    } else if (s.compare(i, 3, "\xe2\x86\x92") == 0) {  // →
      flush(i);
      i += 3;
      start = i;
    } else if (s[i] == ',') {
      flush(i);
      i += 1;
      start = i;
    } else {
      ++i;
    }
  }
  flush(s.size());
  if (!out.empty()) {
    std::string& last = out.back();
    if (!last.empty() && last.back() == '.') last.pop_back();
  }
  for (const auto& e : out)
    if (e.empty()) return std::nullopt;
  return out;
}

// Text following the last answer marker, or nullopt.
std::optional<std::string_view> marker_span(std::string_view raw) {
  static constexpr std::string_view kMarker = "answer:";
  const std::string lower = to_lower_ascii(raw);
  const std::size_t at = lower.rfind(kMarker);
  if (at == std::string::npos) return std::nullopt;
  std::string_view rest = raw.substr(at + kMarker.size());
  while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
  for (std::string_view line : split_lines(rest)) {
    std::string_view t = unwrap(line);
    if (!t.empty()) return t;
  }
  return std::string_view();
}

}  // namespace

ParsedAnswer parse_answer(TaskKind task, std::string_view raw) {
  ParsedAnswer p;
  const AnswerKind kind = answer_kind(task);
  std::optional<std::string_view> span = marker_span(raw);
  bool whole = false;
  if (!span) {
    if (kind == AnswerKind::EntityLabel || kind == AnswerKind::EntityPathSet) {
      p.error = "no answer marker";
      return p;
    }
    auto lines = split_lines(raw);
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) {
      p.error = "empty response";
      return p;
    }
    span = trim(lines.back());
    whole = true;
  }
  p.span = std::string(*span);
  if (p.span.empty()) {
    p.error = "empty answer";
    return p;
  }
  switch (kind) {
    case AnswerKind::Boolean:
      if (auto b = coerce_bool(p.span, whole)) {
        p.truth = *b;
        p.ok = true;
      } else {
        p.error = "not a boolean";
      }
      break;
    case AnswerKind::Count:
      if (auto n = coerce_int(p.span, whole)) {
        p.count = *n;
        p.ok = true;
      } else {
        p.error = "not an integer";
      }
      break;
    case AnswerKind::EntityLabel:
      p.label = std::string(unwrap(p.span));
      p.ok = !p.label.empty();
      if (!p.ok) p.error = "empty label";
      break;
    case AnswerKind::EntityPathSet:
      if (auto path = coerce_path(p.span)) {
        p.path = std::move(*path);
        p.ok = true;
      } else {
        p.error = "malformed path";
      }
      break;
  }
  return p;
}

nlohmann::ordered_json ParsedAnswer::to_json(AnswerKind kind) const {
  if (!ok) return nullptr;
  switch (kind) {
    case AnswerKind::Boolean:
      return truth;
    case AnswerKind::Count:
      return count;
    case AnswerKind::EntityLabel:
      return label;
    case AnswerKind::EntityPathSet:
      return path;
  }
  return nullptr;
}

// ---- scoring ----------------------------------------------------------------

namespace {

bool labels_equal(std::string_view answer, std::string_view gold) {
  const std::string a = normalize_label(answer), g = normalize_label(gold);
  if (a == g) return true;
  // A sentence-final period is not part of the label.
  return !a.empty() && a.back() == '.' && std::string_view(a).substr(0, a.size() - 1) == g;
}

bool path_equal(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (normalize_label(a[i]) != normalize_label(b[i])) return false;
  return true;
}

std::string join_path(const std::vector<std::string>& p) {
  std::string s;
  for (const auto& l : p) {
    if (!s.empty()) s += " -> ";
    s += l;
  }
  return s;
}

}  // namespace

int score_exact(TaskKind task, const ParsedAnswer& parsed, const GoldAnswer& gold) {
  if (!parsed.ok) return 0;
  switch (answer_kind(task)) {
    case AnswerKind::Boolean:
      return parsed.truth == gold.truth;
    case AnswerKind::Count:
      return parsed.count == gold.count;
    case AnswerKind::EntityLabel:
      return labels_equal(parsed.label, gold.entity);
    case AnswerKind::EntityPathSet:
      for (const auto& p : gold.paths) {
        if (path_equal(parsed.path, p)) return 1;
        // Labels that themselves contain a separator cannot be split back.
        if (labels_equal(parsed.span, join_path(p))) return 1;
      }
      return 0;
  }
  return 0;
}

namespace {

// Lowercase ASCII, every whitespace run collapsed to one space.
std::string fold(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool label_at(std::string_view text, std::size_t pos, std::string_view label) {
  if (label.empty() || text.compare(pos, label.size(), label) != 0) return false;
  const std::size_t end = pos + label.size();
  if (is_word_byte(label.back()) && end < text.size() && is_word_byte(text[end])) return false;
  if (is_word_byte(label.front()) && pos > 0 && is_word_byte(text[pos - 1])) return false;
  return true;
}

std::size_t skip_decoration(std::string_view text, std::size_t pos) {
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '*' || text[pos] == '`' ||
                               text[pos] == '"' || text[pos] == '\''))
    ++pos;
  return pos;
}

// Position after a separator starting at pos (decoration allowed around it).
std::optional<std::size_t> separator_after(std::string_view text, std::size_t pos) {
  pos = skip_decoration(text, pos);
  static constexpr std::string_view kSeparators[] = {"-->", "->", "\xe2\x86\x92", "=>", ","};
  for (std::string_view sep : kSeparators)
    if (text.compare(pos, sep.size(), sep) == 0) return skip_decoration(text, pos + sep.size());
  if (text.compare(pos, 2, "to") == 0 && pos + 2 < text.size() && text[pos + 2] == ' ' &&
      (pos == 0 || !is_word_byte(text[pos - 1])))
    return skip_decoration(text, pos + 2);
  return std::nullopt;
}

// Start of a separator that ends exactly at `end` (decoration allowed).
std::optional<std::size_t> separator_before(std::string_view text, std::size_t end) {
  auto back = [&](std::size_t p) {
    while (p > 0 && (text[p - 1] == ' ' || text[p - 1] == '*' || text[p - 1] == '`' ||
                     text[p - 1] == '"' || text[p - 1] == '\''))
      --p;
    return p;
  };
  std::size_t p = back(end);
  static constexpr std::string_view kSeparators[] = {"->", "\xe2\x86\x92", "=>", ","};
  for (std::string_view sep : kSeparators)
    if (p >= sep.size() && text.compare(p - sep.size(), sep.size(), sep) == 0)
      return back(p - sep.size());
  if (p >= 3 && text.compare(p - 3, 3, " to") == 0) return back(p - 3);
  return std::nullopt;
}

bool continues_forward(std::string_view text, std::size_t pos,
                       const std::vector<std::string>& labels) {
  auto next = separator_after(text, pos);
  if (!next) return false;
  for (const auto& l : labels)
    if (label_at(text, *next, l)) return true;
  return false;
}

bool continues_backward(std::string_view text, std::size_t pos,
                        const std::vector<std::string>& labels) {
  auto end = separator_before(text, pos);
  if (!end) return false;
  for (const auto& l : labels)
    if (l.size() <= *end && label_at(text, *end - l.size(), l)) return true;
  return false;
}

}  // namespace

int score_flexible_path(std::string_view raw, const std::vector<std::vector<std::string>>& gold_paths,
                        const std::vector<std::string>& entity_labels) {
  const std::string text = fold(raw);
  std::vector<std::string> labels;
  for (const auto& l : entity_labels) labels.push_back(fold(l));
  for (const auto& gold : gold_paths) {
    if (gold.empty()) continue;
    std::vector<std::string> path;
    for (const auto& l : gold) path.push_back(fold(l));
    for (std::size_t start = text.find(path[0]); start != std::string::npos;
         start = text.find(path[0], start + 1)) {
      if (!label_at(text, start, path[0])) continue;
      std::size_t pos = start + path[0].size();
      bool ok = true;
      for (std::size_t i = 1; i < path.size() && ok; ++i) {
        auto next = separator_after(text, pos);
        ok = next && label_at(text, *next, path[i]);
        if (ok) pos = *next + path[i].size();
      }
      if (!ok) continue;
      if (!labels.empty() &&
          (continues_forward(text, pos, labels) || continues_backward(text, start, labels)))
        continue;
      return 1;
    }
  }
  return 0;
}

// ---- records ----------------------------------------------------------------

std::string EvalRecord::key() const {
  return fmt::format("{}/{}/{}/{}/{}", to_string(task), instance_index, to_string(format), model_id,
                     pseudo ? "pseudo" : "plain");
}

nlohmann::ordered_json EvalRecord::to_json() const {
  nlohmann::ordered_json j;
  j["key"] = key();
  j["model_id"] = model_id;
  j["format"] = to_string(format);
  j["task"] = to_string(task);
  j["instance_index"] = instance_index;
  j["pseudo"] = pseudo;
  j["raw_response"] = raw_response;
  j["parsed_answer"] = parsed;
  j["parse_failed"] = parse_failed;
  j["score"] = score ? nlohmann::ordered_json(*score) : nlohmann::ordered_json(nullptr);
  j["flexible_score"] =
      flexible_score ? nlohmann::ordered_json(*flexible_score) : nlohmann::ordered_json(nullptr);
  j["input_tokens"] = input_tokens;
  j["output_tokens"] = output_tokens;
  j["error"] = error;
  j["truncated"] = truncated;
  j["cache_hit"] = cache_hit;
  j["retries"] = retries;
  j["temperature"] = temperature;
  j["max_tokens"] = max_tokens;
  j["prompt_sha256"] = prompt_sha256;
  j["meta"] = meta;
  j["config_digest"] = config_digest;
  return j;
}

EvalRecord EvalRecord::from_json(const nlohmann::json& j) {
  EvalRecord r;
  r.model_id = j.at("model_id").get<std::string>();
  r.format = format_from_string(j.at("format").get<std::string>());
  r.task = task_from_string(j.at("task").get<std::string>());
  r.instance_index = j.at("instance_index").get<std::size_t>();
  r.pseudo = j.at("pseudo").get<bool>();
  r.raw_response = j.value("raw_response", std::string());
  if (j.contains("parsed_answer")) r.parsed = j.at("parsed_answer");
  r.parse_failed = j.value("parse_failed", false);
  if (j.contains("score") && !j.at("score").is_null()) r.score = j.at("score").get<int>();
  if (j.contains("flexible_score") && !j.at("flexible_score").is_null())
    r.flexible_score = j.at("flexible_score").get<int>();
  r.input_tokens = j.value("input_tokens", std::int64_t{0});
  r.output_tokens = j.value("output_tokens", std::int64_t{0});
  r.error = j.value("error", std::string());
  r.truncated = j.value("truncated", false);
  r.cache_hit = j.value("cache_hit", false);
  r.retries = j.value("retries", 0);
  r.temperature = j.value("temperature", 0.0);
  r.max_tokens = j.value("max_tokens", 0);
  r.prompt_sha256 = j.value("prompt_sha256", std::string());
  if (j.contains("meta")) r.meta = j.at("meta");
  r.config_digest = j.value("config_digest", std::string());
  if (r.error.empty() && !r.score) throw Error("record " + r.key() + " has neither score nor error");
  return r;
}

void score_record(EvalRecord& r, const GoldAnswer& gold,
                  const std::vector<std::string>& entity_labels) {
  const ParsedAnswer parsed = parse_answer(r.task, r.raw_response);
  r.parsed = parsed.to_json(answer_kind(r.task));
  r.parse_failed = !parsed.ok;
  r.score = score_exact(r.task, parsed, gold);
  if (r.task == TaskKind::ShortestPath)
    r.flexible_score =
        std::max(*r.score, score_flexible_path(r.raw_response, gold.paths, entity_labels));
  else
    r.flexible_score.reset();
}

std::vector<EvalRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open records file " + path);
  std::vector<EvalRecord> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(EvalRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, n, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path, n, e.what());
    }
  }
  return out;
}

// ---- aggregation ------------------------------------------------------------

std::string aggregation_bin(std::int64_t count) {
  if (count >= 10) return "10+";
  if (count >= 5) return "5-9";
  return std::to_string(count);
}

namespace {

template <class Key>
class MeanAcc {
 public:
  void add(const Key& k, double v) {
    auto& [sum, n] = acc_[k];
    sum += v;
    ++n;
  }
  std::map<Key, double> result() const {
    std::map<Key, double> out;
    for (const auto& [k, sn] : acc_) out[k] = sn.first / double(sn.second);
    return out;
  }

 private:
  std::map<Key, std::pair<double, std::size_t>> acc_;
};

std::string meta_string(const nlohmann::ordered_json& meta, const char* key) {
  if (!meta.is_object() || !meta.contains(key)) return "unknown";
  const auto& v = meta.at(key);
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::optional<std::int64_t> meta_int(const nlohmann::ordered_json& meta, const char* key) {
  if (!meta.is_object() || !meta.contains(key) || !meta.at(key).is_number_integer())
    return std::nullopt;
  return meta.at(key).get<std::int64_t>();
}

}  // namespace

SummaryTable aggregate(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw Error("no records");
  SummaryTable s;
  s.total_records = records.size();

  using BKey = std::tuple<std::string, TaskKind, std::string, Format, bool, std::string>;
  using PKey = std::tuple<std::string, TaskKind, std::string, Format, bool, std::string, std::string>;
  std::map<BKey, std::pair<std::size_t, std::size_t>> breakdown;
  std::map<PKey, std::size_t> pairs;
  std::map<Format, std::pair<double, std::size_t>> tokens;

  for (const EvalRecord& r : records) {
    CellStats& c = s.cells[{r.format, r.model_id, r.task, r.pseudo}];
    if (!r.error.empty() || !r.score) {
      ++c.errors;
      ++s.total_errors;
      continue;
    }
    ++c.n;
    c.correct += *r.score;
    c.parse_failures += r.parse_failed;
    if (r.flexible_score) {
      ++c.flexible_n;
      c.flexible_correct += *r.flexible_score;
    }
    auto& [tsum, tn] = tokens[r.format];
    tsum += double(r.input_tokens);
    ++tn;

    auto bin = [&](const std::string& dim, const std::string& b) {
      auto& [n, k] = breakdown[{dim, r.task, r.model_id, r.format, r.pseudo, b}];
      ++n;
      k += *r.score;
    };
    auto pair = [&](const std::string& dim, const std::string& truth, const std::string& pred) {
      ++pairs[{dim, r.task, r.model_id, r.format, r.pseudo, truth, pred}];
    };
    switch (r.task) {
      case TaskKind::ShortestPath: {
        const std::string len = meta_string(r.meta, "path_length");
        bin("path_length", len);
        std::string pred = "unparsed";
        if (r.parsed.is_array() && !r.parsed.empty()) pred = std::to_string(r.parsed.size() - 1);
        pair("predicted_path_length", len, pred);
        break;
      }
      case TaskKind::AggByRelation:
      case TaskKind::AggNeighborProperty: {
        auto count = meta_int(r.meta, "true_count");
        bin("aggregation_size", count ? aggregation_bin(*count) : "unknown");
        bin("direction", meta_string(r.meta, "direction"));
        std::string pred = r.parsed.is_number_integer() ? r.parsed.dump() : "unparsed";
        pair("count", count ? std::to_string(*count) : "unknown", pred);
        break;
      }
      case TaskKind::HighestDegree:
        bin("direction", meta_string(r.meta, "direction"));
        break;
      case TaskKind::TripleRetrieval:
        bin("polarity", meta_string(r.meta, "is_positive") == "true" ? "positive" : "negative");
        break;
    }
  }

  MeanAcc<std::tuple<Format, std::string, bool>> model_overall;
  MeanAcc<std::tuple<Format, TaskKind, bool>> format_task;
  MeanAcc<std::tuple<std::string, TaskKind, bool>> all_formats_task;
  MeanAcc<std::tuple<TaskKind, bool>> overall_task;
  for (const auto& [key, c] : s.cells) {
    if (!c.n) continue;
    const auto& [format, model, task, pseudo] = key;
    model_overall.add({format, model, pseudo}, c.accuracy());
    format_task.add({format, task, pseudo}, c.accuracy());
    all_formats_task.add({model, task, pseudo}, c.accuracy());
    overall_task.add({task, pseudo}, c.accuracy());
  }
  s.model_overall = model_overall.result();
  s.format_task_overall = format_task.result();
  s.all_formats_task = all_formats_task.result();
  s.overall_task = overall_task.result();

  MeanAcc<std::tuple<Format, bool>> format_overall;
  for (const auto& [k, v] : s.format_task_overall)
    format_overall.add({std::get<0>(k), std::get<2>(k)}, v);
  s.format_overall = format_overall.result();
  MeanAcc<std::tuple<std::string, bool>> all_formats_model;
  for (const auto& [k, v] : s.all_formats_task)
    all_formats_model.add({std::get<0>(k), std::get<2>(k)}, v);
  s.all_formats_model = all_formats_model.result();
  MeanAcc<bool> overall;
  for (const auto& [k, v] : s.overall_task) overall.add(std::get<1>(k), v);
  s.overall = overall.result();

  for (const auto& [f, sn] : tokens) s.mean_input_tokens[f] = sn.first / double(sn.second);

  for (const auto& [k, nk] : breakdown) {
    const auto& [dim, task, model, format, pseudo, b] = k;
    s.breakdowns.push_back({dim, task, model, format, pseudo, b, nk.first, nk.second});
  }
  for (const auto& [k, n] : pairs) {
    const auto& [dim, task, model, format, pseudo, truth, pred] = k;
    s.pairs.push_back({dim, task, model, format, pseudo, truth, pred, n});
  }

  s.best_format = best_format_per_model(s);
  return s;
}

std::map<std::string, BestFormat> best_format_per_model(const SummaryTable& summary) {
  std::map<std::string, std::map<Format, std::pair<double, std::size_t>>> acc;
  for (const auto& [key, c] : summary.cells) {
    if (!c.n) continue;
    auto& [sum, n] = acc[std::get<1>(key)][std::get<0>(key)];
    sum += c.accuracy();
    ++n;
  }
  std::map<std::string, BestFormat> out;
  for (const auto& [model, formats] : acc) {
    std::vector<std::pair<Format, double>> means;
    for (const auto& [f, sn] : formats) means.emplace_back(f, sn.first / double(sn.second));
    double best = means.front().second;
    for (const auto& [f, m] : means) best = std::max(best, m);
    BestFormat b;
    b.mean = best;
    for (const auto& [f, m] : means)
      if (best - m <= kTieTolerance) b.tied.push_back(f);
    std::sort(b.tied.begin(), b.tied.end(),
              [](Format x, Format y) { return to_string(x) < to_string(y); });
    b.format = b.tied.front();
    b.tie = b.tied.size() > 1;
    out[model] = b;
  }
  return out;
}

// ---- output -----------------------------------------------------------------

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed(double v, int digits = 6) { return fmt::format("{:.{}f}", v, digits); }

const char* pseudo_name(bool pseudo) { return pseudo ? "pseudo" : "plain"; }

}  // namespace

std::string SummaryTable::to_csv() const {
  std::string out =
      "format,model,task,pseudo,accuracy,n,errors,parse_failures,flexible_accuracy\n";
  for (const auto& [key, c] : cells) {
    const auto& [format, model, task, pseudo] = key;
    auto flex = c.flexible_accuracy();
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", to_string(format), csv_field(model),
                       to_string(task), pseudo ? "true" : "false", fixed(c.accuracy()), c.n,
                       c.errors, c.parse_failures, flex ? fixed(*flex) : "");
  }
  return out;
}

nlohmann::ordered_json SummaryTable::to_json() const {
  using oj = nlohmann::ordered_json;
  oj j;
  j["total_records"] = total_records;
  j["total_errors"] = total_errors;
  oj cells_j = oj::array();
  for (const auto& [key, c] : cells) {
    const auto& [format, model, task, pseudo] = key;
    oj row = {{"format", to_string(format)}, {"model", model},
              {"task", to_string(task)},     {"pseudo", pseudo},
              {"accuracy", c.accuracy()},    {"n", c.n},
              {"correct", c.correct},        {"errors", c.errors},
              {"parse_failures", c.parse_failures}};
    auto flex = c.flexible_accuracy();
    row["flexible_accuracy"] = flex ? oj(*flex) : oj(nullptr);
    cells_j.push_back(std::move(row));
  }
  j["cells"] = std::move(cells_j);

  oj mo = oj::array();
  for (const auto& [k, v] : model_overall)
    mo.push_back({{"format", to_string(std::get<0>(k))},
                  {"model", std::get<1>(k)},
                  {"pseudo", std::get<2>(k)},
                  {"accuracy", v}});
  j["model_overall"] = std::move(mo);
  oj ft = oj::array();
  for (const auto& [k, v] : format_task_overall)
    ft.push_back({{"format", to_string(std::get<0>(k))},
                  {"task", to_string(std::get<1>(k))},
                  {"pseudo", std::get<2>(k)},
                  {"accuracy", v}});
  j["format_task_overall"] = std::move(ft);
  oj fo = oj::array();
  for (const auto& [k, v] : format_overall)
    fo.push_back(
        {{"format", to_string(std::get<0>(k))}, {"pseudo", std::get<1>(k)}, {"accuracy", v}});
  j["format_overall"] = std::move(fo);
  oj at = oj::array();
  for (const auto& [k, v] : all_formats_task)
    at.push_back({{"model", std::get<0>(k)},
                  {"task", to_string(std::get<1>(k))},
                  {"pseudo", std::get<2>(k)},
                  {"accuracy", v}});
  j["all_formats_task"] = std::move(at);
  oj am = oj::array();
  for (const auto& [k, v] : all_formats_model)
    am.push_back({{"model", std::get<0>(k)}, {"pseudo", std::get<1>(k)}, {"accuracy", v}});
  j["all_formats_model"] = std::move(am);
  oj ot = oj::array();
  for (const auto& [k, v] : overall_task)
    ot.push_back(
        {{"task", to_string(std::get<0>(k))}, {"pseudo", std::get<1>(k)}, {"accuracy", v}});
  j["overall_task"] = std::move(ot);
  oj ov = oj::object();
  for (const auto& [pseudo, v] : overall) ov[pseudo_name(pseudo)] = v;
  j["overall"] = std::move(ov);

  oj tok = oj::object();
  for (const auto& [f, v] : mean_input_tokens) tok[std::string(to_string(f))] = v;
  j["mean_input_tokens"] = std::move(tok);

  oj best = oj::object();
  for (const auto& [model, b] : best_format) {
    oj tied = oj::array();
    for (Format f : b.tied) tied.push_back(to_string(f));
    best[model] = {{"format", to_string(b.format)}, {"mean", b.mean}, {"tie", b.tie},
                   {"tied", std::move(tied)}};
  }
  j["best_format"] = std::move(best);

  oj bd = oj::array();
  for (const BreakdownRow& r : breakdowns)
    bd.push_back({{"dimension", r.dimension},
                  {"task", to_string(r.task)},
                  {"model", r.model},
                  {"format", to_string(r.format)},
                  {"pseudo", r.pseudo},
                  {"bin", r.bin},
                  {"n", r.n},
                  {"correct", r.correct},
                  {"accuracy", r.n ? double(r.correct) / double(r.n) : 0.0}});
  j["breakdowns"] = std::move(bd);
  oj pr = oj::array();
  for (const PairRow& r : pairs)
    pr.push_back({{"dimension", r.dimension},
                  {"task", to_string(r.task)},
                  {"model", r.model},
                  {"format", to_string(r.format)},
                  {"pseudo", r.pseudo},
                  {"truth", r.truth},
                  {"predicted", r.predicted},
                  {"count", r.count}});
  j["pairs"] = std::move(pr);
  return j;
}

std::string SummaryTable::digest() const {
  std::string out;
  out += fmt::format("records: {} (errors: {})\n", total_records, total_errors);

  auto both = [&](auto lookup) {
    std::string line;
    for (bool pseudo : {false, true}) {
      std::optional<double> v = lookup(pseudo);
      if (!v) continue;
      if (!line.empty()) line += " / ";
      line += fmt::format("{:.3f} {}", *v, pseudo_name(pseudo));
    }
    return line;
  };
  auto find = [](const auto& map, const auto& key) -> std::optional<double> {
    auto it = map.find(key);
    if (it == map.end()) return std::nullopt;
    return it->second;
  };

  out += "Overall Score: " + both([&](bool p) { return find(overall, p); }) + "\n";
  out += "Format Overall:\n";
  for (Format f : kAllFormats) {
    std::string line = both([&](bool p) { return find(format_overall, std::make_tuple(f, p)); });
    if (!line.empty()) out += fmt::format("  {:<16} {}\n", to_string(f), line);
  }
  out += "Best format per model:\n";
  for (const auto& [model, b] : best_format) {
    out += fmt::format("  {:<24} {} (mean {:.4f})", model, to_string(b.format), b.mean);
    if (b.tie) {
      out += " tie:";
      for (Format f : b.tied) out += fmt::format(" {}", to_string(f));
    }
    out += "\n";
  }
  out += "Mean input tokens:\n";
  for (Format f : kAllFormats)
    if (auto it = mean_input_tokens.find(f); it != mean_input_tokens.end())
      out += fmt::format("  {:<16} {:.1f}\n", to_string(f), it->second);

  static constexpr std::array<Format, 5> kOrder = {Format::ListOfEdges, Format::StructuredYAML,
                                                   Format::StructuredJSON, Format::RDFTurtle,
                                                   Format::JSONLD};
  std::string verdict = "holds";
  for (Format f : kOrder)
    if (!mean_input_tokens.count(f)) verdict = "not checked (formats missing)";
  if (verdict == "holds")
    for (std::size_t i = 1; i < kOrder.size(); ++i)
      if (!(mean_input_tokens.at(kOrder[i - 1]) < mean_input_tokens.at(kOrder[i])))
        verdict = "violated";
  out += "Token ordering ListOfEdges < StructuredYAML < StructuredJSON < RDFTurtle < JSONLD: " +
         verdict + "\n";
  return out;
}

}  // namespace kgbench
