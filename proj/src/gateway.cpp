#include "kgbench/gateway.hpp"

#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "kgbench/textualize.hpp"
#include "kgbench/util.hpp"

namespace kgbench {

std::string_view to_string(Dialect d) {
  switch (d) {
    case Dialect::GenericChat:
      return "generic-chat";
    case Dialect::Mock:
      return "mock";
    case Dialect::ReplayDir:
      return "replay-dir";
  }
  return "?";
}

Dialect dialect_from_string(std::string_view s) {
  if (s == "generic-chat") return Dialect::GenericChat;
  if (s == "mock") return Dialect::Mock;
  if (s == "replay-dir") return Dialect::ReplayDir;
  throw ConfigError("unknown endpoint dialect '" + std::string(s) + "'");
}

ModelEndpoint ModelEndpoint::from_json(const nlohmann::json& j) {
  ModelEndpoint ep;
  ep.model_id = j.at("model_id").get<std::string>();
  ep.wire_model = j.value("wire_model", std::string());
  ep.dialect = dialect_from_string(j.value("dialect", std::string("generic-chat")));
  ep.base_url = j.value("base_url", std::string());
  ep.api_key_env = j.value("api_key_env", std::string());
  ep.temperature = j.value("temperature", 0.0);
  ep.max_tokens = j.value("max_tokens", 1024);
  ep.timeout = std::chrono::milliseconds(j.value("timeout_ms", 120000));
  ep.max_retries = j.value("max_retries", 4);
  ep.backoff_initial = std::chrono::milliseconds(j.value("backoff_initial_ms", 1000));
  ep.backoff_max = std::chrono::milliseconds(j.value("backoff_max_ms", 30000));
  ep.max_in_flight = j.value("max_in_flight", std::size_t{4});
  if (j.contains("canned"))
    for (auto& [k, v] : j.at("canned").items()) ep.canned[k] = v.get<std::string>();
  ep.echo_gold = j.value("echo_gold", false);
  if (j.contains("default_response"))
    ep.default_response = j.at("default_response").get<std::string>();
  ep.replay_dir = j.value("replay_dir", std::string());

  if (ep.model_id.empty()) throw ConfigError("endpoint: empty model_id");
  if (ep.dialect == Dialect::GenericChat && ep.base_url.empty())
    throw ConfigError("endpoint " + ep.model_id + ": base_url is required");
  if (ep.dialect == Dialect::ReplayDir && ep.replay_dir.empty())
    throw ConfigError("endpoint " + ep.model_id + ": replay_dir is required");
  if (ep.max_in_flight < 1 || ep.max_in_flight > 256)
    throw ConfigError("endpoint " + ep.model_id + ": max_in_flight must be in 1..256");
  if (ep.max_retries < 0) throw ConfigError("endpoint " + ep.model_id + ": max_retries < 0");
  return ep;
}

namespace {

// ---- mock -------------------------------------------------------------------

class MockBackend : public Backend {
 public:
  explicit MockBackend(ModelEndpoint ep) : ep_(std::move(ep)) {}

  CompletionResult call(const CompletionRequest& req) override {
    CompletionResult r;
    auto it = ep_.canned.find(sha256_hex(req.prompt));
    if (it != ep_.canned.end())
      r.text = it->second;
    else if (ep_.echo_gold)
      r.text = "Answer: " + req.gold_hint;
    else if (ep_.default_response)
      r.text = *ep_.default_response;
    else
      throw GatewayError("mock " + ep_.model_id + ": no canned response for prompt", false);
    r.input_tokens = static_cast<std::int64_t>(approx_token_count(req.prompt));
    r.output_tokens = static_cast<std::int64_t>(approx_token_count(r.text));
    return r;
  }

 private:
  ModelEndpoint ep_;
};

// ---- replay -----------------------------------------------------------------

class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(ModelEndpoint ep) : ep_(std::move(ep)) {}

  CompletionResult call(const CompletionRequest& req) override {
    auto path = ep_.replay_dir / (sha256_hex(req.prompt) + ".txt");
    if (!std::filesystem::exists(path))
      throw GatewayError("replay " + ep_.model_id + ": no recording " + path.string(), false);
    CompletionResult r;
    r.text = read_file(path);
    r.input_tokens = static_cast<std::int64_t>(approx_token_count(req.prompt));
    r.output_tokens = static_cast<std::int64_t>(approx_token_count(r.text));
    return r;
  }

 private:
  ModelEndpoint ep_;
};

// ---- OpenAI-style chat ------------------------------------------------------

class ChatBackend : public Backend {
 public:
  explicit ChatBackend(ModelEndpoint ep) : ep_(std::move(ep)) {
    // base_url = scheme://host[:port][/prefix]
    auto scheme_end = ep_.base_url.find("://");
    if (scheme_end == std::string::npos)
      throw ConfigError("endpoint " + ep_.model_id + ": base_url needs a scheme");
    auto path_start = ep_.base_url.find('/', scheme_end + 3);
    host_ = ep_.base_url.substr(0, path_start);
    prefix_ = path_start == std::string::npos ? "" : ep_.base_url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  CompletionResult call(const CompletionRequest& req) override {
    httplib::Headers headers;
    if (!ep_.api_key_env.empty()) {
      const char* key = std::getenv(ep_.api_key_env.c_str());
      if (!key || !*key)
        throw GatewayError("endpoint " + ep_.model_id + ": environment variable " +
                               ep_.api_key_env + " is not set",
                           true);
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    nlohmann::json body = {
        {"model", ep_.wire_model.empty() ? ep_.model_id : ep_.wire_model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", req.prompt}}})},
        {"temperature", ep_.temperature},
        {"max_tokens", ep_.max_tokens}};
    const std::string payload = body.dump();

    httplib::Client cli(host_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(ep_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(ep_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());

    for (int attempt = 0;; ++attempt) {
      auto res = cli.Post(prefix_ + "/chat/completions", headers, payload, "application/json");
      std::string why;
      std::chrono::milliseconds wait = backoff(attempt);
      if (!res) {
        why = "transport error: " + httplib::to_string(res.error());
      } else if (res->status == 200) {
        CompletionResult r = parse(res->body, req);
        r.retries = attempt;
        return r;
      } else if (res->status == 401 || res->status == 403) {
        throw GatewayError("endpoint " + ep_.model_id + ": authentication failed (HTTP " +
                               std::to_string(res->status) + ")",
                           true);
      } else if (res->status == 408 || res->status == 429 || res->status >= 500) {
        why = "HTTP " + std::to_string(res->status);
        if (res->has_header("Retry-After")) {
          try {
            auto s = std::chrono::milliseconds(
                static_cast<long>(std::stod(res->get_header_value("Retry-After")) * 1000));
            wait = std::min(std::max(wait, s), ep_.backoff_max);
          } catch (const std::exception&) {
            // HTTP-date form; keep the computed backoff.
          }
        }
      } else {
        throw GatewayError("endpoint " + ep_.model_id + ": HTTP " +
                               std::to_string(res->status) + ": " + res->body.substr(0, 200),
                           false);
      }
      if (attempt >= ep_.max_retries)
        throw GatewayError("endpoint " + ep_.model_id + ": giving up after " +
                               std::to_string(attempt) + " retries (" + why + ")",
                           false);
      spdlog::warn("{}: {} - retry {} in {} ms", ep_.model_id, why, attempt + 1, wait.count());
      std::this_thread::sleep_for(wait);
    }
  }

 private:
  std::chrono::milliseconds backoff(int attempt) const {
    auto d = ep_.backoff_initial;
    for (int i = 0; i < attempt && d < ep_.backoff_max; ++i) d *= 2;
    return std::min(d, ep_.backoff_max);
  }

  CompletionResult parse(const std::string& text, const CompletionRequest& req) const {
    CompletionResult r;
    try {
      auto j = nlohmann::json::parse(text);
      const auto& choice = j.at("choices").at(0);
      const auto& content = choice.at("message").at("content");
      if (!content.is_string())
        throw GatewayError("endpoint " + ep_.model_id + ": response has no text", false);
      r.text = content.get<std::string>();
      r.truncated = choice.value("finish_reason", std::string()) == "length";
      if (j.contains("usage") && j["usage"].is_object()) {
        r.input_tokens = j["usage"].value("prompt_tokens", std::int64_t{-1});
        r.output_tokens = j["usage"].value("completion_tokens", std::int64_t{-1});
      } else {
        r.input_tokens = r.output_tokens = -1;
      }
    } catch (const nlohmann::json::exception& e) {
      throw GatewayError("endpoint " + ep_.model_id + ": malformed response: " + e.what(), false);
    }
    if (r.input_tokens < 0) r.input_tokens = static_cast<std::int64_t>(approx_token_count(req.prompt));
    if (r.output_tokens < 0) r.output_tokens = static_cast<std::int64_t>(approx_token_count(r.text));
    if (r.truncated) spdlog::warn("{}: response truncated at max_tokens", ep_.model_id);
    return r;
  }

  ModelEndpoint ep_;
  std::string host_;
  std::string prefix_;
};

}  // namespace

std::unique_ptr<Backend> make_backend(const ModelEndpoint& ep) {
  switch (ep.dialect) {
    case Dialect::GenericChat:
      return std::make_unique<ChatBackend>(ep);
    case Dialect::Mock:
      return std::make_unique<MockBackend>(ep);
    case Dialect::ReplayDir:
      return std::make_unique<ReplayBackend>(ep);
  }
  throw ConfigError("unknown dialect");
}

// ---- gateway ----------------------------------------------------------------

struct Gateway::Slot {
  explicit Slot(ModelEndpoint e)
      : ep(std::move(e)),
        backend(make_backend(ep)),
        in_flight(static_cast<std::ptrdiff_t>(ep.max_in_flight)) {}
  ModelEndpoint ep;
  std::unique_ptr<Backend> backend;
  std::counting_semaphore<256> in_flight;
  std::atomic<bool> disabled{false};
  std::string disabled_reason;
  std::mutex reason_mu;
};

Gateway::Gateway(std::vector<ModelEndpoint> endpoints) {
  for (auto& ep : endpoints) {
    std::string id = ep.model_id;
    if (slots_.count(id)) throw ConfigError("duplicate model_id '" + id + "'");
    slots_.emplace(id, std::make_unique<Slot>(std::move(ep)));
  }
}

Gateway::~Gateway() = default;

const ModelEndpoint& Gateway::endpoint(const std::string& model_id) const {
  auto it = slots_.find(model_id);
  if (it == slots_.end()) throw ConfigError("unknown model '" + model_id + "'");
  return it->second->ep;
}

std::vector<std::string> Gateway::model_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, slot] : slots_) out.push_back(id);
  return out;
}

CompletionResult Gateway::complete(const std::string& model_id, const CompletionRequest& req) {
  auto it = slots_.find(model_id);
  if (it == slots_.end()) throw ConfigError("unknown model '" + model_id + "'");
  Slot& slot = *it->second;
  if (slot.disabled) {
    std::lock_guard lock(slot.reason_mu);
    throw GatewayError(slot.disabled_reason, true);
  }
  slot.in_flight.acquire();
  struct Release {
    Slot& s;
    ~Release() { s.in_flight.release(); }
  } release{slot};
  ++calls_;
  const auto start = std::chrono::steady_clock::now();
  try {
    CompletionResult r = slot.backend->call(req);
    r.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
  } catch (const GatewayError& e) {
    if (e.fatal()) {
      std::lock_guard lock(slot.reason_mu);
      slot.disabled_reason = e.what();
      slot.disabled = true;
    }
    throw;
  }
}

// ---- cache ------------------------------------------------------------------

std::string ResponseCache::key(const ModelEndpoint& ep, const std::string& prompt) {
  nlohmann::json j = {{"model_id", ep.model_id},
                      {"prompt", prompt},
                      {"temperature", ep.temperature},
                      {"max_tokens", ep.max_tokens}};
  return sha256_hex(j.dump());
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

bool ResponseCache::contains(const std::string& key) const {
  return std::filesystem::exists(path_for(key));
}

std::optional<CompletionResult> ResponseCache::get(const std::string& key) const {
  auto path = path_for(key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    auto j = nlohmann::json::parse(read_file(path));
    const auto& resp = j.at("response");
    CompletionResult r;
    r.text = resp.at("text").get<std::string>();
    r.input_tokens = resp.at("input_tokens").get<std::int64_t>();
    r.output_tokens = resp.at("output_tokens").get<std::int64_t>();
    r.truncated = resp.value("truncated", false);
    r.retries = resp.value("retries", 0);
    r.latency_ms = resp.value("latency_ms", 0.0);
    r.cache_hit = true;
    return r;
  } catch (const std::exception& e) {
    // A damaged entry behaves like a miss and gets overwritten.
    spdlog::warn("cache: ignoring unreadable entry {}: {}", path.string(), e.what());
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& key, const ModelEndpoint& ep,
                        const std::string& prompt, const CompletionResult& r) const {
  nlohmann::ordered_json j;
  j["key"] = key;
  j["request"] = {{"model_id", ep.model_id},
                  {"prompt_sha256", sha256_hex(prompt)},
                  {"temperature", ep.temperature},
                  {"max_tokens", ep.max_tokens}};
  j["response"] = {{"text", r.text},
                   {"input_tokens", r.input_tokens},
                   {"output_tokens", r.output_tokens},
                   {"truncated", r.truncated},
                   {"retries", r.retries},
                   {"latency_ms", r.latency_ms}};
  j["stored_at"] = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  write_file_atomic(path_for(key), j.dump(2));
}

CompletionResult cached_complete(const ResponseCache& cache, Gateway& gateway,
                                 const std::string& model_id, const CompletionRequest& req) {
  const ModelEndpoint& ep = gateway.endpoint(model_id);
  const std::string key = ResponseCache::key(ep, req.prompt);
  if (auto hit = cache.get(key)) return *hit;
  CompletionResult r = gateway.complete(model_id, req);
  cache.put(key, ep, req.prompt, r);
  return r;
}

}  // namespace kgbench
