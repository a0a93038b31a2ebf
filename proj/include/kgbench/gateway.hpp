#pragma once

// Chat-completion client: one OpenAI-style wire dialect, an offline mock, a
// replay directory, and an on-disk response cache.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgbench/error.hpp"

namespace kgbench {

enum class Dialect { GenericChat, Mock, ReplayDir };

std::string_view to_string(Dialect d);
Dialect dialect_from_string(std::string_view s);

struct ModelEndpoint {
  std::string model_id;      // name used in reports and cache keys
  std::string wire_model;    // model name sent to the provider; model_id when empty
  Dialect dialect = Dialect::Mock;

  // GenericChat
  std::string base_url;      // e.g. https://api.example.com/v1
  std::string api_key_env;   // environment variable holding the key; empty for none
  double temperature = 0.0;
  int max_tokens = 1024;
  std::chrono::milliseconds timeout{120000};
  int max_retries = 4;
  std::chrono::milliseconds backoff_initial{1000};
  std::chrono::milliseconds backoff_max{30000};
  std::size_t max_in_flight = 4;

  // Mock: canned responses by sha256(prompt); otherwise echo the gold hint
  // (echo_gold) or fall back to default_response.
  std::map<std::string, std::string> canned;
  bool echo_gold = false;
  std::optional<std::string> default_response;

  // ReplayDir: <replay_dir>/<sha256(prompt)>.txt holds the response text.
  std::filesystem::path replay_dir;

  static ModelEndpoint from_json(const nlohmann::json& j);
};

struct CompletionRequest {
  std::string prompt;
  // Expected answer text; only the echo-gold mock reads it. Not part of the
  // cache key.
  std::string gold_hint;
};

struct CompletionResult {
  std::string text;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  bool truncated = false;     // provider stopped at the output-token limit
  int retries = 0;
  double latency_ms = 0.0;
  bool cache_hit = false;
};

class GatewayError : public Error {
 public:
  GatewayError(const std::string& what, bool fatal) : Error(what), fatal_(fatal) {}
  // Fatal errors (bad credentials) disable the endpoint for the whole run.
  bool fatal() const { return fatal_; }

 private:
  bool fatal_;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResult call(const CompletionRequest& req) = 0;
};

std::unique_ptr<Backend> make_backend(const ModelEndpoint& ep);

// Thread-safe front for several endpoints: bounds in-flight calls per
// endpoint and remembers endpoints that failed authentication.
class Gateway {
 public:
  explicit Gateway(std::vector<ModelEndpoint> endpoints);
  ~Gateway();

  CompletionResult complete(const std::string& model_id, const CompletionRequest& req);

  const ModelEndpoint& endpoint(const std::string& model_id) const;
  std::vector<std::string> model_ids() const;
  // Calls that reached a backend (cache hits never do).
  std::size_t backend_calls() const { return calls_.load(); }

 private:
  struct Slot;
  std::map<std::string, std::unique_ptr<Slot>> slots_;
  std::atomic<std::size_t> calls_{0};
};

// One JSON file per key under dir/<key[0..2]>/<key>.json. Directories are
// created on demand, so deleting the cache mid-run only causes misses.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  // sha256 over model id, prompt, temperature and max_tokens.
  static std::string key(const ModelEndpoint& ep, const std::string& prompt);

  std::optional<CompletionResult> get(const std::string& key) const;
  void put(const std::string& key, const ModelEndpoint& ep, const std::string& prompt,
           const CompletionResult& result) const;
  bool contains(const std::string& key) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;
  std::filesystem::path dir_;
};

// Cache lookup, else a gateway call whose result is stored.
CompletionResult cached_complete(const ResponseCache& cache, Gateway& gateway,
                                 const std::string& model_id, const CompletionRequest& req);

}  // namespace kgbench
