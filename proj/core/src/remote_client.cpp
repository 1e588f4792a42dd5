// Copyright 2026 The CDM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cdm/remote.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "cdm/error.hpp"
#include "cdm/hashing.hpp"
#include "httplib.h"
#include "json.hpp"

namespace cdm {
namespace {

constexpr double kCoverageWarning = 0.99;
constexpr std::size_t kExcerptLength = 200;

std::string excerpt(const std::string& body) {
  return body.size() <= kExcerptLength ? body : body.substr(0, kExcerptLength) + "...";
}

bool retriable_status(int status) { return status == 429 || status >= 500; }

double log_base_factor(const std::string& base) {
  if (base == "e") return 1.0;
  if (base == "2") return std::log(2.0);
  if (base == "10") return std::log(10.0);
  throw ProtocolError("unsupported log_base '" + base + "'", "log_base");
}

}  // namespace

RemoteEndpointConfig RemoteEndpointConfig::from_env(std::string base_url, std::string model) {
  RemoteEndpointConfig c;
  c.base_url = std::move(base_url);
  c.model = std::move(model);
  if (const char* token = std::getenv(kRemoteTokenEnv)) c.auth_token = token;
  return c;
}

void RemoteEndpointConfig::validate() const {
  if (base_url.empty()) throw ConfigurationError("remote endpoint needs a base URL");
  if (model.empty()) throw ConfigurationError("remote endpoint needs a model name");
  if (!(timeout_seconds > 0.0)) throw ConfigurationError("remote timeout must be positive");
  if (max_retries < 0) throw ConfigurationError("remote max_retries must be non-negative");
  if (batch_size < 1) throw ConfigurationError("remote batch_size must be at least 1");
}

std::string RemoteEndpointConfig::to_json() const {
  nlohmann::ordered_json j;
  j["base_url"] = base_url;
  j["model"] = model;
  j["timeout_seconds"] = timeout_seconds;
  j["max_retries"] = max_retries;
  j["batch_size"] = batch_size;
  j["auth"] = auth_token.empty() ? "none" : "env:" + std::string(kRemoteTokenEnv);
  return j.dump();
}

struct RemoteClient::Impl {
  explicit Impl(const RemoteEndpointConfig& c) : config(c) {}

  std::unique_ptr<httplib::Client> make_client() const {
    auto cli = std::make_unique<httplib::Client>(config.base_url);
    if (!cli->is_valid()) throw ConfigurationError("invalid remote base URL '" + config.base_url + "'");
    const auto usec = static_cast<long long>(config.timeout_seconds * 1e6);
    const auto sec = static_cast<time_t>(usec / 1000000);
    const auto rem = static_cast<time_t>(usec % 1000000);
    cli->set_connection_timeout(sec, rem);
    cli->set_read_timeout(sec, rem);
    cli->set_write_timeout(sec, rem);
    cli->set_keep_alive(true);
    cli->set_tcp_nodelay(true);
    if (!config.auth_token.empty()) cli->set_bearer_token_auth(config.auth_token);
    return cli;
  }

  // At most batch_size clients exist; each is used by one request at a time.
  std::unique_ptr<httplib::Client> acquire() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return !idle.empty() || created < config.batch_size; });
    if (!idle.empty()) {
      auto c = std::move(idle.back());
      idle.pop_back();
      return c;
    }
    ++created;
    lock.unlock();
    try {
      return make_client();
    } catch (...) {
      std::lock_guard relock(mu);
      --created;
      cv.notify_one();
      throw;
    }
  }

  void release(std::unique_ptr<httplib::Client> c) {
    std::lock_guard lock(mu);
    idle.push_back(std::move(c));
    cv.notify_one();
  }

  // Returns the successful response body; retries transport failures and
  // retriable statuses with exponential backoff.
  std::string call(const std::string& method, const std::string& path, const std::string& body) {
    auto cli = acquire();
    struct Guard {
      Impl* self;
      std::unique_ptr<httplib::Client>* c;
      ~Guard() { self->release(std::move(*c)); }
    } guard{this, &cli};
    std::string last_error;
    int attempts = 0;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(20 << std::min(attempt, 6)));
      ++attempts;
      ++requests;
      auto res = method == "GET" ? cli->Get(path) : cli->Post(path, body, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 200 && res->status < 300) return res->body;
      if (retriable_status(res->status) && attempt < config.max_retries) {
        last_error = "status " + std::to_string(res->status);
        continue;
      }
      throw StatusError(method + " " + path + " returned status " + std::to_string(res->status), res->status,
                        excerpt(res->body));
    }
    throw TransportError(method + " " + path + " failed after " + std::to_string(attempts) +
                             " attempts: " + last_error,
                         attempts);
  }

  RemoteEndpointConfig config;
  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::unique_ptr<httplib::Client>> idle;
  std::size_t created = 0;
  std::atomic<std::size_t> requests{0};
};

RemoteClient::RemoteClient(RemoteEndpointConfig config) : config_(std::move(config)) {
  config_.validate();
  impl_ = std::make_unique<Impl>(config_);
}

RemoteClient::~RemoteClient() = default;

std::size_t RemoteClient::request_count() const { return impl_->requests.load(); }

RemoteLogprobs RemoteClient::next_logprobs(std::span<const std::string> context,
                                           const std::vector<std::string>* candidates,
                                           const std::string* nonce, std::string* echoed_nonce) const {
  if (context.empty()) throw ArgumentError("remote next_logprobs requires a non-empty context");
  if (candidates != nullptr && candidates->empty()) throw ArgumentError("candidate list is empty");
  nlohmann::ordered_json req;
  req["model"] = config_.model;
  req["context"] = std::vector<std::string>(context.begin(), context.end());
  req["candidates"] = candidates != nullptr ? nlohmann::ordered_json(*candidates) : nlohmann::ordered_json(nullptr);
  req["log_base"] = "e";
  if (nonce != nullptr) req["nonce"] = *nonce;
  const std::string body = impl_->call("POST", "/v1/next_logprobs", req.dump());

  nlohmann::json res;
  try {
    res = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("response is not JSON: " + excerpt(body), "<body>");
  }
  if (!res.is_object()) throw ProtocolError("response is not a JSON object", "<body>");
  if (!res.contains("logprobs")) throw ProtocolError("response is missing \"logprobs\"", "logprobs");
  const auto& lps = res["logprobs"];
  if (!lps.is_object() || lps.empty()) throw ProtocolError("\"logprobs\" must be a non-empty object", "logprobs");
  if (res.contains("coverage") && !res["coverage"].is_number()) {
    throw ProtocolError("\"coverage\" must be a number", "coverage");
  }
  double factor = 1.0;
  if (res.contains("log_base")) {
    if (!res["log_base"].is_string()) throw ProtocolError("\"log_base\" must be a string", "log_base");
    factor = log_base_factor(res["log_base"].get<std::string>());
  }
  if (nonce != nullptr) {
    if (!res.contains("nonce") || !res["nonce"].is_string()) {
      throw ProtocolError("response does not echo the request nonce", "nonce");
    }
    if (echoed_nonce != nullptr) *echoed_nonce = res["nonce"].get<std::string>();
  }

  RemoteLogprobs out;
  std::vector<double> values;
  for (const auto& [tok, v] : lps.items()) {
    if (!v.is_number()) throw ProtocolError("logprob for '" + tok + "' is not a number", "logprobs." + tok);
    const double lp = v.get<double>() * factor;
    if (!(lp <= 1e-9) || std::isnan(lp)) {
      throw ProtocolError("logprob for '" + tok + "' is not a log-probability", "logprobs." + tok);
    }
    out.logprobs[tok] = lp;
    values.push_back(lp);
  }
  if (candidates != nullptr) {
    for (const auto& c : *candidates) {
      if (out.logprobs.count(c) == 0U) throw ProtocolError("candidate '" + c + "' missing from response", "logprobs." + c);
    }
  }
  const double lse = logsumexp(values);
  out.coverage = std::exp(lse);
  for (auto& [tok, lp] : out.logprobs) lp -= lse;
  if (out.coverage < kCoverageWarning) {
    out.warning = "returned probability mass " + std::to_string(out.coverage) + " is below 0.99; renormalized";
    spdlog::warn("remote {}: {}", config_.model, *out.warning);
  }
  return out;
}

RemoteHealth RemoteClient::health() const {
  const std::string body = impl_->call("GET", "/v1/health", {});
  nlohmann::json res;
  try {
    res = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("health response is not JSON", "<body>");
  }
  RemoteHealth h;
  if (!res.is_object() || !res.contains("model") || !res["model"].is_string()) {
    throw ProtocolError("health response lacks \"model\"", "model");
  }
  if (!res.contains("status") || !res["status"].is_string()) {
    throw ProtocolError("health response lacks \"status\"", "status");
  }
  h.model = res["model"].get<std::string>();
  h.status = res["status"].get<std::string>();
  if (res.contains("tokenizer") && res["tokenizer"].is_string()) h.tokenizer = res["tokenizer"].get<std::string>();
  if (res.contains("fim") && res["fim"].is_boolean()) h.fim = res["fim"].get<bool>();
  return h;
}

RemoteLogprobs remote_next_logprobs(const RemoteEndpointConfig& config, std::span<const std::string> context,
                                    const std::vector<std::string>* candidates) {
  return RemoteClient(config).next_logprobs(context, candidates);
}

RemoteLanguageModel::RemoteLanguageModel(RemoteEndpointConfig config, std::shared_ptr<const Vocabulary> vocab)
    : client_(std::move(config)), vocab_(std::move(vocab)) {
  if (!vocab_) throw ArgumentError("remote model requires a vocabulary");
  const auto h = client_.health();
  if (h.model != client_.config().model) {
    throw ConfigurationError("remote endpoint serves model '" + h.model + "', expected '" +
                             client_.config().model + "'");
  }
  if (h.tokenizer.empty()) {
    throw ConfigurationError("remote endpoint does not declare a tokenizer identity");
  }
  if (h.tokenizer != to_hex(vocab_->fingerprint())) {
    throw ConfigurationError("remote tokenizer " + h.tokenizer + " does not match local vocabulary " +
                             to_hex(vocab_->fingerprint()));
  }
  fim_ = h.fim;
}

std::vector<double> RemoteLanguageModel::next_logprobs(std::span<const TokenId> context) const {
  // The protocol needs a non-empty context; a leading start marker is
  // equivalent to the empty context.
  std::vector<std::string> ctx;
  ctx.reserve(context.size() + 1);
  ctx.emplace_back(vocab_->token(Vocabulary::kBos));
  for (TokenId t : context) ctx.push_back(vocab_->token(t));
  const auto r = client_.next_logprobs(ctx);
  std::vector<double> out(vocab_->size(), kLogProbFloor);
  std::size_t covered = 0;
  for (const auto& [tok, lp] : r.logprobs) {
    const auto id = vocab_->find(tok);
    if (!id) throw ProtocolError("response names token '" + tok + "' outside the vocabulary", "logprobs." + tok);
    out[*id] = std::max(kLogProbFloor, lp);
    ++covered;
  }
  if (covered != vocab_->size()) {
    throw ProtocolError("response covers " + std::to_string(covered) + " of " + std::to_string(vocab_->size()) +
                            " vocabulary tokens",
                        "logprobs");
  }
  return out;
}

}  // namespace cdm
