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

#include "cdm/mock_server.hpp"

#include <cmath>
#include <condition_variable>
#include <mutex>

#include "cdm/error.hpp"
#include "cdm/hashing.hpp"
#include "httplib.h"
#include "json.hpp"

namespace cdm {
namespace {

constexpr std::size_t kServerThreads = 32;

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = {{"code", code}, {"message", message}};
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

}  // namespace

struct MockServer::Impl {
  httplib::Server server;
  std::mutex mu;
  std::condition_variable cv;
};

MockServer::MockServer(LanguageModelHandle model, std::string model_name)
    : impl_(std::make_unique<Impl>()), model_(std::move(model)), model_name_(std::move(model_name)) {
  if (!model_) throw ArgumentError("mock server requires a model");
  auto& svr = impl_->server;
  svr.new_task_queue = [] { return new httplib::ThreadPool(kServerThreads); };
  svr.set_keep_alive_timeout(2);
  svr.set_tcp_nodelay(true);
  // httplib's default sets SO_REUSEPORT, which lets a second server share a
  // taken port silently.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  svr.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    ++served_;
    nlohmann::ordered_json j;
    j["model"] = model_name_;
    j["status"] = stopping_.load() ? "stopping" : "ok";
    j["tokenizer"] = to_hex(model_->vocabulary().fingerprint());
    j["fim"] = model_->fim_capable();
    res.set_content(j.dump(), "application/json");
  });

  svr.Post("/v1/next_logprobs", [this](const httplib::Request& req, httplib::Response& res) {
    ++served_;
    if (stopping_.load()) {
      res.set_header("Retry-After", "1");
      send_error(res, 503, "unavailable", "server is shutting down");
      return;
    }
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      send_error(res, 400, "bad_request", "request body is not JSON");
      return;
    }
    if (!body.is_object() || !body.contains("model") || !body["model"].is_string()) {
      send_error(res, 400, "bad_request", "missing \"model\"");
      return;
    }
    if (body["model"].get<std::string>() != model_name_) {
      send_error(res, 404, "unknown_model", "model '" + body["model"].get<std::string>() + "' is not served here");
      return;
    }
    if (body.contains("log_base") && body["log_base"] != "e") {
      send_error(res, 400, "bad_request", "only log_base \"e\" is supported");
      return;
    }
    const auto& vocab = model_->vocabulary();
    if (!body.contains("context") || !body["context"].is_array() || body["context"].empty()) {
      send_error(res, 400, "bad_request", "\"context\" must be a non-empty array");
      return;
    }
    std::vector<TokenId> context;
    for (const auto& t : body["context"]) {
      if (!t.is_string()) {
        send_error(res, 400, "bad_request", "context entries must be strings");
        return;
      }
      const auto id = vocab.find(t.get<std::string>());
      if (!id) {
        send_error(res, 400, "unknown_token", "unknown context token '" + t.get<std::string>() + "'");
        return;
      }
      context.push_back(*id);
    }
    // Leading start markers are equivalent to an empty context.
    std::size_t skip = 0;
    while (skip < context.size() && context[skip] == Vocabulary::kBos) ++skip;
    std::vector<TokenId> candidates;
    const bool have_candidates = body.contains("candidates") && !body["candidates"].is_null();
    if (have_candidates) {
      if (!body["candidates"].is_array() || body["candidates"].empty()) {
        send_error(res, 400, "bad_request", "\"candidates\" must be a non-empty array or null");
        return;
      }
      for (const auto& t : body["candidates"]) {
        const auto id = t.is_string() ? vocab.find(t.get<std::string>()) : std::nullopt;
        if (!id) {
          send_error(res, 400, "unknown_token", "unknown candidate token " + t.dump());
          return;
        }
        candidates.push_back(*id);
      }
    } else {
      for (TokenId t = 0; t < vocab.size(); ++t) candidates.push_back(t);
    }
    const auto lps = model_->next_logprobs(std::span<const TokenId>(context).subspan(skip));
    nlohmann::ordered_json out;
    nlohmann::ordered_json map = nlohmann::ordered_json::object();
    double mass = 0.0;
    for (TokenId t : candidates) {
      const double lp = std::isfinite(lps[t]) ? lps[t] : kLogProbFloor;
      map[vocab.token(t)] = lp;
      mass += std::exp(lp);
    }
    out["logprobs"] = std::move(map);
    out["coverage"] = mass;
    if (body.contains("nonce")) out["nonce"] = body["nonce"];
    res.set_content(out.dump(), "application/json");
  });
}

MockServer::~MockServer() { stop(); }

void MockServer::start(int port) {
  if (running_.load()) throw ArgumentError("mock server is already running");
  auto& svr = impl_->server;
  if (port == 0) {
    port_ = svr.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw BindError("could not bind a free loopback port");
  } else {
    if (!svr.bind_to_port("127.0.0.1", port)) {
      throw BindError("could not bind 127.0.0.1:" + std::to_string(port) + " (port in use?)");
    }
    port_ = port;
  }
  stopping_ = false;
  running_ = true;
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void MockServer::stop() {
  {
    std::lock_guard lock(impl_->mu);
    if (!running_.load() || stopping_.load()) return;
    stopping_ = true;
  }
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
  {
    std::lock_guard lock(impl_->mu);
    running_ = false;
  }
  impl_->cv.notify_all();
}

void MockServer::wait() {
  std::unique_lock lock(impl_->mu);
  impl_->cv.wait(lock, [this] { return !running_.load(); });
}

std::string MockServer::base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

}  // namespace cdm
