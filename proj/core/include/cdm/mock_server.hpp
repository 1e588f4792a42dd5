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

#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "cdm/language_model.hpp"

namespace cdm {

// Loopback server speaking the remote protocol on top of a local model.
// Unknown context tokens and model names are rejected with 4xx errors;
// requests that arrive while stopping get 503 (retriable).
class MockServer {
 public:
  MockServer(LanguageModelHandle model, std::string model_name);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  // Binds 127.0.0.1:`port` (0 picks a free port) and serves on a background
  // thread. Throws BindError when the port is taken.
  void start(int port = 0);
  // Stops accepting; in-flight requests complete. Idempotent.
  void stop();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

  int port() const { return port_; }
  std::string base_url() const;
  bool running() const { return running_.load(); }
  std::size_t requests_served() const { return served_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  LanguageModelHandle model_;
  std::string model_name_;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> served_{0};
  std::thread thread_;
};

}  // namespace cdm
