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

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdm/language_model.hpp"

namespace cdm {

// Environment variable holding the bearer token for remote endpoints.
inline constexpr const char* kRemoteTokenEnv = "CDM_REMOTE_TOKEN";

struct RemoteEndpointConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8080
  std::string model;
  std::string auth_token;  // never serialized
  double timeout_seconds = 10.0;
  int max_retries = 2;
  std::size_t batch_size = 8;  // maximum in-flight requests

  // auth_token is read from kRemoteTokenEnv.
  static RemoteEndpointConfig from_env(std::string base_url, std::string model);
  void validate() const;
  // JSON without the auth token.
  std::string to_json() const;
};

struct RemoteLogprobs {
  std::map<std::string, double> logprobs;  // natural log, renormalized
  double coverage = 1.0;                   // returned mass before renormalizing
  std::optional<std::string> warning;
};

struct RemoteHealth {
  std::string model;
  std::string status;
  std::string tokenizer;  // vocabulary fingerprint, hex
  bool fim = false;
};

// Thread-safe client for the next-token log-probability protocol:
//   POST /v1/next_logprobs {"model", "context", "candidates", "log_base"}
//     -> {"logprobs": {token: number}, "coverage": number}
//   GET  /v1/health -> {"model", "status"}
class RemoteClient {
 public:
  explicit RemoteClient(RemoteEndpointConfig config);
  ~RemoteClient();
  RemoteClient(const RemoteClient&) = delete;
  RemoteClient& operator=(const RemoteClient&) = delete;

  // Throws ArgumentError on an empty context, TransportError after retries,
  // StatusError on non-2xx, ProtocolError naming the offending field.
  RemoteLogprobs next_logprobs(std::span<const std::string> context,
                               const std::vector<std::string>* candidates = nullptr,
                               const std::string* nonce = nullptr,
                               std::string* echoed_nonce = nullptr) const;
  RemoteHealth health() const;

  const RemoteEndpointConfig& config() const { return config_; }
  // Requests issued, including retries.
  std::size_t request_count() const;

 private:
  struct Impl;
  RemoteEndpointConfig config_;
  std::unique_ptr<Impl> impl_;
};

RemoteLogprobs remote_next_logprobs(const RemoteEndpointConfig& config,
                                    std::span<const std::string> context,
                                    const std::vector<std::string>* candidates = nullptr);

// LanguageModel backed by a remote endpoint. The vocabulary is supplied
// locally and must match the server's tokenizer fingerprint.
class RemoteLanguageModel final : public LanguageModel {
 public:
  // Checks the health endpoint; throws ConfigurationError on a tokenizer
  // or model identity mismatch.
  RemoteLanguageModel(RemoteEndpointConfig config, std::shared_ptr<const Vocabulary> vocab);

  std::vector<double> next_logprobs(std::span<const TokenId> context) const override;
  const Vocabulary& vocabulary() const override { return *vocab_; }
  std::string identity() const override { return "remote:" + client_.config().model; }
  BackendKind kind() const override { return BackendKind::kRemote; }
  bool fim_capable() const override { return fim_; }

  const RemoteClient& client() const { return client_; }

 private:
  RemoteClient client_;
  std::shared_ptr<const Vocabulary> vocab_;
  bool fim_ = false;
};

}  // namespace cdm
