// Copyright 2026 The personaact Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <memory>
#include <mutex>
#include <string>

#include "httplib.h"
#include "personaact/error.hpp"
#include "personaact/policy.hpp"
#include "personaact/policy_wire.hpp"

namespace personaact {

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 80;
  std::string path = "/";
  double timeout_seconds = 30.0;

  // "http://host:port/path"; scheme optional, path defaults to "/".
  static Endpoint parse(const std::string& url) {
    Endpoint e;
    std::string rest = url;
    if (auto p = rest.find("://"); p != std::string::npos) rest = rest.substr(p + 3);
    const auto slash = rest.find('/');
    std::string authority = rest.substr(0, slash);
    e.path = slash == std::string::npos ? "/" : rest.substr(slash);
    if (auto colon = authority.rfind(':'); colon != std::string::npos) {
      try {
        e.port = std::stoi(authority.substr(colon + 1));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kConfigInvalid, "bad port in endpoint " + url);
      }
      authority.resize(colon);
    }
    if (authority.empty()) throw Error(ErrorCode::kConfigInvalid, "bad endpoint " + url);
    e.host = authority;
    return e;
  }

  std::unique_ptr<httplib::Client> client() const {
    auto c = std::make_unique<httplib::Client>(host, port);
    const auto secs = static_cast<time_t>(timeout_seconds);
    const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
    c->set_connection_timeout(secs, usecs);
    c->set_read_timeout(secs, usecs);
    c->set_write_timeout(secs, usecs);
    return c;
  }
};

// Forwards predictions to a remote model. Construction health-checks the
// endpoint (GET <path>/health, any 2xx); afterwards every transport or
// schema failure degrades to the persona's median duration with no
// discrete actions, format reward 0, and an incident note.
class ExternalPolicy final : public Policy {
 public:
  ExternalPolicy(std::string persona_id, Endpoint endpoint)
      : persona_id_(std::move(persona_id)), endpoint_(std::move(endpoint)) {
    client_ = endpoint_.client();
    std::string health = endpoint_.path;
    if (health.empty() || health.back() != '/') health += '/';
    health += "health";
    auto res = client_->Get(health);
    if (!res || res->status / 100 != 2) {
      throw Error(ErrorCode::kEndpointUnreachable,
                  "policy endpoint " + endpoint_.host + ":" + std::to_string(endpoint_.port) +
                      " failed its health check");
    }
  }

  const std::string& persona_id() const override { return persona_id_; }
  std::string kind() const override { return "external"; }

  Prediction predict(const PersonaProfile& persona, const Observation& obs, Rng&) const override {
    check_persona(*this, persona);
    const std::string body = policy_request(persona, obs).dump();
    std::string reply;
    std::string failure;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto res = client_->Post(endpoint_.path, body, "application/json");
      if (!res) {
        failure = "transport error: " + httplib::to_string(res.error());
      } else if (res->status / 100 != 2) {
        failure = "HTTP status " + std::to_string(res->status);
      } else {
        reply = res->body;
      }
    }
    Prediction out;
    if (failure.empty()) {
      if (auto parsed = parse_policy_reply(reply)) {
        out.action = *parsed;
        return out;
      }
      failure = "reply failed schema validation";
    }
    out.format_reward = 0;
    out.fallback = true;
    out.incident = failure;
    out.action.watch_duration_seconds = persona.behavioral_stats.duration_stats.median;
    return out;
  }

 private:
  std::string persona_id_;
  Endpoint endpoint_;
  mutable std::mutex mu_;
  std::unique_ptr<httplib::Client> client_;
};

inline std::shared_ptr<const ExternalPolicy> external_policy_adapter(std::string persona_id,
                                                                     Endpoint endpoint) {
  return std::make_shared<const ExternalPolicy>(std::move(persona_id), std::move(endpoint));
}

}  // namespace personaact
