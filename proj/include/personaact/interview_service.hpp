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

// HTTP front end for persona interviews.
//
//   POST /api/interviews                 create, returns the first question
//   GET  /api/interviews/{id}            full session state
//   POST /api/interviews/{id}/answer     submit an answer
//   POST /api/interviews/{id}/finalize   persona profile of a completed interview
//   GET  /api/outlines/default           the default outline
//
// Every session is persisted as <state_dir>/<id>.json after each change and
// reloaded at startup. Errors are {error_code, message}.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "httplib.h"
#include "personaact/error.hpp"
#include "personaact/external_policy.hpp"
#include "personaact/features.hpp"
#include "personaact/interview.hpp"
#include "personaact/io.hpp"
#include "personaact/persona.hpp"

namespace personaact {

// ---------------------------------------------------------------------------
// Remote text services

namespace detail {

inline Json post_json(const Endpoint& endpoint, const Json& body) {
  auto client = endpoint.client();
  auto res = client->Post(endpoint.path, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kEndpointUnreachable, "transport error: " + httplib::to_string(res.error()));
  }
  if (res->status / 100 != 2) {
    throw Error(ErrorCode::kEndpointUnreachable, "HTTP status " + std::to_string(res->status));
  }
  return parse_json(res->body, "text service reply");
}

}  // namespace detail

// Replies {"text": "..."}.
class HttpQuestionGenerator final : public QuestionGenerator {
 public:
  explicit HttpQuestionGenerator(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string generate(const Json& request) override {
    return detail::post_json(endpoint_, request).at("text").get<std::string>();
  }

 private:
  Endpoint endpoint_;
};

// Replies {"summary": "..."}.
class HttpSummarizer final : public Summarizer {
 public:
  explicit HttpSummarizer(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string summarize(const Json& request) override {
    return detail::post_json(endpoint_, request).at("summary").get<std::string>();
  }

 private:
  Endpoint endpoint_;
};

// ---------------------------------------------------------------------------
// Service

inline int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSessionNotFound:
    case ErrorCode::kFileNotFound:
      return 404;
    case ErrorCode::kSessionNotActive:
    case ErrorCode::kNoPendingQuestion:
    case ErrorCode::kSessionNotFinalized:
    case ErrorCode::kSectionExhausted:
      return 409;
    case ErrorCode::kEndpointUnreachable:
    case ErrorCode::kIoError:
      return 500;
    default:
      return 400;
  }
}

inline Json error_body(ErrorCode code, const std::string& message) {
  return Json{{"error_code", code_name(code)}, {"message", message}};
}

struct InterviewServiceConfig {
  std::filesystem::path state_dir;
  // features_ref / outline_ref are resolved inside this directory.
  std::filesystem::path data_dir;
  std::optional<Endpoint> generator_endpoint;
  std::optional<Endpoint> summarizer_endpoint;
  std::function<std::int64_t()> clock;  // wall clock when empty
};

class InterviewService {
 public:
  explicit InterviewService(InterviewServiceConfig config) : config_(std::move(config)) {
    if (config_.state_dir.empty()) {
      throw Error(ErrorCode::kConfigInvalid, "interview service needs a state directory");
    }
    std::error_code ec;
    std::filesystem::create_directories(config_.state_dir, ec);
    if (ec) {
      throw Error(ErrorCode::kIoError, "cannot create " + config_.state_dir.string() + ": " +
                                           ec.message());
    }
    if (config_.generator_endpoint) {
      generator_ = std::make_unique<HttpQuestionGenerator>(*config_.generator_endpoint);
    }
    if (config_.summarizer_endpoint) {
      summarizer_ = std::make_unique<HttpSummarizer>(*config_.summarizer_endpoint);
    }
    load_persisted();
  }

  InterviewService(const InterviewService&) = delete;
  InterviewService& operator=(const InterviewService&) = delete;

  std::size_t session_count() const {
    std::lock_guard<std::mutex> lock(registry_mu_);
    return sessions_.size();
  }

  // {persona_id?, features | features_ref, outline | outline_ref?, seed?}
  Json create(const Json& body) {
    if (!body.is_object()) throw Error(ErrorCode::kParseError, "request body must be an object");
    BehavioralFeatures features = resolve_features(body);
    if (auto it = body.find("persona_id"); it != body.end() && !it->is_null()) {
      if (!it->is_string() || it->get<std::string>() != features.persona_id) {
        throw Error(ErrorCode::kPersonaMismatch,
                    "persona_id does not match the features' persona " + features.persona_id);
      }
    }
    const InterviewOutline outline = resolve_outline(body);
    std::uint64_t seed = 0;
    if (auto it = body.find("seed"); it != body.end() && !it->is_null()) {
      if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
        throw Error(ErrorCode::kParseError, "seed must be a non-negative integer");
      }
      seed = it->get<std::uint64_t>();
    }
    auto session = std::make_shared<Entry>();
    std::lock_guard<std::mutex> session_lock(session->mu);
    std::string id;
    {
      std::lock_guard<std::mutex> lock(registry_mu_);
      id = next_id_locked();
      sessions_[id] = session;
    }
    try {
      auto [st, q] = start_interview(features, outline, seed, options(), id);
      session->state = std::move(st);
      persist(session->state);
      return Json{{"interview_id", id},
                  {"question", question_to_json(q)},
                  {"section", q.section_id}};
    } catch (...) {
      std::lock_guard<std::mutex> lock(registry_mu_);
      sessions_.erase(id);
      throw;
    }
  }

  Json get(const std::string& id) {
    auto session = find(id);
    std::lock_guard<std::mutex> lock(session->mu);
    return state_to_json(session->state);
  }

  // {answer_text}
  Json answer(const std::string& id, const Json& body) {
    if (!body.is_object() || !body.contains("answer_text") || !body["answer_text"].is_string()) {
      throw Error(ErrorCode::kParseError, "answer_text must be a string");
    }
    auto session = find(id);
    std::lock_guard<std::mutex> lock(session->mu);
    InterviewState next = session->state;
    const AnswerOutcome out =
        submit_answer(next, body["answer_text"].get<std::string>(), options());
    persist(next);
    session->state = std::move(next);
    Json reply{{"next", to_string(out.next)}};
    if (out.question) reply["question"] = question_to_json(*out.question);
    if (out.section_id) reply["section"] = *out.section_id;
    return reply;
  }

  Json finalize(const std::string& id) {
    auto session = find(id);
    std::lock_guard<std::mutex> lock(session->mu);
    const PersonaProfile p = synthesize_persona(session->state, options());
    Json doc = persona_to_json(p);
    write_file_atomic(config_.state_dir / (id + ".persona.json"), dump_document(doc));
    return doc;
  }

  static Json default_outline_json() { return outline_to_json(default_outline()); }

  void register_routes(httplib::Server& server) {
    server.Post("/api/interviews", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, 201, [&] { return create(parse_body(req)); });
    });
    server.Get(R"(/api/interviews/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 handle(res, 200, [&] { return get(req.matches[1]); });
               });
    server.Post(R"(/api/interviews/([^/]+)/answer)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  handle(res, 200, [&] { return answer(req.matches[1], parse_body(req)); });
                });
    server.Post(R"(/api/interviews/([^/]+)/finalize)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  handle(res, 200, [&] { return finalize(req.matches[1]); });
                });
    server.Get("/api/outlines/default", [](const httplib::Request&, httplib::Response& res) {
      handle(res, 200, [] { return default_outline_json(); });
    });
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
  }

 private:
  struct Entry {
    std::mutex mu;
    InterviewState state;
  };

  InterviewOptions options() const {
    InterviewOptions o;
    o.generator = generator_.get();
    o.summarizer = summarizer_.get();
    o.clock = config_.clock;
    return o;
  }

  static Json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    return parse_json(req.body, "request body");
  }

  template <typename F>
  static void handle(httplib::Response& res, int ok_status, F&& f) {
    try {
      Json body = f();
      res.status = ok_status;
      res.set_content(body.dump(), "application/json");
    } catch (const Error& e) {
      res.status = http_status_for(e.code());
      res.set_content(error_body(e.code(), e.what()).dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(error_body(ErrorCode::kIoError, e.what()).dump(), "application/json");
    }
  }

  std::shared_ptr<Entry> find(const std::string& id) {
    std::lock_guard<std::mutex> lock(registry_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::kSessionNotFound, "no interview " + id);
    return it->second;
  }

  // Resolves a reference inside data_dir, refusing to escape it.
  std::filesystem::path resolve_ref(const std::string& ref) const {
    if (config_.data_dir.empty()) {
      throw Error(ErrorCode::kConfigInvalid, "service has no data directory for references");
    }
    const auto base = std::filesystem::weakly_canonical(config_.data_dir);
    const auto full = std::filesystem::weakly_canonical(base / ref);
    const auto rel = full.lexically_relative(base);
    if (rel.empty() || *rel.begin() == "..") {
      throw Error(ErrorCode::kConfigInvalid, "reference escapes the data directory: " + ref);
    }
    return full;
  }

  BehavioralFeatures resolve_features(const Json& body) const {
    if (auto it = body.find("features"); it != body.end() && !it->is_null()) {
      return features_from_json(*it);
    }
    if (auto it = body.find("features_ref"); it != body.end() && it->is_string()) {
      return features_from_json(
          read_document(resolve_ref(it->get<std::string>()), kFeaturesSchema));
    }
    throw Error(ErrorCode::kParseError, "request needs features or features_ref");
  }

  InterviewOutline resolve_outline(const Json& body) const {
    if (auto it = body.find("outline"); it != body.end() && !it->is_null()) {
      return outline_from_json(*it);
    }
    if (auto it = body.find("outline_ref"); it != body.end() && !it->is_null()) {
      if (!it->is_string()) throw Error(ErrorCode::kParseError, "outline_ref must be a string");
      const std::string ref = it->get<std::string>();
      if (ref == "default") return default_outline();
      return outline_from_json(read_document(resolve_ref(ref), kOutlineSchema));
    }
    return default_outline();
  }

  std::string next_id_locked() {
    char buf[32];
    do {
      std::snprintf(buf, sizeof(buf), "iv-%06zu", ++last_sequence_);
    } while (sessions_.contains(buf));
    return buf;
  }

  void persist(const InterviewState& st) const {
    write_file_atomic(config_.state_dir / (st.interview_id + ".json"),
                      dump_document(state_to_json(st)));
  }

  void load_persisted() {
    for (const auto& entry : std::filesystem::directory_iterator(config_.state_dir)) {
      const auto& path = entry.path();
      if (!entry.is_regular_file() || path.extension() != ".json") continue;
      if (path.stem().extension() == ".persona") continue;
      auto session = std::make_shared<Entry>();
      session->state = state_from_json(read_document(path, kInterviewStateSchema));
      const std::string id = session->state.interview_id;
      std::size_t seq = 0;
      if (std::sscanf(id.c_str(), "iv-%zu", &seq) == 1) last_sequence_ = std::max(last_sequence_, seq);
      sessions_[id] = std::move(session);
    }
  }

  InterviewServiceConfig config_;
  std::unique_ptr<QuestionGenerator> generator_;
  std::unique_ptr<Summarizer> summarizer_;
  mutable std::mutex registry_mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::size_t last_sequence_ = 0;
};

}  // namespace personaact
