// Copyright 2026 The coevo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "coevo/service/server.hpp"

#include <httplib.h>

namespace coevo::service {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kValidation:
      return 422;
    case ErrorCode::kCorrupt:
    case ErrorCode::kIo:
    case ErrorCode::kInternal:
      return 500;
  }
  return 500;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                std::string_view reason = {}, const json* details = nullptr) {
  json err = {{"code", code}, {"message", message}, {"reason", reason.empty() ? code : reason}};
  if (details && !details->is_null()) err["details"] = *details;
  send_json(res, status, {{"error", std::move(err)}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("body is not valid JSON: ") + e.what());
  }
}

std::uint64_t query_uint(const httplib::Request& req, const char* name, std::uint64_t fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string v = req.get_param_value(name);
  try {
    std::size_t used = 0;
    const unsigned long long n = std::stoull(v, &used);
    require(used == v.size(), ErrorCode::kInvalidArgument, "");
    return n;
  } catch (const std::exception&) {
    fail(ErrorCode::kInvalidArgument, std::string("query parameter ") + name + " must be a non-negative integer");
  }
}

// Runs a handler and maps failures onto status codes.
template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what(), e.reason(), &e.details());
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, to_string(ErrorCode::kInvalidArgument), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, to_string(ErrorCode::kInternal), e.what());
    }
  };
}

}  // namespace

Server::Server(SessionStore& store) : store_(store), http_(std::make_unique<httplib::Server>()) {
  auto& h = *http_;
  const std::string id = R"(/sessions/([A-Za-z0-9_-]+))";

  h.Get("/health", guarded([](const auto&, auto& res) { send_json(res, 200, {{"status", "ok"}}); }));
  h.Get("/datasets", guarded([this](const auto&, auto& res) {
          send_json(res, 200, {{"datasets", store_.dataset_names()}});
        }));
  h.Get("/sessions", guarded([this](const auto&, auto& res) {
          send_json(res, 200, {{"sessions", store_.session_ids()}});
        }));
  h.Post("/sessions", guarded([this](const auto& req, auto& res) {
           send_json(res, 201, store_.create(parse_body(req)));
         }));
  h.Get(id, guarded([this](const auto& req, auto& res) { send_json(res, 200, store_.summary(req.matches[1])); }));
  h.Post(id + "/labels", guarded([this](const auto& req, auto& res) {
           send_json(res, 200, store_.post_label(req.matches[1], parse_body(req)));
         }));
  h.Post(id + "/responses", guarded([this](const auto& req, auto& res) {
           send_json(res, 200, store_.post_response(req.matches[1], parse_body(req)));
         }));
  h.Get(id + "/events", guarded([this](const auto& req, auto& res) {
          const std::uint64_t since = query_uint(req, "since", 0);
          const std::uint64_t limit = query_uint(req, "limit", 1000);
          send_json(res, 200, store_.events(req.matches[1], since, static_cast<std::size_t>(limit)));
        }));
  h.Get(id + "/metrics", guarded([this](const auto& req, auto& res) {
          send_json(res, 200, store_.metrics(req.matches[1]));
        }));
  h.Get(id + "/explanations/latest", guarded([this](const auto& req, auto& res) {
          send_json(res, 200, store_.latest_explanation(req.matches[1]));
        }));
  h.Post(id + "/gfc/preview", guarded([this](const auto& req, auto& res) {
           send_json(res, 200, store_.preview_gfc(req.matches[1], parse_body(req)));
         }));
  h.Get(id + "/snapshot", guarded([this](const auto& req, auto& res) {
          send_json(res, 200, store_.snapshot(req.matches[1]));
        }));
  h.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send_error(res, res.status, "not_found", "no such route");
  });
}

Server::~Server() = default;

bool Server::listen(const std::string& host, int port) { return http_->listen(host, port); }

int Server::bind_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool Server::listen_after_bind() { return http_->listen_after_bind(); }

void Server::stop() { http_->stop(); }

void Server::wait_until_ready() const { http_->wait_until_ready(); }

}  // namespace coevo::service
