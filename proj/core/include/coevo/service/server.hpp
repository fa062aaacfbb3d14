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


#ifndef COEVO_SERVICE_SERVER_HPP_
#define COEVO_SERVICE_SERVER_HPP_

#include <memory>
#include <string>

#include "coevo/service/session_store.hpp"

namespace httplib {
class Server;
}

namespace coevo::service {

// HTTP front end. Routes:
//   GET  /health
//   GET  /datasets
//   POST /sessions
//   GET  /sessions/{id}
//   POST /sessions/{id}/labels
//   POST /sessions/{id}/responses
//   GET  /sessions/{id}/events?since=&limit=
//   GET  /sessions/{id}/metrics
//   GET  /sessions/{id}/explanations/latest
//   POST /sessions/{id}/gfc/preview
//   GET  /sessions/{id}/snapshot
// Errors are {"error": {"code", "reason", "message", "details"?}} with 400, 404, 409,
// 422 or 500.
class Server {
 public:
  explicit Server(SessionStore& store);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and serves until stop(). Returns false if the port cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds to a free port and returns it; serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  SessionStore& store_;
  std::unique_ptr<httplib::Server> http_;
};

int http_status(ErrorCode code);

}  // namespace coevo::service

#endif  // COEVO_SERVICE_SERVER_HPP_
