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


#include <csignal>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coevo/service/server.hpp"

#ifndef COEVO_DEFAULT_DATA_DIR
#define COEVO_DEFAULT_DATA_DIR "data"
#endif

namespace {
coevo::service::Server* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coevo-serve: HTTP session service for interactive labeling"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = COEVO_DEFAULT_DATA_DIR;
  std::string state_dir;
  std::size_t snapshot_every = 200;
  app.add_option("--host", host, "Bind address")->capture_default_str();
  app.add_option("--port", port, "Port")->capture_default_str()->check(CLI::Range(1, 65535));
  app.add_option("--data-dir", data_dir, "Directory with <name>.csv and sidecars")->capture_default_str();
  app.add_option("--state-dir", state_dir, "Persist sessions here (in-memory when omitted)");
  app.add_option("--snapshot-every", snapshot_every, "Events between snapshots")->capture_default_str()
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    coevo::service::StoreOptions options;
    options.data_dir = data_dir;
    if (!state_dir.empty()) options.state_dir = state_dir;
    options.snapshot_every = snapshot_every;
    coevo::service::SessionStore store(std::move(options));
    const std::size_t restored = store.load_persisted();
    if (restored) std::cerr << "restored " << restored << " session(s)\n";

    coevo::service::Server server(store);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "listening on " << host << ':' << port << '\n';
    if (!server.listen(host, port)) {
      std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
      return 1;
    }
  } catch (const coevo::Error& e) {
    std::cerr << "error [" << coevo::to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
