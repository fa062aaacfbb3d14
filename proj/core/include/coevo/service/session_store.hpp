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


#ifndef COEVO_SERVICE_SESSION_STORE_HPP_
#define COEVO_SERVICE_SESSION_STORE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coevo/engine.hpp"
#include "coevo/experiment.hpp"

namespace coevo::service {

// Error with a specific reason token (for example "prompt_pending") and
// optional structured details such as the rule violations behind a 422.
class ServiceError : public Error {
 public:
  ServiceError(ErrorCode code, std::string reason, const std::string& message,
               nlohmann::json details = nullptr)
      : Error(code, message), reason_(std::move(reason)), details_(std::move(details)) {}
  const std::string& reason() const { return reason_; }
  const nlohmann::json& details() const { return details_; }

 private:
  std::string reason_;
  nlohmann::json details_;
};

struct StoreOptions {
  std::filesystem::path data_dir;               // <name>.csv + sidecars
  std::optional<std::filesystem::path> state_dir;  // persistence root; in-memory when empty
  std::size_t snapshot_every = 200;             // events between snapshots
  Clock clock;                                  // event timestamps; wall-clock milliseconds by default
};

// Owns live sessions. Calls on one session are serialized; different
// sessions proceed concurrently.
class SessionStore {
 public:
  explicit SessionStore(StoreOptions options);

  // Request fields: dataset (name), config (session config), rules (inline
  // rule set, defaults to the dataset's), split_seed, streaming (default true).
  // Returns the session summary.
  nlohmann::json create(const nlohmann::json& request);

  nlohmann::json summary(const std::string& id);
  nlohmann::json post_label(const std::string& id, const nlohmann::json& body);
  nlohmann::json post_response(const std::string& id, const nlohmann::json& body);
  nlohmann::json events(const std::string& id, std::uint64_t since, std::size_t limit);
  nlohmann::json metrics(const std::string& id);
  nlohmann::json latest_explanation(const std::string& id);
  nlohmann::json preview_gfc(const std::string& id, const nlohmann::json& body);
  nlohmann::json snapshot(const std::string& id);

  std::vector<std::string> session_ids() const;
  std::vector<std::string> dataset_names() const;

  // Reloads every persisted session from disk (snapshot plus event tail).
  std::size_t load_persisted();

 private:
  struct Entry;

  std::shared_ptr<Entry> find(const std::string& id) const;
  std::shared_ptr<const DatasetBundle> bundle(const std::string& name);
  nlohmann::json summary_locked(const Entry& e) const;
  void persist_new_events(Entry& e);
  void write_meta(const Entry& e) const;
  std::int64_t now() const;
  std::string new_id();

  StoreOptions options_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mutex bundles_mu_;
  std::map<std::string, std::shared_ptr<const DatasetBundle>> bundles_;
  std::uint64_t id_counter_ = 0;
};

}  // namespace coevo::service

#endif  // COEVO_SERVICE_SESSION_STORE_HPP_
