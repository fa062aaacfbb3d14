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


// coevo: runs simulated labeling sessions and prints the evaluation tables.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coevo/experiment.hpp"

#ifndef COEVO_DEFAULT_DATA_DIR
#define COEVO_DEFAULT_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace coevo;

namespace {

struct Options {
  std::string dataset = "adult";
  std::string data_dir = COEVO_DEFAULT_DATA_DIR;
  std::string schema;
  std::string rules;
  std::string user = "real";
  std::string policy = "random";
  std::string checks = "all";
  std::string users = "real,absent_minded,coin,bayesian,similarity";
  std::size_t k = 100;
  double s = 0.05;
  std::uint64_t seed = 0;
  std::size_t repeats = 10;
  std::size_t stream = 2000;
  std::size_t threads = 0;
  std::string explanations = "synthetic";
  std::string gfc_scope = "shown";
  std::string out;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

DatasetBundle load(const Options& o) {
  if (o.dataset.ends_with(".csv")) {
    require(!o.schema.empty(), ErrorCode::kInvalidArgument, "--schema is required with a CSV path");
    return load_bundle(o.dataset, o.schema, o.rules.empty() ? std::nullopt : std::optional<fs::path>(o.rules));
  }
  DatasetBundle b = load_named_bundle(o.data_dir, o.dataset);
  if (!o.rules.empty()) b.rules = RuleSet::load(o.rules, *b.data->schema);
  return b;
}

ExperimentConfig base_config(const Options& o, const DatasetBundle& b) {
  ExperimentConfig c;
  c.data = b.data;
  c.rules = b.rules;
  c.session.gfc_period = o.k;
  c.session.skepticism_threshold = o.s;
  c.session.stop_after = o.stream;
  c.session.explanation_source =
      o.explanations == "real" ? InstanceSource::kReal : InstanceSource::kSynthetic;
  c.sizes.stream = o.stream;
  c.repeats = o.repeats;
  c.seed = o.seed;
  c.threads = o.threads;
  c.behavior.gfc_whole_lists = o.gfc_scope == "all";
  return c;
}

std::string fmt(double v, int precision = 2) {
  if (!std::isfinite(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

struct Row {
  std::vector<std::string> cells;
};

void print_table(std::ostream& os, const std::vector<std::string>& header, const std::vector<Row>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const Row& r : rows) {
    for (std::size_t i = 0; i < r.cells.size(); ++i) width[i] = std::max(width[i], r.cells[i].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      os << (i ? "  " : "");
      os << std::string(width[i] - cells[i].size(), ' ') << cells[i];
    }
    os << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w + 2;
  os << std::string(total - 2, '-') << '\n';
  for (const Row& r : rows) line(r.cells);
}

std::vector<std::string> metric_cells(const MetricsReport& m) {
  return {fmt(m.ca), fmt(m.ma), fmt(m.cd), fmt(m.md), fmt(m.uc, 1)};
}

void write_series(const fs::path& path, const MetricsReport& m) {
  std::ofstream f(path);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot write " + path.string());
  f << "step,CA,CD\n";
  for (std::size_t i = 0; i < m.ca_series.size(); ++i) {
    f << (i + 1) << ',' << fmt(m.ca_series[i], 6) << ',' << fmt(m.cd_series[i], 6) << '\n';
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream f(path);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot write " + path.string());
  f << j.dump(2) << '\n';
}

struct Cell {
  std::string label;  // file-name safe identifier
  ExperimentConfig config;
};

nlohmann::json cell_json(const Cell& c, const ExperimentResult& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : r.runs) runs.push_back({{"seed", run.seed}, {"metrics", run.metrics.to_json()}});
  return {{"name", c.label},
          {"user", std::string(to_string(c.config.user))},
          {"policy", std::string(to_string(c.config.policy))},
          {"checks", c.config.session.checks.to_string()},
          {"k", c.config.session.gfc_period},
          {"s", c.config.session.skepticism_threshold},
          {"repeats", c.config.repeats},
          {"seed", c.config.seed},
          {"mean", r.mean.to_json()},
          {"runs", std::move(runs)}};
}

// Runs every cell, writing <out>/<label>.csv series and <out>/results.json.
std::vector<ExperimentResult> run_cells(const Options& o, const std::string& dataset, std::vector<Cell>& cells) {
  std::vector<ExperimentResult> results;
  nlohmann::json all = nlohmann::json::array();
  if (!o.out.empty()) fs::create_directories(o.out);
  for (Cell& c : cells) {
    std::cerr << "running " << c.label << " ..." << std::endl;
    results.push_back(run_experiment(c.config));
    if (!o.out.empty()) {
      write_series(fs::path(o.out) / (c.label + ".series.csv"), results.back().mean);
      for (std::size_t r = 0; r < results.back().runs.size(); ++r) {
        write_series(fs::path(o.out) / (c.label + ".run" + std::to_string(r) + ".series.csv"),
                     results.back().runs[r].metrics);
      }
    }
    all.push_back(cell_json(c, results.back()));
  }
  if (!o.out.empty()) write_json(fs::path(o.out) / "results.json", {{"dataset", dataset}, {"cells", all}});
  return results;
}

int cmd_run(const Options& o) {
  const DatasetBundle b = load(o);
  ExperimentConfig c = base_config(o, b);
  c.user = user_kind_from_string(o.user);
  c.policy = policy_from_string(o.policy);
  const auto named = checks_by_name(o.checks);
  c.session.checks = named ? *named : ChecksEnabled::parse(o.checks);
  std::vector<Cell> cells{{o.user + "_" + o.policy + "_" + c.session.checks.to_string(), c}};
  for (char& ch : cells[0].label) {
    if (ch == ',') ch = '+';
  }
  const auto results = run_cells(o, b.name, cells);
  const MetricsReport& m = results[0].mean;
  std::cout << b.name << "  user=" << o.user << "  policy=" << o.policy << "  checks=" << c.session.checks.to_string()
            << "  repeats=" << o.repeats << "\n";
  auto cells_row = metric_cells(m);
  print_table(std::cout, {"CA", "MA", "CD", "MD", "UC"}, {{cells_row}});
  const auto& r = m.rates;
  std::cout << "agreement " << fmt(100 * r.agreement) << "%  skepticism " << fmt(100 * r.skepticism)
            << "%  disagreement " << fmt(100 * r.disagreement) << "%  accepted " << fmt(100 * r.accepted)
            << "%  declined " << fmt(100 * r.declined) << "%\n";
  return 0;
}

int cmd_ablation(const Options& o) {
  const DatasetBundle b = load(o);
  const std::vector<std::string> configs = {"none", "oIRC", "oIFC", "oGFC"};
  std::vector<Cell> cells;
  for (const auto& u : split_list(o.users)) {
    for (const auto& name : configs) {
      ExperimentConfig c = base_config(o, b);
      c.user = user_kind_from_string(u);
      c.policy = Policy::kRandom;  // no prompt reaches the policy without skeptical learning
      c.session.checks = *checks_by_name(name);
      cells.push_back({u + "_" + name, c});
    }
  }
  const auto results = run_cells(o, b.name, cells);
  std::vector<Row> rows;
  for (std::size_t i = 0; i < cells.size(); i += configs.size()) {
    Row row{{std::string(to_string(cells[i].config.user))}};
    for (std::size_t j = 0; j < configs.size(); ++j) {
      for (auto& v : metric_cells(results[i + j].mean)) row.cells.push_back(v);
    }
    rows.push_back(row);
  }
  std::vector<std::string> header = {b.name};
  for (const auto& name : configs) {
    for (const char* m : {"CA", "MA", "CD", "MD", "UC"}) header.push_back(name + ":" + m);
  }
  print_table(std::cout, header, rows);
  return 0;
}

int cmd_compare_sl(const Options& o) {
  const DatasetBundle b = load(o);
  const std::vector<std::string> policies = {"accept", "decline", "random"};
  std::vector<Cell> cells;
  for (const auto& u : split_list(o.users)) {
    for (const auto& p : policies) {
      for (const char* name : {"SL", "FRANK"}) {
        ExperimentConfig c = base_config(o, b);
        c.user = user_kind_from_string(u);
        c.policy = policy_from_string(p);
        c.session.checks = *checks_by_name(name);
        cells.push_back({u + "_" + p + "_" + name, c});
      }
    }
  }
  const auto results = run_cells(o, b.name, cells);
  std::vector<Row> rows;
  for (std::size_t i = 0; i < cells.size(); i += 2) {
    Row row{{std::string(to_string(cells[i].config.user)), std::string(to_string(cells[i].config.policy))}};
    for (std::size_t j = 0; j < 2; ++j) {
      for (auto& v : metric_cells(results[i + j].mean)) row.cells.push_back(v);
    }
    rows.push_back(row);
  }
  std::vector<std::string> header = {b.name, "policy"};
  for (const char* name : {"SL", "FRANK"}) {
    for (const char* m : {"CA", "MA", "CD", "MD", "UC"}) header.push_back(std::string(name) + ":" + m);
  }
  print_table(std::cout, header, rows);
  return 0;
}

int cmd_xai_study(const Options& o) {
  const DatasetBundle b = load(o);
  std::vector<Cell> cells;
  for (const char* u : {"bayesian", "similarity"}) {
    for (const char* p : {"random", "xai"}) {
      ExperimentConfig c = base_config(o, b);
      c.user = user_kind_from_string(u);
      c.policy = policy_from_string(p);
      c.session.checks = *checks_by_name("FRANK");
      cells.push_back({std::string(u) + "_" + p, c});
    }
  }
  const auto results = run_cells(o, b.name, cells);
  std::vector<Row> rows;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const MetricsReport& m = results[i].mean;
    rows.push_back({{std::string(to_string(cells[i].config.user)), std::string(to_string(cells[i].config.policy)),
                     fmt(100 * m.rates.agreement), fmt(100 * m.rates.skepticism), fmt(100 * m.rates.disagreement),
                     fmt(100 * m.rates.accepted), fmt(100 * m.rates.declined), fmt(m.ca), fmt(m.cd)}});
  }
  print_table(std::cout, {b.name, "policy", "Agr%", "Ske%", "Dis%", "Acc%", "Dec%", "CA", "CD"}, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated co-evolutionary labeling sessions"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--dataset", o.dataset, "dataset name in --data-dir, or a CSV path")->capture_default_str();
    cmd->add_option("--data-dir", o.data_dir, "directory with <name>.csv and sidecars")->capture_default_str();
    cmd->add_option("--schema", o.schema, "schema sidecar (required with a CSV path)");
    cmd->add_option("--rules", o.rules, "ideal-rule file (overrides the dataset's)");
    cmd->add_option("--k", o.k, "records between group fairness checks")->capture_default_str()->check(
        CLI::PositiveNumber);
    cmd->add_option("--s", o.s, "skepticism threshold")->capture_default_str();
    cmd->add_option("--seed", o.seed, "base seed")->capture_default_str();
    cmd->add_option("--repeats", o.repeats, "runs to average")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--stream", o.stream, "records labeled per run")->capture_default_str();
    cmd->add_option("--threads", o.threads, "parallel runs (0: all cores)")->capture_default_str();
    cmd->add_option("--explanations", o.explanations, "instance source for explanations")
        ->capture_default_str()
        ->check(CLI::IsMember({"synthetic", "real"}));
    cmd->add_option("--gfc-scope", o.gfc_scope, "lists the simulated user relabels 25% of: shown targets or all candidates")
        ->capture_default_str()
        ->check(CLI::IsMember({"shown", "all"}));
    cmd->add_option("--out", o.out, "directory for results.json and CA/CD series CSVs");
  };

  auto* run = app.add_subcommand("run", "one configuration");
  add_common(run);
  run->add_option("--user", o.user, "real, absent_minded, coin, bayesian, similarity")->capture_default_str();
  run->add_option("--policy", o.policy, "accept, decline, random, xai")->capture_default_str();
  run->add_option("--checks", o.checks, "irc,ifc,slc,gfc subset, all, or a named set (none, oIRC, oIFC, oGFC, SL, FRANK)")
      ->capture_default_str();

  auto* ablation = app.add_subcommand("ablation", "each check alone versus none, per user");
  add_common(ablation);
  ablation->add_option("--users", o.users, "comma-separated user kinds")->capture_default_str();

  auto* compare = app.add_subcommand("compare-sl", "skeptical learning alone versus all checks");
  add_common(compare);
  compare->add_option("--users", o.users, "comma-separated user kinds")->capture_default_str();

  auto* xai = app.add_subcommand("xai-study", "random versus explanation-driven acceptance");
  add_common(xai);

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(o);
    if (ablation->parsed()) return cmd_ablation(o);
    if (compare->parsed()) return cmd_compare_sl(o);
    return cmd_xai_study(o);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return e.code() == ErrorCode::kNotFound ? 3 : 2;
  }
}
