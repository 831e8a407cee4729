// Copyright 2026 The sitabench Authors
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


// sitabench command line: ingest, synth, transform, train, sweep, attack,
// report. Exit status 0 on success, 1 when a sweep cell failed, 2 on usage
// or input errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sitabench/attack.hpp"
#include "sitabench/config.hpp"
#include "sitabench/data.hpp"
#include "sitabench/eval.hpp"
#include "sitabench/experiment.hpp"
#include "sitabench/ingest.hpp"
#include "sitabench/models/encode.hpp"
#include "sitabench/models/model.hpp"
#include "sitabench/sita.hpp"
#include "sitabench/table.hpp"

namespace fs = std::filesystem;
using namespace sitabench;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned jobs = 0;
  std::string sweep;
  std::string models;
};

config::ExperimentConfig load_experiment(const Common& o) {
  config::ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    cfg = config::parse_experiment(config::load_file(o.config_path));
  }
  if (o.seed) cfg.reseed(*o.seed);
  if (o.jobs > 0) cfg.jobs = o.jobs;
  if (!o.sweep.empty()) cfg.sweep = experiment::split_list(o.sweep);
  if (!o.models.empty()) {
    cfg.models = config::parse_model_list(experiment::split_list(o.models));
  }
  if (!o.out.empty()) cfg.output_dir = o.out;
  return cfg;
}

std::vector<SensorRecord> read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_sensor_table(in);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

int cmd_ingest(const Common&, const std::string& input, const std::string& out) {
  IngestResult r = ingest_directory(input);
  for (const auto& f : r.files) {
    std::cerr << f.path << ": " << f.readings << " readings, " << f.skipped
              << " skipped\n";
  }
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  std::cerr << r.consolidated.records.size() << " records, "
            << r.consolidated.dropped << " incomplete groups dropped, "
            << r.consolidated.duplicates << " duplicate readings\n";
  auto stream = open_output(out);
  write_sensor_table(stream, r.consolidated.records);
  return 0;
}

int cmd_synth(const Common& o, const std::string& out) {
  const config::ExperimentConfig cfg = load_experiment(o);
  const auto records = synthesize(cfg.synth);
  auto stream = open_output(out);
  write_sensor_table(stream, records);
  std::cerr << records.size() << " records written to " << out << '\n';
  return 0;
}

int cmd_transform(const Common&, const std::string& input,
                  const std::string& sita_text, const std::string& out) {
  const sita::SitaConfig sc = sita::parse_config(sita_text);
  sita::TransformStats stats;
  const auto priv = sita::apply_dataset(read_table_file(input), sc, {}, &stats);
  auto stream = open_output(out);
  sita::write_private_table(stream, priv);
  if (stats.unknown_floors > 0) {
    std::cerr << "warning: " << stats.unknown_floors
              << " rooms had no recognizable floor\n";
  }
  std::cerr << stats.records << " records transformed with " << sc.str() << '\n';
  return 0;
}

int cmd_train(const Common& o, const std::string& input, const std::string& sita_text,
              const std::string& model_name, const std::string& out) {
  const config::ExperimentConfig cfg = load_experiment(o);
  const sita::SitaConfig sc = sita::parse_config(sita_text);
  std::vector<SensorRecord> records =
      input.empty() ? experiment::load_dataset(cfg).records
                    : clean(read_table_file(input), cfg.cleaning);
  const auto enc = models::encode(sita::apply_dataset(records, sc), cfg.encoding);
  const auto spec = cfg.spec_for(models::parse_algorithm(model_name));
  const auto split = eval::split(enc.X.rows, cfg.split);
  const auto s = eval::holdout_score(spec, enc.X, enc.y, split.train, split.test);
  std::cout << "holdout r2=" << (s.r2 ? format_number(*s.r2) : "undefined")
            << " mae=" << format_number(s.mae) << " rmse=" << format_number(s.rmse)
            << '\n';
  const auto model = models::fit(spec, enc.X, enc.y);
  auto stream = open_output(out);
  stream << models::to_json(model).dump() << '\n';
  return 0;
}

int cmd_sweep(const Common& o) {
  const config::ExperimentConfig cfg = load_experiment(o);
  const experiment::Dataset data = experiment::load_dataset(cfg);
  for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';
  std::cerr << data.records.size() << " records (" << data.removed_by_cleaning
            << " removed by cleaning)\n";
  const auto result = experiment::run_to_directory(
      cfg, data, cfg.output_dir, [](const experiment::Cell& c) {
        std::cerr << c.config.str() << ' ' << models::to_string(c.model) << ' '
                  << experiment::to_string(c.status);
        if (c.status == experiment::CellStatus::ok) {
          std::cerr << " r2=" << eval::format_metric_value(c.report.r2.mean);
        } else {
          std::cerr << " (" << c.message << ')';
        }
        std::cerr << '\n';
      });
  std::size_t failed = 0;
  for (const auto& c : result.cells) {
    if (c.status == experiment::CellStatus::error) {
      ++failed;
      std::cerr << "failed: " << c.config.str() << ' '
                << models::to_string(c.model) << ": " << c.message << '\n';
    }
  }
  std::cerr << result.cells.size() << " cells, " << failed << " failed, output in "
            << cfg.output_dir << '\n';
  return failed > 0 ? 1 : 0;
}

int cmd_attack(const Common& o) {
  config::AttackConfig ac;
  std::uint64_t seed = 10;
  std::string out_dir = "out";
  if (!o.config_path.empty()) {
    const auto j = config::load_file(o.config_path);
    const auto cfg = config::parse_experiment(j);
    seed = cfg.seed;
    out_dir = cfg.output_dir;
    ac = config::parse_attack(j.value("attack", nlohmann::json::object()), seed);
    if (j.contains("attack") && j["attack"].contains("output_dir")) {
      out_dir = ac.output_dir;
    }
  } else {
    ac.seeds = config::AttackConfig::seed_range(seed, 100);
  }
  if (o.seed) ac.seeds = config::AttackConfig::seed_range(*o.seed, ac.seeds.size());
  if (!o.out.empty()) out_dir = o.out;
  const auto results =
      attack::run_attack(ac.scenario, ac.activity_levels, ac.strategies, ac.seeds);
  fs::create_directories(out_dir);
  auto detail = open_output(fs::path(out_dir) / "attack.csv");
  csv::write_row(detail, attack::attack_header());
  for (const auto& r : results) csv::write_row(detail, attack::attack_row(r));
  auto summary = open_output(fs::path(out_dir) / "attack_summary.csv");
  csv::write_row(summary, attack::summary_header());
  for (const auto& s : attack::summarize(results)) {
    csv::write_row(summary, attack::summary_row(s));
    std::cout << "level " << s.activity_level << ' ' << attack::to_string(s.strategy)
              << " mean accuracy " << format_number(s.mean_accuracy) << '\n';
  }
  return 0;
}

int cmd_report(const Common& o, const std::string& input) {
  std::ifstream in(input);
  if (!in) throw Error("cannot open " + input);
  const auto summary = experiment::read_sweep_csv(in);
  const fs::path out = o.out.empty() ? fs::path(input).parent_path() : fs::path(o.out);
  experiment::write_summary_files(out.empty() ? fs::path(".") : out, summary);
  std::cerr << "pivots and degradation written to "
            << (out.empty() ? std::string(".") : out.string()) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SITA privacy sweeps over indoor sensor data"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common o;
  std::string input, out_file, sita_text = "4444", model_name = "rf";
  auto common = [&](CLI::App* sub, bool with_out = true) {
    sub->add_option("--config", o.config_path, "JSON config file")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Global seed");
    if (with_out) sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--jobs", o.jobs, "Worker threads");
  };

  auto* ingest = app.add_subcommand("ingest", "Consolidate raw sensor JSON files");
  ingest->add_option("--input", input, "Directory of <kind>*.json files")->required();
  ingest->add_option("--out", out_file, "Sensor table to write")->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic sensor table");
  common(synth, false);
  synth->add_option("--out", out_file, "Sensor table to write")->required();

  auto* transform = app.add_subcommand("transform", "Apply one SITA configuration");
  transform->add_option("--input", input, "Sensor table")->required();
  transform->add_option("--sita", sita_text, "Configuration, e.g. 4434")->required();
  transform->add_option("--out", out_file, "Private table to write")->required();

  auto* train = app.add_subcommand("train", "Fit one model and save it as JSON");
  common(train, false);
  train->add_option("--input", input, "Sensor table (default: config input)");
  train->add_option("--sita", sita_text, "Configuration");
  train->add_option("--model", model_name, "lr, rr, dtr, rf or gbr");
  train->add_option("--out", out_file, "Model file to write")->required();

  auto* sweep = app.add_subcommand("sweep", "Evaluate models over SITA configurations");
  common(sweep);
  sweep->add_option("--sweep", o.sweep, "Comma list, e.g. X444,44X4,444X");
  sweep->add_option("--models", o.models, "Comma list, e.g. lr,rr,dtr,rf,gbr");

  auto* attack_cmd = app.add_subcommand("attack", "Occupancy inference from CO2");
  common(attack_cmd);

  auto* report = app.add_subcommand("report", "Pivots and degradation from sweep.csv");
  report->add_option("--input", input, "sweep.csv")->required()->check(CLI::ExistingFile);
  report->add_option("--out", o.out, "Output directory (default: next to input)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(o, input, out_file);
    if (*synth) return cmd_synth(o, out_file);
    if (*transform) return cmd_transform(o, input, sita_text, out_file);
    if (*train) return cmd_train(o, input, sita_text, model_name, out_file);
    if (*sweep) return cmd_sweep(o);
    if (*attack_cmd) return cmd_attack(o);
    if (*report) return cmd_report(o, input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
