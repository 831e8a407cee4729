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

#pragma once

// Sweep runner: transforms the data once per SITA configuration, evaluates
// every requested model on the shared private data set, and writes the
// long-form score table, pivots, degradation table and provenance record.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "sitabench/config.hpp"
#include "sitabench/data.hpp"
#include "sitabench/error.hpp"
#include "sitabench/eval.hpp"
#include "sitabench/ingest.hpp"
#include "sitabench/models/encode.hpp"
#include "sitabench/models/model.hpp"
#include "sitabench/sita.hpp"
#include "sitabench/table.hpp"
#include "sitabench/text.hpp"

namespace sitabench {

inline constexpr std::string_view kVersion = "0.1.0";

namespace experiment {

using config::ExperimentConfig;
using models::Algorithm;
using sita::SitaConfig;

inline constexpr std::string_view kBaseline = "4444";

/// "X444" -> 4444, 3444, 2444, 1444, 0444.
inline std::vector<SitaConfig> expand_sweep(std::string_view pattern) {
  if (pattern.size() != 4) {
    throw ConfigError("sweep pattern '" + std::string(pattern) +
                      "' must have 4 characters");
  }
  const auto wildcards = std::count(pattern.begin(), pattern.end(), 'X');
  if (wildcards != 1) {
    throw ConfigError("sweep pattern '" + std::string(pattern) +
                      "' needs exactly one X");
  }
  const std::size_t at = pattern.find('X');
  std::vector<SitaConfig> out;
  for (char level : {'4', '3', '2', '1', '0'}) {
    std::string text(pattern);
    text[at] = level;
    out.push_back(sita::parse_config(text));
  }
  return out;
}

/// Patterns are expanded, plain configurations taken as is; duplicates keep
/// their first position and the baseline always comes first.
inline std::vector<SitaConfig> resolve_sweep(const std::vector<std::string>& entries) {
  std::vector<SitaConfig> out = {sita::parse_config(kBaseline)};
  auto add = [&](const SitaConfig& c) {
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  };
  for (const auto& entry : entries) {
    if (entry.find('X') != std::string::npos) {
      for (const auto& c : expand_sweep(entry)) add(c);
    } else {
      add(sita::parse_config(entry));
    }
  }
  return out;
}

inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    std::string item(text.substr(start, comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Input

struct Dataset {
  std::vector<SensorRecord> records;
  std::size_t removed_by_cleaning = 0;
  std::vector<std::string> warnings;
};

inline Dataset load_dataset(const ExperimentConfig& cfg) {
  Dataset d;
  std::vector<SensorRecord> raw;
  switch (cfg.input) {
    case config::InputKind::synth:
      raw = synthesize(cfg.synth);
      break;
    case config::InputKind::table: {
      std::ifstream in(cfg.input_path);
      if (!in) throw Error("cannot open " + cfg.input_path);
      raw = read_sensor_table(in);
      break;
    }
    case config::InputKind::raw_dir: {
      IngestResult r = ingest_directory(cfg.input_path);
      raw = std::move(r.consolidated.records);
      d.warnings = std::move(r.warnings);
      break;
    }
  }
  d.records = clean(raw, cfg.cleaning);
  d.removed_by_cleaning = raw.size() - d.records.size();
  return d;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string dataset_hash(const std::vector<SensorRecord>& records) {
  std::ostringstream table;
  write_sensor_table(table, records);
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a(table.str());
  return hex.str();
}

// ---------------------------------------------------------------------------
// Sweep

enum class CellStatus { ok, skipped, error };

inline std::string_view to_string(CellStatus s) {
  switch (s) {
    case CellStatus::ok: return "ok";
    case CellStatus::skipped: return "skipped";
    case CellStatus::error: return "error";
  }
  return "unknown";
}

struct Cell {
  SitaConfig config;
  Algorithm model = Algorithm::lr;
  CellStatus status = CellStatus::ok;
  eval::ScoreReport report;
  std::string message;
};

struct Provenance {
  std::string version = std::string(kVersion);
  std::string input;
  std::string input_hash;
  std::size_t n_records = 0;
  std::size_t removed_by_cleaning = 0;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t fold_seed = 0;
  std::size_t folds = 0;
  std::string cv_mode;
  unsigned jobs = 1;
  std::string started;
  std::string finished;
  double seconds = 0.0;
};

struct SweepResult {
  std::vector<SitaConfig> configs;
  std::vector<Algorithm> models;
  std::vector<Cell> cells;  // config-major, models in request order
  std::size_t folds = 10;
  Provenance provenance;

  bool any_error() const {
    return std::any_of(cells.begin(), cells.end(), [](const Cell& c) {
      return c.status == CellStatus::error;
    });
  }
};

using CellSink = std::function<void(const Cell&)>;

inline std::string utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

namespace detail {

struct Prepared {
  models::Encoded encoded;
  std::string error;
  bool skipped = false;
};

struct Plan {
  std::vector<std::size_t> cv_rows;  // rows the fold plan indexes into
  eval::FoldPlan folds;
  eval::Split holdout;
};

inline Plan make_plan(std::size_t n, const ExperimentConfig& cfg) {
  Plan p;
  p.holdout = eval::split(n, cfg.split);
  if (cfg.cv_mode == config::CvMode::train) {
    p.cv_rows = p.holdout.train;
  } else {
    p.cv_rows.resize(n);
    std::iota(p.cv_rows.begin(), p.cv_rows.end(), std::size_t{0});
  }
  p.folds = eval::kfold(p.cv_rows.size(), cfg.folds, cfg.shuffle, cfg.fold_seed);
  return p;
}

inline Cell evaluate(const SitaConfig& sc, Algorithm a, const Prepared& prep,
                     const Plan& plan, const ExperimentConfig& cfg) {
  Cell cell;
  cell.config = sc;
  cell.model = a;
  cell.report.config = sc.str();
  cell.report.model = std::string(models::to_string(a));
  if (prep.skipped) {
    cell.status = CellStatus::skipped;
    cell.message = "CO2 target deleted at activity level 0";
    return cell;
  }
  if (!prep.error.empty()) {
    cell.status = CellStatus::error;
    cell.message = prep.error;
    return cell;
  }
  try {
    const models::ModelSpec spec = cfg.spec_for(a);
    const auto& X = prep.encoded.X;
    const auto& y = prep.encoded.y;
    const models::FeatureMatrix X_cv = X.select_rows(plan.cv_rows);
    const models::TargetVector y_cv = models::select(y, plan.cv_rows);
    cell.report = eval::cross_validate(spec, X_cv, y_cv, plan.folds);
    cell.report.config = sc.str();
    cell.report.holdout =
        eval::holdout_score(spec, X, y, plan.holdout.train, plan.holdout.test);
  } catch (const std::exception& e) {
    cell.status = CellStatus::error;
    cell.message = e.what();
  }
  return cell;
}

}  // namespace detail

/// Cells run on `cfg.jobs` workers; `sink` sees them in config-major order as
/// soon as each prefix is complete.
inline SweepResult run(const ExperimentConfig& cfg, const Dataset& data,
                       const CellSink& sink = {}) {
  if (cfg.models.empty()) throw ConfigError("at least one model is required");
  const auto t0 = std::chrono::steady_clock::now();
  SweepResult result;
  result.configs = resolve_sweep(cfg.sweep);
  result.models = cfg.models;
  result.folds = cfg.folds;
  Provenance& prov = result.provenance;
  prov.started = utc_now();
  prov.input_hash = dataset_hash(data.records);
  prov.n_records = data.records.size();
  prov.removed_by_cleaning = data.removed_by_cleaning;
  prov.seed = cfg.seed;
  prov.split_seed = cfg.split.seed;
  prov.fold_seed = cfg.fold_seed;
  prov.folds = cfg.folds;
  prov.cv_mode = cfg.cv_mode == config::CvMode::train ? "train" : "full";
  prov.jobs = cfg.jobs;
  switch (cfg.input) {
    case config::InputKind::synth: prov.input = "synth"; break;
    case config::InputKind::table: prov.input = "table:" + cfg.input_path; break;
    case config::InputKind::raw_dir: prov.input = "raw_dir:" + cfg.input_path; break;
  }

  const detail::Plan plan = detail::make_plan(data.records.size(), cfg);

  std::vector<detail::Prepared> prepared(result.configs.size());
  for (std::size_t c = 0; c < result.configs.size(); ++c) {
    const SitaConfig& sc = result.configs[c];
    if (sc.activity.value() == 0) {
      prepared[c].skipped = true;
      continue;
    }
    try {
      prepared[c].encoded =
          models::encode(sita::apply_dataset(data.records, sc), cfg.encoding);
    } catch (const std::exception& e) {
      prepared[c].error = e.what();
    }
  }

  const std::size_t n_models = result.models.size();
  const std::size_t total = result.configs.size() * n_models;
  std::vector<std::optional<Cell>> slots(total);
  std::mutex mu;
  std::condition_variable ready;
  std::size_t next_job = 0;

  auto worker = [&] {
    for (;;) {
      std::size_t job;
      {
        std::lock_guard lock(mu);
        if (next_job == total) return;
        job = next_job++;
      }
      const std::size_t c = job / n_models;
      Cell cell = detail::evaluate(result.configs[c], result.models[job % n_models],
                                   prepared[c], plan, cfg);
      {
        std::lock_guard lock(mu);
        slots[job] = std::move(cell);
      }
      ready.notify_all();
    }
  };

  const unsigned n_workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, cfg.jobs), total));
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < n_workers; ++w) threads.emplace_back(worker);

  result.cells.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::unique_lock lock(mu);
    ready.wait(lock, [&] { return slots[i].has_value(); });
    Cell cell = std::move(*slots[i]);
    slots[i].reset();
    lock.unlock();
    if (sink) sink(cell);
    result.cells.push_back(std::move(cell));
  }
  for (auto& t : threads) t.join();

  prov.finished = utc_now();
  prov.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

// ---------------------------------------------------------------------------
// Reports

inline std::vector<csv::Row> cell_rows(const Cell& cell, std::size_t k) {
  if (cell.status == CellStatus::ok) return eval::score_rows(cell.report);
  csv::Row row = {cell.config.str(), std::string(models::to_string(cell.model)),
                  std::string(to_string(cell.status))};
  row.resize(row.size() + k + 2);
  row.push_back("0");
  return {row};
}

inline csv::Row holdout_header() {
  csv::Row h = {"config", "model"};
  for (eval::Metric m : eval::kAllMetrics) h.emplace_back(eval::to_string(m));
  return h;
}

inline std::optional<csv::Row> holdout_row(const Cell& cell) {
  if (cell.status != CellStatus::ok || !cell.report.holdout) return std::nullopt;
  const eval::FoldScore& s = *cell.report.holdout;
  auto opt = [](const std::optional<double>& v) {
    return v ? eval::format_metric_value(*v) : std::string();
  };
  return csv::Row{cell.config.str(), std::string(models::to_string(cell.model)),
                  opt(s.r2), eval::format_metric_value(s.mae),
                  eval::format_metric_value(s.rmse), opt(s.mae_rel),
                  opt(s.rmse_rel)};
}

/// Metric means keyed by (config, model, metric); the input of pivots and
/// degradation tables, built from a result or read back from sweep.csv.
struct Summary {
  std::vector<std::string> configs;
  std::vector<std::string> models;
  std::map<std::tuple<std::string, std::string, std::string>, double> means;

  std::optional<double> mean(const std::string& config, const std::string& model,
                             eval::Metric m) const {
    auto it = means.find({config, model, std::string(eval::to_string(m))});
    if (it == means.end()) return std::nullopt;
    return it->second;
  }
};

inline Summary summarize(const SweepResult& r) {
  Summary s;
  for (const auto& c : r.configs) s.configs.push_back(c.str());
  for (Algorithm a : r.models) s.models.emplace_back(models::to_string(a));
  for (const Cell& cell : r.cells) {
    if (cell.status != CellStatus::ok) continue;
    for (eval::Metric m : eval::kAllMetrics) {
      const double v = cell.report.metric(m).mean;
      if (std::isfinite(v)) {
        s.means[{cell.config.str(), std::string(models::to_string(cell.model)),
                 std::string(eval::to_string(m))}] = v;
      }
    }
  }
  return s;
}

inline Summary read_sweep_csv(std::istream& in) {
  Summary s;
  csv::Row row;
  std::size_t line = 0;
  if (!csv::read_row(in, row, line)) return s;
  if (row.size() < 6 || row[0] != "config" || row[1] != "model" ||
      row[2] != "metric") {
    throw ParseError("unexpected sweep.csv header", 1, 1);
  }
  const std::size_t width = row.size();
  const std::size_t mean_col = width - 3;
  auto remember = [](std::vector<std::string>& list, const std::string& v) {
    if (std::find(list.begin(), list.end(), v) == list.end()) list.push_back(v);
  };
  while (csv::read_row(in, row, line)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields", line, 1);
    }
    remember(s.configs, row[0]);
    remember(s.models, row[1]);
    if (!eval::parse_metric(row[2]) || row[mean_col].empty()) continue;
    const auto v = parse_number(row[mean_col]);
    if (!v) throw ParseError("non-numeric mean '" + row[mean_col] + "'", line, mean_col + 1);
    s.means[{row[0], row[1], row[2]}] = *v;
  }
  return s;
}

/// Configurations that vary `d` alone from the baseline, by level 4..0.
inline std::vector<std::pair<int, std::string>> dimension_series(sita::Dimension d) {
  std::vector<std::pair<int, std::string>> out;
  for (int level = 4; level >= 0; --level) {
    SitaConfig c = sita::parse_config(kBaseline);
    c.level(d) = sita::SitaLevel(level);
    out.emplace_back(level, c.str());
  }
  return out;
}

inline constexpr sita::Dimension kSweptDimensions[] = {
    sita::Dimension::spatial, sita::Dimension::temporal, sita::Dimension::activity};

inline void write_pivot(std::ostream& out, const Summary& s, eval::Metric m,
                        sita::Dimension d) {
  csv::Row header = {"level"};
  header.insert(header.end(), s.models.begin(), s.models.end());
  csv::write_row(out, header);
  for (const auto& [level, config] : dimension_series(d)) {
    if (std::find(s.configs.begin(), s.configs.end(), config) == s.configs.end()) {
      continue;
    }
    csv::Row row = {std::to_string(level)};
    for (const auto& model : s.models) {
      const auto v = s.mean(config, model, m);
      row.push_back(v ? format_number(*v) : std::string());
    }
    csv::write_row(out, row);
  }
}

inline csv::Row degradation_header() {
  return {"config", "model", "metric", "baseline", "value", "absolute",
          "relative_pct"};
}

/// (value - baseline) and 100 * (value - baseline) / baseline for every
/// non-baseline configuration with both means defined.
inline void write_degradation(std::ostream& out, const Summary& s) {
  csv::write_row(out, degradation_header());
  const std::string base(kBaseline);
  for (const auto& config : s.configs) {
    if (config == base) continue;
    for (const auto& model : s.models) {
      for (eval::Metric m : eval::kAllMetrics) {
        const auto b = s.mean(base, model, m);
        const auto v = s.mean(config, model, m);
        if (!b || !v) continue;
        const double abs = *v - *b;
        const std::string rel = *b != 0.0 ? format_number(100.0 * abs / *b) : "";
        csv::write_row(out, {config, model, std::string(eval::to_string(m)),
                             format_number(*b), format_number(*v),
                             format_number(abs), rel});
      }
    }
  }
}

inline std::filesystem::path pivot_name(eval::Metric m, sita::Dimension d) {
  return "pivot_" + std::string(eval::to_string(m)) + "_" +
         std::string(sita::to_string(d)) + ".csv";
}

inline void write_summary_files(const std::filesystem::path& dir, const Summary& s) {
  std::filesystem::create_directories(dir);
  for (eval::Metric m : eval::kAllMetrics) {
    for (sita::Dimension d : kSweptDimensions) {
      std::ofstream out(dir / pivot_name(m, d));
      if (!out) throw Error("cannot write " + (dir / pivot_name(m, d)).string());
      write_pivot(out, s, m, d);
    }
  }
  std::ofstream out(dir / "degradation.csv");
  if (!out) throw Error("cannot write " + (dir / "degradation.csv").string());
  write_degradation(out, s);
}

inline nlohmann::json provenance_json(const SweepResult& r,
                                      const ExperimentConfig& cfg) {
  const Provenance& p = r.provenance;
  nlohmann::json j;
  j["tool"] = "sitabench";
  j["version"] = p.version;
  j["schema_version"] = config::kSchemaVersion;
  j["input"] = {{"source", p.input},
                {"fnv1a64", p.input_hash},
                {"records", p.n_records},
                {"removed_by_cleaning", p.removed_by_cleaning}};
  j["seeds"] = {{"global", p.seed}, {"split", p.split_seed}, {"folds", p.fold_seed}};
  if (cfg.input == config::InputKind::synth) j["seeds"]["synth"] = cfg.synth.seed;
  j["evaluation"] = {{"folds", p.folds},
                     {"shuffle", cfg.shuffle},
                     {"cv_mode", p.cv_mode},
                     {"train_fraction", cfg.split.train_fraction}};
  nlohmann::json configs = nlohmann::json::array();
  for (const auto& c : r.configs) configs.push_back(c.str());
  j["configs"] = configs;
  nlohmann::json model_list = nlohmann::json::array();
  for (Algorithm a : r.models) model_list.push_back(models::to_string(a));
  j["models"] = model_list;
  nlohmann::json skipped = nlohmann::json::array();
  nlohmann::json failed = nlohmann::json::array();
  for (const Cell& c : r.cells) {
    if (c.status == CellStatus::ok) continue;
    nlohmann::json e = {{"config", c.config.str()},
                        {"model", models::to_string(c.model)},
                        {"message", c.message}};
    (c.status == CellStatus::skipped ? skipped : failed).push_back(e);
  }
  j["skipped_cells"] = skipped;
  j["failed_cells"] = failed;
  j["run"] = {{"jobs", p.jobs},
              {"started", p.started},
              {"finished", p.finished},
              {"seconds", p.seconds}};
  return j;
}

/// Runs the sweep and writes every output file into `dir`. sweep.csv and
/// holdout.csv are appended and flushed cell by cell.
inline SweepResult run_to_directory(const ExperimentConfig& cfg, const Dataset& data,
                                    const std::filesystem::path& dir,
                                    const CellSink& progress = {}) {
  std::filesystem::create_directories(dir);
  std::ofstream sweep(dir / "sweep.csv");
  std::ofstream holdout(dir / "holdout.csv");
  if (!sweep || !holdout) throw Error("cannot write into " + dir.string());
  csv::write_row(sweep, eval::score_header(cfg.folds));
  csv::write_row(holdout, holdout_header());
  sweep.flush();
  holdout.flush();
  SweepResult r = run(cfg, data, [&](const Cell& cell) {
    for (const auto& row : cell_rows(cell, cfg.folds)) csv::write_row(sweep, row);
    if (auto row = holdout_row(cell)) csv::write_row(holdout, *row);
    sweep.flush();
    holdout.flush();
    if (progress) progress(cell);
  });
  write_summary_files(dir, summarize(r));
  std::ofstream prov(dir / "provenance.json");
  prov << provenance_json(r, cfg).dump(2) << '\n';
  return r;
}

}  // namespace experiment
}  // namespace sitabench
