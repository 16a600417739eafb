#include "ugcl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "ugcl/export.hpp"
#include "ugcl/graph/dataset_io.hpp"
#include "ugcl/graph/masking.hpp"
#include "ugcl/graph/sbm.hpp"
#include "ugcl/graph/splits.hpp"
#include "ugcl/log.hpp"

namespace ugcl {

const Metrics* CellResult::find(const std::string& method) const {
  for (const auto& m : methods)
    if (m.method == method) return &m.metrics;
  return nullptr;
}

graph::GraphDataset load_experiment_dataset(const ExperimentConfig& config) {
  if (config.dataset == "sbm") return graph::generate_sbm(config.sbm.spec());
  return graph::load_dataset(config.dataset);
}

CellResult run_cell(const graph::GraphDataset& base, const ExperimentConfig& config, std::size_t rate_index,
                    std::uint64_t seed, bool keep_artifacts) {
  CellResult cell;
  cell.rate_index = rate_index;
  cell.seed = seed;
  const auto rates = config.rate_pairs();
  std::tie(cell.feature_rate, cell.edge_rate) = rates.at(rate_index);
  const std::string digest = config_digest(config);
  try {
    const graph::GraphDataset masked =
        graph::apply_mask(base, {cell.feature_rate, cell.edge_rate, config.mask_mode, seed});
    const graph::Splits splits = graph::make_splits(base, {}, seed);

    if (config.baseline != BaselineMode::kOnly) {
      ReconState recon = run_ugcl(masked, config.ugcl, seed);
      ScoredRun run = train_downstream(masked, recon, splits, config.downstream, seed);
      run.metrics.config_digest = digest;
      cell.methods.push_back({kMethodUgclGcn, run.metrics});
      if (keep_artifacts) {
        cell.fusion = run.result.fusion;
        cell.recon = std::move(recon);
      } else {
        // The loss history is always exported; drop the large matrices.
        ReconState slim;
        slim.history = std::move(recon.history);
        slim.final_loss = recon.final_loss;
        cell.recon = std::move(slim);
      }
    }
    if (config.baseline != BaselineMode::kOff) {
      ScoredRun run = train_plain_gcn(masked, splits, config.downstream, seed);
      run.metrics.config_digest = digest;
      cell.methods.push_back({kMethodZeroFillGcn, run.metrics});
    }
  } catch (const std::exception& e) {
    char where[96];
    std::snprintf(where, sizeof where, "feature_rate=%g edge_rate=%g seed=%llu: ", cell.feature_rate,
                  cell.edge_rate, static_cast<unsigned long long>(seed));
    cell.error = where + std::string(e.what());
  }
  return cell;
}

std::vector<SummaryRow> summarize(const ExperimentConfig& config, const std::vector<CellResult>& cells) {
  std::vector<std::string> methods;
  if (config.baseline != BaselineMode::kOnly) methods.push_back(kMethodUgclGcn);
  if (config.baseline != BaselineMode::kOff) methods.push_back(kMethodZeroFillGcn);

  std::vector<SummaryRow> rows;
  const auto rates = config.rate_pairs();
  for (std::size_t r = 0; r < rates.size(); ++r) {
    for (const auto& method : methods) {
      std::vector<double> acc;
      for (const auto& cell : cells)
        if (cell.rate_index == r)
          if (const Metrics* m = cell.find(method)) acc.push_back(m->test_accuracy);
      SummaryRow row{rates[r].first, rates[r].second, method, acc.size(), 0.0, 0.0};
      if (!acc.empty()) {
        double total = 0.0;
        for (double a : acc) total += a;
        row.mean_test_accuracy = total / static_cast<double>(acc.size());
        if (acc.size() > 1) {
          double sq = 0.0;
          for (double a : acc) sq += (a - row.mean_test_accuracy) * (a - row.mean_test_accuracy);
          row.sd_test_accuracy = std::sqrt(sq / static_cast<double>(acc.size() - 1));
        }
      }
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string cell_stem(const CellResult& cell) {
  return "f" + fixed(cell.feature_rate, 2) + "_e" + fixed(cell.edge_rate, 2) + "_s" + std::to_string(cell.seed);
}

const char* kRunsHeader = "feature_rate,edge_rate,seed,method,train_acc,val_acc,test_acc,best_epoch,config_digest\n";

void write_run_rows(std::ostream& os, const CellResult& cell) {
  for (const auto& m : cell.methods) {
    os << fixed(cell.feature_rate, 4) << ',' << fixed(cell.edge_rate, 4) << ',' << cell.seed << ',' << m.method
       << ',' << fixed(m.metrics.train_accuracy, 6) << ',' << fixed(m.metrics.val_accuracy, 6) << ','
       << fixed(m.metrics.test_accuracy, 6) << ',' << m.metrics.best_epoch << ',' << m.metrics.config_digest
       << '\n';
  }
}

/// Files that depend on a single cell; written by the collecting thread only.
void write_cell_artifacts(const ExperimentConfig& config, const std::string& digest, const CellResult& cell) {
  const RunTag tag{digest, cell.seed};
  const auto& dir = config.out_dir;
  if (cell.recon && !cell.recon->history.empty())
    export_loss_log(dir / ("ugcl_loss_" + cell_stem(cell) + ".csv"), tag, cell.recon->history);
  if (config.dump_embeddings && cell.fusion && cell.recon) {
    export_embeddings(dir / ("embeddings_" + cell_stem(cell) + ".tsv"), tag, *cell.fusion, &*cell.recon);
    export_fusion_weights(dir / ("fusion_weights_" + cell_stem(cell) + ".tsv"), tag, cell.fusion->weights);
  }
  if (config.dump_structure && cell.recon && !cell.recon->a_sr.empty())
    export_structure(dir / ("structure_" + cell_stem(cell) + ".tsv"), tag, cell.recon->a_sr);
}

void write_summaries(const ExperimentConfig& config, const ExperimentReport& report) {
  const auto& dir = config.out_dir;
  {
    std::ofstream os(dir / "summary.csv", std::ios::trunc);
    os << "feature_rate,edge_rate,method,runs,mean_test_acc,sd_test_acc,config_digest\n";
    for (const auto& row : report.summary) {
      os << fixed(row.feature_rate, 4) << ',' << fixed(row.edge_rate, 4) << ',' << row.method << ',' << row.runs
         << ',' << fixed(row.mean_test_accuracy, 6) << ',' << fixed(row.sd_test_accuracy, 6) << ','
         << report.config_digest << '\n';
    }
    if (!os) throw std::runtime_error("cannot write summary.csv");
  }
  {
    nlohmann::ordered_json j;
    j["config_digest"] = report.config_digest;
    nlohmann::ordered_json echo;
    for (const auto& key : config_keys()) {
      if (key == "out" || key == "workers") continue;
      echo[key] = get_config_value(config, key);
    }
    j["config"] = echo;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : report.summary) {
      j["rows"].push_back({{"feature_rate", row.feature_rate},
                           {"edge_rate", row.edge_rate},
                           {"method", row.method},
                           {"runs", row.runs},
                           {"mean_test_acc", row.mean_test_accuracy},
                           {"sd_test_acc", row.sd_test_accuracy}});
    }
    j["failed_cells"] = nlohmann::ordered_json::array();
    for (const auto& cell : report.cells)
      if (!cell.ok()) j["failed_cells"].push_back(cell.error);
    std::ofstream os(dir / "summary.json", std::ios::trunc);
    os << j.dump(2) << '\n';
    if (!os) throw std::runtime_error("cannot write summary.json");
  }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, bool write_files) {
  config.validate();
  const graph::GraphDataset base = load_experiment_dataset(config);
  if (!base.has_labels()) throw ConfigError("dataset has no labels; node classification needs labels.tsv");

  ExperimentReport report;
  report.config_digest = config_digest(config);
  const std::size_t rate_count = config.rate_pairs().size();
  const std::size_t total = rate_count * config.seeds.size();
  const bool keep_artifacts = config.dump_embeddings || config.dump_structure;

  std::ofstream runs;
  if (write_files) {
    std::filesystem::create_directories(config.out_dir);
    runs.open(config.out_dir / "runs.csv", std::ios::trunc);
    if (!runs) throw std::runtime_error("cannot write " + (config.out_dir / "runs.csv").string());
    runs << kRunsHeader << std::flush;
  }

  std::mutex mutex;
  std::condition_variable ready;
  std::deque<CellResult> finished;
  std::atomic<std::size_t> next{0};

  std::size_t workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, total);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t job = next++; job < total; job = next++) {
          const std::size_t r = job / config.seeds.size();
          const std::uint64_t seed = config.seeds[job % config.seeds.size()];
          CellResult cell = run_cell(base, config, r, seed, keep_artifacts);
          {
            std::lock_guard lock(mutex);
            finished.push_back(std::move(cell));
          }
          ready.notify_one();
        }
      });
    }

    std::size_t collected = 0;
    while (collected < total) {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return !finished.empty(); });
      CellResult cell = std::move(finished.front());
      finished.pop_front();
      lock.unlock();
      ++collected;
      if (!cell.ok()) log(LogLevel::kError, cell.error);
      if (write_files) {
        write_run_rows(runs, cell);
        runs.flush();
        write_cell_artifacts(config, report.config_digest, cell);
      }
      log_info("cell " + std::to_string(collected) + "/" + std::to_string(total) + " done");
      if (!keep_artifacts) cell.recon.reset();
      report.cells.push_back(std::move(cell));
    }
  }

  const auto seed_pos = [&](std::uint64_t seed) {
    return std::find(config.seeds.begin(), config.seeds.end(), seed) - config.seeds.begin();
  };
  std::sort(report.cells.begin(), report.cells.end(), [&](const CellResult& a, const CellResult& b) {
    return a.rate_index != b.rate_index ? a.rate_index < b.rate_index : seed_pos(a.seed) < seed_pos(b.seed);
  });
  report.all_ok = std::all_of(report.cells.begin(), report.cells.end(), [](const CellResult& c) { return c.ok(); });
  report.summary = summarize(config, report.cells);

  if (write_files) {
    runs.close();
    std::ofstream sorted(config.out_dir / "runs.csv", std::ios::trunc);
    sorted << kRunsHeader;
    for (const auto& cell : report.cells) write_run_rows(sorted, cell);
    write_summaries(config, report);
  }
  return report;
}

}  // namespace ugcl
