// Command-line front end: train | sweep | baseline | evaluate | simulate.
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qadmit/config.hpp"
#include "qadmit/harness.hpp"
#include "qadmit/metrics_io.hpp"

namespace fs = std::filesystem;
using namespace qadmit;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string seeds;
  std::int64_t steps = 0;  // 0 = keep config value
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string part =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    try {
      std::size_t used = 0;
      const long long v = std::stoll(part, &used);
      if (used != part.size() || v < 0) throw std::invalid_argument(part);
      seeds.push_back(static_cast<std::uint64_t>(v));
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + part + "' in --seeds");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (seeds.empty()) throw ConfigError("--seeds must be non-empty");
  return seeds;
}

std::vector<double> parse_lambda_list(const std::string& text) {
  std::vector<double> grid;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string part =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    try {
      std::size_t used = 0;
      const double v = std::stod(part, &used);
      if (used != part.size() || v < 0.0) throw std::invalid_argument(part);
      grid.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("--lambdas expects a comma-separated list of "
                        "non-negative numbers, got '" + text + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (grid.empty()) throw ConfigError("--lambdas must be non-empty");
  return grid;
}

RunConfig load_with_overrides(const CommonOpts& opts) {
  RunConfig cfg = load_run_config(opts.config_path);
  if (opts.steps > 0) {
    // A steps override re-derives warmup (10%) and the decay horizon (50%).
    cfg.steps = opts.steps;
    cfg.warmup = opts.steps / 10;
    cfg.agent.decay_steps = opts.steps / 2;
  }
  if (const char* env = std::getenv("QADMIT_SEED")) {
    cfg.seeds = parse_seed_list(env);
  }
  if (!opts.seeds.empty()) {
    cfg.seeds = parse_seed_list(opts.seeds);
  }
  finalize_run_config(cfg);
  return cfg;
}

fs::path prepare_out_dir(const std::string& out) {
  const fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory: " + out);
  }
  return dir;
}

std::vector<RunSummary> summaries_of(const std::vector<TrainResult>& results) {
  std::vector<RunSummary> out;
  out.reserve(results.size());
  for (const auto& r : results) out.push_back(r.summary);
  return out;
}

MetricsSeries merged_metrics(const std::vector<TrainResult>& results) {
  MetricsSeries all;
  for (const auto& r : results) {
    all.insert(all.end(), r.metrics.begin(), r.metrics.end());
  }
  return all;
}

int cmd_train(const CommonOpts& opts) {
  const RunConfig cfg = load_with_overrides(opts);
  const fs::path dir = prepare_out_dir(opts.out_dir);
  const std::vector<TrainResult> results = train_all(cfg);

  write_file(dir / "metrics.csv", metrics_csv(merged_metrics(results)));
  write_file(dir / "qtable.txt", results.front().q.to_text());
  write_file(dir / "summary.json", summary_json(summaries_of(results)));
  std::cout << "train: wrote metrics.csv, qtable.txt, summary.json to "
            << dir.string() << "\n";
  return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& lambdas) {
  const RunConfig cfg = load_with_overrides(opts);
  const std::vector<double> grid = parse_lambda_list(lambdas);
  const fs::path dir = prepare_out_dir(opts.out_dir);

  const SweepResult sweep = lambda_sweep(cfg, grid);
  write_file(dir / "sweep.csv", sweep_csv(sweep, cfg.seeds));

  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", sweep.lambda_star);
  std::cout << "lambda_star=" << buf;
  std::snprintf(buf, sizeof(buf), "%.6g", sweep.kkt_residual);
  std::cout << " kkt_residual=" << buf << " constraint_satisfied="
            << (sweep.constraint_satisfied_at_star ? "true" : "false") << "\n";
  return 0;
}

int cmd_baseline(const CommonOpts& opts) {
  const RunConfig cfg = load_with_overrides(opts);
  const fs::path dir = prepare_out_dir(opts.out_dir);
  const std::vector<TrainResult> results = baseline_all(cfg);
  write_file(dir / "metrics.csv", metrics_csv(merged_metrics(results)));
  write_file(dir / "summary.json", summary_json(summaries_of(results)));
  std::cout << "baseline: wrote metrics.csv, summary.json to " << dir.string()
            << "\n";
  return 0;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& qtable_path) {
  const RunConfig cfg = load_with_overrides(opts);
  const QTable table = QTable::from_text(read_file(qtable_path));
  const int dim = table.state_dimension();
  const int nodes = static_cast<int>(cfg.topology.nodes.size());
  if (dim >= 0 && dim != nodes) {
    throw ConfigError("qtable states have dimension " + std::to_string(dim) +
                      " but the topology has " + std::to_string(nodes) +
                      " nodes");
  }
  const std::vector<TrainResult> results = evaluate_all(cfg, table);
  std::cout << summary_json(summaries_of(results));
  return 0;
}

int cmd_simulate(const CommonOpts& opts, bool trace) {
  const RunConfig cfg = load_with_overrides(opts);
  std::optional<fs::path> dir;
  if (!opts.out_dir.empty()) {
    dir = prepare_out_dir(opts.out_dir);
  }

  std::ofstream trace_file;
  std::ostream* trace_sink = nullptr;
  if (trace) {
    if (dir) {
      trace_file.open(*dir / "trace.txt", std::ios::binary | std::ios::trunc);
      if (!trace_file) throw IoError("cannot write trace.txt");
      trace_sink = &trace_file;
    } else {
      trace_sink = &std::cout;
    }
  }

  const TrainResult result = run_policy(cfg, cfg.seeds.front(),
                                        PolicyMode::AlwaysAccept, nullptr, 0.0,
                                        trace_sink);
  if (dir) {
    write_file(*dir / "metrics.csv", metrics_csv(result.metrics));
    write_file(*dir / "summary.json", summary_json({result.summary}));
  }
  std::cout << summary_json({result.summary});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Queueing-network admission control simulator and R-learning "
               "trainer"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string lambdas;
  std::string qtable_path;
  bool trace = false;

  const auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--config", opts.config_path, "Run config file (JSON)")
        ->required();
    if (needs_out) {
      cmd->add_option("--out", opts.out_dir, "Output directory")->required();
    }
    cmd->add_option("--seeds", opts.seeds, "Comma-separated seed list override");
    cmd->add_option("--steps", opts.steps, "Override run.steps");
  };

  CLI::App* train = app.add_subcommand("train", "Train the admission controller");
  add_common(train, true);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Train one controller per lambda and pick the dual minimizer");
  add_common(sweep, true);
  sweep->add_option("--lambdas", lambdas, "Comma-separated lambda grid")
      ->required();

  CLI::App* baseline =
      app.add_subcommand("baseline", "Run with every arrival accepted");
  add_common(baseline, true);

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Greedy rollout of a saved Q table");
  add_common(evaluate, false);
  evaluate->add_option("--qtable", qtable_path, "Q table file from train")
      ->required();
  evaluate->add_option("--out", opts.out_dir, "Unused; metrics go to stdout");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Simulation-only smoke run (always accept)");
  add_common(simulate, false);
  simulate->add_option("--out", opts.out_dir, "Optional output directory");
  simulate->add_flag("--trace", trace, "Dump one line per event");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) return cmd_train(opts);
    if (sweep->parsed()) return cmd_sweep(opts, lambdas);
    if (baseline->parsed()) return cmd_baseline(opts);
    if (evaluate->parsed()) return cmd_evaluate(opts, qtable_path);
    if (simulate->parsed()) return cmd_simulate(opts, trace);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
