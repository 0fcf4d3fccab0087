#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "qadmit/metrics_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const char* kCli = QADMIT_CLI_PATH;

struct RunOutput {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_root() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() /
                 ("qadmit_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

RunOutput run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const fs::path out = scratch_root() / ("stdout_" + std::to_string(counter));
  const fs::path err = scratch_root() / ("stderr_" + std::to_string(counter));
  ++counter;
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + kCli +
                          "\" " + args + " > " + out.string() + " 2> " +
                          err.string();
  const int raw = std::system(cmd.c_str());
  RunOutput result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = qadmit::read_file(out);
  result.err = qadmit::read_file(err);
  return result;
}

fs::path small_config() {
  static const fs::path path = [] {
    const fs::path p = scratch_root() / "small.config";
    std::ofstream f(p);
    f << R"({
  "topology": {
    "nodes": [{"servers": 1, "rate": 1.0, "scv": 1.0}],
    "edges": []
  },
  "arrival": {"kind": "gamma", "rate": 0.8, "scv": 1.0},
  "control": {"lambda": 4.0, "eps_ub": 0.1, "d_ub": 8.0},
  "agent": {"alpha": 0.02, "beta": 0.002, "eps_start": 0.3, "eps_end": 0.02,
            "decay_steps": 2000},
  "run": {"steps": 4000, "warmup": 400, "window": 400, "seeds": [1, 2]}
})";
    return p;
  }();
  return path;
}

}  // namespace

TEST_CASE("train writes its artifacts and is byte-reproducible") {
  const fs::path out1 = scratch_root() / "train1";
  const fs::path out2 = scratch_root() / "train2";
  const std::string base = "train --config " + small_config().string();

  const RunOutput a = run_cli(base + " --out " + out1.string());
  REQUIRE(a.exit_code == 0);
  REQUIRE(fs::exists(out1 / "metrics.csv"));
  REQUIRE(fs::exists(out1 / "qtable.txt"));
  REQUIRE(fs::exists(out1 / "summary.json"));

  const RunOutput b = run_cli(base + " --out " + out2.string());
  REQUIRE(b.exit_code == 0);
  CHECK(qadmit::read_file(out1 / "metrics.csv") ==
        qadmit::read_file(out2 / "metrics.csv"));
  CHECK(qadmit::read_file(out1 / "qtable.txt") ==
        qadmit::read_file(out2 / "qtable.txt"));
  CHECK(qadmit::read_file(out1 / "summary.json") ==
        qadmit::read_file(out2 / "summary.json"));

  const json summary = json::parse(qadmit::read_file(out1 / "summary.json"));
  REQUIRE(summary["per_seed"].size() == 2);
  CHECK(summary["per_seed"][0]["seed"] == 1);
  CHECK(summary["per_seed"][1]["seed"] == 2);
  CHECK(summary["aggregate"].contains("p_violation_accept"));

  const std::string csv = qadmit::read_file(out1 / "metrics.csv");
  CHECK(csv.rfind("step,p_violation_accept,objective,acceptance_rate,"
                  "throughput,goodput,r_bar,seed\n", 0) == 0);
}

TEST_CASE("QADMIT_SEED overrides the config seed list") {
  const fs::path out = scratch_root() / "train_env_seed";
  const RunOutput r = run_cli("train --config " + small_config().string() +
                                  " --out " + out.string(),
                              "QADMIT_SEED=9");
  REQUIRE(r.exit_code == 0);
  const json summary = json::parse(qadmit::read_file(out / "summary.json"));
  REQUIRE(summary["per_seed"].size() == 1);
  CHECK(summary["per_seed"][0]["seed"] == 9);
}

TEST_CASE("malformed config exits 1 with a line-anchored message") {
  const fs::path bad = scratch_root() / "bad.config";
  std::ofstream(bad) << "{\n  \"topology\": {\n  oops\n";
  const RunOutput r = run_cli("train --config " + bad.string() + " --out " +
                              (scratch_root() / "bad_out").string());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find(":3") != std::string::npos);
}

TEST_CASE("branch probabilities that do not sum to one name the node") {
  const fs::path bad = scratch_root() / "branch.config";
  std::ofstream(bad) << R"({
  "topology": {
    "nodes": [
      {"servers": 1, "rate": 1.0, "scv": 1.0},
      {"servers": 1, "rate": 1.0, "scv": 1.0},
      {"servers": 1, "rate": 1.0, "scv": 1.0}
    ],
    "edges": [[0, 1], [0, 2]],
    "branch_probs": {"0": [0.5, 0.4]}
  },
  "arrival": {"kind": "gamma", "rate": 0.8, "scv": 1.0},
  "control": {"lambda": 4.0, "eps_ub": 0.1, "d_ub": 8.0},
  "run": {"steps": 1000}
})";
  const RunOutput r = run_cli("train --config " + bad.string() + " --out " +
                              (scratch_root() / "branch_out").string());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("node 0") != std::string::npos);
}

TEST_CASE("unwritable output directory exits 2") {
  const fs::path blocker = scratch_root() / "blocker";
  std::ofstream(blocker) << "a file, not a directory";
  const RunOutput r =
      run_cli("train --config " + small_config().string() + " --out " +
              (blocker / "nested").string());
  CHECK(r.exit_code == 2);
}

TEST_CASE("sweep requires a non-empty lambda list") {
  const RunOutput r = run_cli("sweep --config " + small_config().string() +
                              " --lambdas \"\" --out " +
                              (scratch_root() / "sweep_empty").string());
  CHECK(r.exit_code == 1);
}

TEST_CASE("sweep writes sweep.csv and prints the chosen lambda") {
  const fs::path out = scratch_root() / "sweep";
  const RunOutput r = run_cli("sweep --config " + small_config().string() +
                              " --lambdas 0,2 --seeds 1 --steps 2000 --out " +
                              out.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("lambda_star=") != std::string::npos);
  CHECK(r.out.find("kkt_residual=") != std::string::npos);
  const std::string csv = qadmit::read_file(out / "sweep.csv");
  CHECK(csv.rfind("lambda,g_tilde,p_violation_accept,objective,"
                  "acceptance_rate,throughput,goodput,seeds\n", 0) == 0);
  // 2 lambdas x (1 seed row + 1 aggregate row) + header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("baseline writes metrics and evaluate consumes a trained table") {
  const fs::path train_out = scratch_root() / "pipe_train";
  REQUIRE(run_cli("train --config " + small_config().string() + " --out " +
                  train_out.string())
              .exit_code == 0);

  const fs::path base_out = scratch_root() / "pipe_baseline";
  const RunOutput b = run_cli("baseline --config " + small_config().string() +
                              " --out " + base_out.string());
  REQUIRE(b.exit_code == 0);
  const json bs = json::parse(qadmit::read_file(base_out / "summary.json"));
  CHECK(bs["per_seed"][0]["acceptance_rate"] == 1.0);

  const RunOutput e = run_cli("evaluate --config " + small_config().string() +
                              " --qtable " +
                              (train_out / "qtable.txt").string());
  REQUIRE(e.exit_code == 0);
  const json es = json::parse(e.out);
  CHECK(es["per_seed"].size() == 2);
}

TEST_CASE("evaluate rejects corrupt tables and dimension mismatches") {
  const fs::path corrupt = scratch_root() / "corrupt.qtable";
  std::ofstream(corrupt) << "0 A 1.0\nwhat even is this\n";
  const RunOutput r = run_cli("evaluate --config " + small_config().string() +
                              " --qtable " + corrupt.string());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("row 2") != std::string::npos);

  const fs::path mismatched = scratch_root() / "dim.qtable";
  std::ofstream(mismatched) << "0,0 A 1.0\n0,0 R 0.0\n";
  const RunOutput m = run_cli("evaluate --config " + small_config().string() +
                              " --qtable " + mismatched.string());
  CHECK(m.exit_code == 1);
  CHECK(m.err.find("dimension") != std::string::npos);

  const fs::path empty = scratch_root() / "empty.qtable";
  std::ofstream(empty) << "";
  const RunOutput ok = run_cli("evaluate --config " + small_config().string() +
                               " --qtable " + empty.string());
  REQUIRE(ok.exit_code == 0);
  const json es = json::parse(ok.out);
  CHECK(es["per_seed"][0]["unseen_state_decisions"] == 4000);
  CHECK(es["per_seed"][0]["acceptance_rate"] == 1.0);
}

TEST_CASE("simulate smoke run emits a summary and an event trace") {
  const fs::path out = scratch_root() / "simulate";
  const RunOutput r = run_cli("simulate --config " + small_config().string() +
                              " --steps 500 --trace --out " + out.string());
  REQUIRE(r.exit_code == 0);
  const json s = json::parse(r.out);
  CHECK(s["per_seed"][0]["acceptance_rate"] == 1.0);
  const std::string trace = qadmit::read_file(out / "trace.txt");
  CHECK(trace.find(" arrival 0 ") != std::string::npos);
  CHECK(trace.find(" depart 0 ") != std::string::npos);

  const RunOutput again =
      run_cli("simulate --config " + small_config().string() +
              " --steps 500 --trace --out " + out.string());
  CHECK(again.out == r.out);  // deterministic stdout as well
}

TEST_CASE("bundled scenario configs load and validate") {
  const fs::path configs(QADMIT_CONFIG_DIR);
  for (const char* name : {"tandem.config", "acyclic.config"}) {
    const RunOutput r = run_cli("simulate --config " +
                                (configs / name).string() + " --steps 200");
    CHECK(r.exit_code == 0);
  }
}
