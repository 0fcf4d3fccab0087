#include "qadmit/metrics_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace qadmit {
namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr aggregate(const std::vector<double>& xs) {
  MeanStderr out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                            static_cast<double>(xs.size()));
  }
  return out;
}

}  // namespace

std::string metrics_csv(MetricsSeries rows) {
  std::sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return a.seed != b.seed ? a.seed < b.seed : a.step < b.step;
  });
  std::string out =
      "step,p_violation_accept,objective,acceptance_rate,throughput,goodput,"
      "r_bar,seed\n";
  for (const MetricsRow& r : rows) {
    out += std::to_string(r.step) + ',' + fmt(r.p_violation_accept) + ',' +
           fmt(r.objective) + ',' + fmt(r.acceptance_rate) + ',' +
           fmt(r.throughput) + ',' + fmt(r.goodput) + ',' + fmt(r.r_bar) +
           ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::string sweep_csv(const SweepResult& sweep,
                      const std::vector<std::uint64_t>& seeds) {
  std::string out =
      "lambda,g_tilde,p_violation_accept,objective,acceptance_rate,throughput,"
      "goodput,seeds\n";
  std::string joined;
  for (std::uint64_t s : seeds) {
    if (!joined.empty()) joined += ';';
    joined += std::to_string(s);
  }
  const std::size_t n_seeds = seeds.size();
  for (std::size_t gi = 0; gi < sweep.per_lambda.size(); ++gi) {
    for (std::size_t si = 0; si < n_seeds; ++si) {
      const SweepRecord& r = sweep.records[gi * n_seeds + si];
      out += fmt(r.lambda) + ',' + fmt(r.g_tilde) + ',' +
             fmt(r.p_violation_accept) + ',' + fmt(r.objective) + ',' +
             fmt(r.acceptance_rate) + ',' + fmt(r.throughput) + ',' +
             fmt(r.goodput) + ',' + std::to_string(r.seed) + '\n';
    }
    const SweepLambdaSummary& s = sweep.per_lambda[gi];
    out += fmt(s.lambda) + ',' + fmt(s.g_tilde_mean) + ',' +
           fmt(s.p_violation_mean) + ',' + fmt(s.objective_mean) + ',' +
           fmt(s.acceptance_mean) + ',' + fmt(s.throughput_mean) + ',' +
           fmt(s.goodput_mean) + ',' + joined + '\n';
  }
  return out;
}

std::string summary_json(const std::vector<RunSummary>& per_seed) {
  using json = nlohmann::ordered_json;
  json doc;
  json seeds = json::array();
  std::vector<double> p_viol, objective, acceptance, throughput, goodput,
      r_bar, g_tilde;
  for (const RunSummary& s : per_seed) {
    json row;
    row["seed"] = s.seed;
    row["step"] = s.final_window.step;
    row["p_violation_accept"] = s.final_window.p_violation_accept;
    row["objective"] = s.final_window.objective;
    row["acceptance_rate"] = s.final_window.acceptance_rate;
    row["throughput"] = s.final_window.throughput;
    row["goodput"] = s.final_window.goodput;
    row["r_bar"] = s.final_window.r_bar;
    row["g_tilde"] = s.g_tilde;
    row["steps"] = s.steps;
    row["accepted"] = s.accepted;
    row["rejected"] = s.rejected;
    row["departed"] = s.departed;
    row["violations"] = s.violations;
    row["rejections_would_meet"] = s.rejections_would_meet;
    row["completed_experiences"] = s.completed_experiences;
    row["reward_sum"] = s.reward_sum;
    row["unseen_state_decisions"] = s.unseen_state_decisions;
    seeds.push_back(std::move(row));

    p_viol.push_back(s.final_window.p_violation_accept);
    objective.push_back(s.final_window.objective);
    acceptance.push_back(s.final_window.acceptance_rate);
    throughput.push_back(s.final_window.throughput);
    goodput.push_back(s.final_window.goodput);
    r_bar.push_back(s.final_window.r_bar);
    g_tilde.push_back(s.g_tilde);
  }
  doc["per_seed"] = std::move(seeds);

  const auto put = [](json& where, const char* key,
                      const std::vector<double>& xs) {
    const MeanStderr m = aggregate(xs);
    where[key]["mean"] = m.mean;
    where[key]["stderr"] = m.stderr_;
  };
  json agg;
  put(agg, "p_violation_accept", p_viol);
  put(agg, "objective", objective);
  put(agg, "acceptance_rate", acceptance);
  put(agg, "throughput", throughput);
  put(agg, "goodput", goodput);
  put(agg, "r_bar", r_bar);
  put(agg, "g_tilde", g_tilde);
  doc["aggregate"] = std::move(agg);
  return doc.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw IoError("short write: " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read: " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text;
}

}  // namespace qadmit
