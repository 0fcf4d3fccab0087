#include "qadmit/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qadmit {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void expect_object(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      fail(path, "unknown key '" + key + "'");
    }
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& path, const char* key) {
  const json* v = find(obj, key);
  if (!v) fail(path, "missing required key '" + std::string(key) + "'");
  return *v;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

DistributionSpec parse_distribution(const json& obj, const std::string& path) {
  expect_object(obj, path);
  std::string kind = "gamma";
  if (const json* k = find(obj, "kind")) kind = as_string(*k, path + ".kind");
  if (kind == "gamma") {
    if (find(obj, "value")) fail(path, "'value' is only valid with kind=deterministic");
    const double rate = as_number(require(obj, path, "rate"), path + ".rate");
    const double scv = as_number(require(obj, path, "scv"), path + ".scv");
    return gamma_from_rate_scv(rate, scv);
  }
  if (kind == "deterministic") {
    if (find(obj, "rate") || find(obj, "scv")) {
      fail(path, "'rate'/'scv' are only valid with kind=gamma");
    }
    return deterministic_from_value(
        as_number(require(obj, path, "value"), path + ".value"));
  }
  fail(path + ".kind", "expected 'gamma' or 'deterministic', got '" + kind + "'");
}

TopologyConfig parse_topology(const json& obj, const std::string& path) {
  expect_object(obj, path);
  reject_unknown_keys(obj, path, {"nodes", "edges", "branch_probs"});
  TopologyConfig topo;

  const json& nodes = require(obj, path, "nodes");
  if (!nodes.is_array() || nodes.empty()) {
    fail(path + ".nodes", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string npath = path + ".nodes[" + std::to_string(i) + "]";
    const json& n = nodes[i];
    expect_object(n, npath);
    reject_unknown_keys(n, npath, {"servers", "kind", "rate", "scv", "value"});
    NodeConfig nc;
    nc.servers = static_cast<int>(
        as_integer(require(n, npath, "servers"), npath + ".servers"));
    nc.service = parse_distribution(n, npath);
    topo.nodes.push_back(nc);
  }

  if (const json* edges = find(obj, "edges")) {
    if (!edges->is_array()) fail(path + ".edges", "expected an array");
    for (std::size_t i = 0; i < edges->size(); ++i) {
      const std::string epath = path + ".edges[" + std::to_string(i) + "]";
      const json& e = (*edges)[i];
      if (!e.is_array() || e.size() != 2) fail(epath, "expected [from, to]");
      topo.edges.emplace_back(
          static_cast<int>(as_integer(e[0], epath + "[0]")),
          static_cast<int>(as_integer(e[1], epath + "[1]")));
    }
  }

  if (const json* probs = find(obj, "branch_probs")) {
    expect_object(*probs, path + ".branch_probs");
    for (const auto& [key, value] : probs->items()) {
      const std::string bpath = path + ".branch_probs." + key;
      int node = 0;
      try {
        std::size_t used = 0;
        node = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        fail(bpath, "key must be a node index");
      }
      if (!value.is_array()) fail(bpath, "expected an array of probabilities");
      std::vector<double> ps;
      for (std::size_t i = 0; i < value.size(); ++i) {
        ps.push_back(as_number(value[i], bpath + "[" + std::to_string(i) + "]"));
      }
      topo.branch_probs[node] = std::move(ps);
    }
  }
  return topo;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, std::string_view origin) {
  const std::string where(origin);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ConfigError(where + ":" + std::to_string(line) + ": " + e.what());
  }
  expect_object(doc, where);
  reject_unknown_keys(doc, where,
                      {"topology", "arrival", "control", "agent", "run"});

  RunConfig cfg;
  cfg.topology = parse_topology(require(doc, where, "topology"), "topology");
  cfg.arrival = parse_distribution(require(doc, where, "arrival"), "arrival");

  {
    const json& control = require(doc, where, "control");
    expect_object(control, "control");
    reject_unknown_keys(control, "control", {"lambda", "eps_ub", "d_ub"});
    cfg.control = make_reward_params(
        as_number(require(control, "control", "lambda"), "control.lambda"),
        as_number(require(control, "control", "eps_ub"), "control.eps_ub"),
        as_number(require(control, "control", "d_ub"), "control.d_ub"));
  }

  cfg.agent.decay_steps = -1;  // derived from run.steps unless given
  if (const json* agent = find(doc, "agent")) {
    expect_object(*agent, "agent");
    reject_unknown_keys(
        *agent, "agent",
        {"alpha", "beta", "eps_start", "eps_end", "decay_steps"});
    if (const json* v = find(*agent, "alpha"))
      cfg.agent.alpha = as_number(*v, "agent.alpha");
    if (const json* v = find(*agent, "beta"))
      cfg.agent.beta = as_number(*v, "agent.beta");
    if (const json* v = find(*agent, "eps_start"))
      cfg.agent.eps_start = as_number(*v, "agent.eps_start");
    if (const json* v = find(*agent, "eps_end"))
      cfg.agent.eps_end = as_number(*v, "agent.eps_end");
    if (const json* v = find(*agent, "decay_steps"))
      cfg.agent.decay_steps = as_integer(*v, "agent.decay_steps");
  }

  {
    const json& run = require(doc, where, "run");
    expect_object(run, "run");
    reject_unknown_keys(run, "run", {"steps", "warmup", "window", "seeds"});
    cfg.steps = as_integer(require(run, "run", "steps"), "run.steps");
    cfg.warmup = -1;
    if (const json* v = find(run, "warmup"))
      cfg.warmup = as_integer(*v, "run.warmup");
    if (const json* v = find(run, "window"))
      cfg.window = as_integer(*v, "run.window");
    if (const json* v = find(run, "seeds")) {
      if (!v->is_array() || v->empty())
        fail("run.seeds", "expected a non-empty array");
      cfg.seeds.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const std::int64_t s =
            as_integer((*v)[i], "run.seeds[" + std::to_string(i) + "]");
        if (s < 0) fail("run.seeds", "seeds must be non-negative");
        cfg.seeds.push_back(static_cast<std::uint64_t>(s));
      }
    }
  }

  finalize_run_config(cfg);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read config file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string());
}

namespace {

json distribution_to_json(const DistributionSpec& spec) {
  json out;
  if (const auto* g = std::get_if<GammaSpec>(&spec)) {
    out["kind"] = "gamma";
    out["rate"] = g->rate;
    out["scv"] = g->scv;
  } else {
    const auto& d = std::get<DeterministicSpec>(spec);
    out["kind"] = "deterministic";
    out["value"] = d.value;
  }
  return out;
}

}  // namespace

std::string serialize_run_config(const RunConfig& cfg) {
  json doc;
  json nodes = json::array();
  for (const NodeConfig& nc : cfg.topology.nodes) {
    json n;
    n["servers"] = nc.servers;
    for (const auto& [k, v] : distribution_to_json(nc.service).items()) {
      n[k] = v;
    }
    nodes.push_back(std::move(n));
  }
  doc["topology"]["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const auto& [from, to] : cfg.topology.edges) {
    edges.push_back(json::array({from, to}));
  }
  doc["topology"]["edges"] = std::move(edges);
  json probs = json::object();
  for (const auto& [node, ps] : cfg.topology.branch_probs) {
    probs[std::to_string(node)] = ps;
  }
  doc["topology"]["branch_probs"] = std::move(probs);

  doc["arrival"] = distribution_to_json(cfg.arrival);

  doc["control"]["lambda"] = cfg.control.lambda;
  doc["control"]["eps_ub"] = cfg.control.eps_ub;
  doc["control"]["d_ub"] = cfg.control.d_ub;

  doc["agent"]["alpha"] = cfg.agent.alpha;
  doc["agent"]["beta"] = cfg.agent.beta;
  doc["agent"]["eps_start"] = cfg.agent.eps_start;
  doc["agent"]["eps_end"] = cfg.agent.eps_end;
  doc["agent"]["decay_steps"] = cfg.agent.decay_steps;

  doc["run"]["steps"] = cfg.steps;
  doc["run"]["warmup"] = cfg.warmup;
  doc["run"]["window"] = cfg.window;
  doc["run"]["seeds"] = cfg.seeds;

  return doc.dump(2) + "\n";
}

}  // namespace qadmit
