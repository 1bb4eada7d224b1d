#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dyncore.hpp"
#include "error.hpp"
#include "iosim.hpp"
#include "machine.hpp"
#include "workload.hpp"

namespace csperf {

using json = nlohmann::json;

// One dynamical-core case. `nodes` with more than one entry makes the case a
// strong-scaling study; `threads` with more than one entry a thread sweep
// (ranks per node then follow from the core count).
struct dyncore_case {
  int panel_size = 1;
  int levels = 1;
  std::vector<int> nodes = {1};
  int ranks_per_node = 0;  // 0: cores_per_node / threads
  std::vector<int> threads = {1};

  friend bool operator==(const dyncore_case&, const dyncore_case&) = default;
};

struct run_options {
  int timesteps = 96;
  decomposition_mode mode = decomposition_mode::exchange_halos;
  int halo_depth = 1;
  int redundant_depth = 0;
  std::int64_t bytes_per_cell = default_bytes_per_cell;

  friend bool operator==(const run_options&, const run_options&) = default;
};

inline const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes = {
      "threads", "nodes", "buffer_bytes", "servers", "pools", "striping"};
  return axes;
}

inline bool is_io_axis(const std::string& axis) {
  return axis == "buffer_bytes" || axis == "servers" || axis == "pools" ||
         axis == "striping";
}

struct scenario_config {
  machine_config machine = find_machine("ARCHER2");
  cost_model cost = cost_preset("archer2-cray");
  std::vector<dyncore_case> cases;
  run_options run;
  std::optional<io_scenario> io;
  std::map<std::string, std::vector<double>> sweep;

  friend bool operator==(const scenario_config&, const scenario_config&) = default;
};

// --- reading --------------------------------------------------------------

namespace detail {

inline std::string child(const std::string& where, const std::string& key) {
  return where + "/" + key;
}

inline void check_keys(const json& obj, const std::string& where,
                       const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw config_error(where.empty() ? "/" : where, "expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw config_error(child(where, key), "unknown key");
}

inline const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline std::int64_t as_int(const json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == std::trunc(d) && std::fabs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  throw config_error(where, "expected an integer");
}

inline double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw config_error(where, "expected a number");
  return v.get<double>();
}

inline std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw config_error(where, "expected a string");
  return v.get<std::string>();
}

template <class T>
void read_int(const json& obj, const std::string& where, const std::string& key, T& out) {
  if (const json* v = find(obj, key)) {
    const std::int64_t x = as_int(*v, child(where, key));
    if (!std::in_range<T>(x))
      throw config_error(child(where, key), "integer out of range");
    out = static_cast<T>(x);
  }
}

inline void read_number(const json& obj, const std::string& where,
                        const std::string& key, double& out) {
  if (const json* v = find(obj, key)) out = as_number(*v, child(where, key));
}

inline void read_string(const json& obj, const std::string& where,
                        const std::string& key, std::string& out) {
  if (const json* v = find(obj, key)) out = as_string(*v, child(where, key));
}

// An integer or a non-empty list of integers.
inline std::vector<int> read_int_list(const json& v, const std::string& where) {
  std::vector<int> out;
  if (v.is_array()) {
    if (v.empty()) throw config_error(where, "list must not be empty");
    for (std::size_t k = 0; k < v.size(); ++k)
      out.push_back(static_cast<int>(as_int(v[k], where + "/" + std::to_string(k))));
  } else {
    out.push_back(static_cast<int>(as_int(v, where)));
  }
  return out;
}

inline machine_config read_machine(const json& v, const std::string& where) {
  if (v.is_string()) {
    try {
      return find_machine(v.get<std::string>());
    } catch (const invalid_argument& e) {
      throw config_error(where, e.what());
    }
  }
  check_keys(v, where,
             {"name", "cores_per_node", "cpus_per_node", "clock_ghz",
              "numa_domains_per_cpu", "l3_mb_per_cpu", "interconnect",
              "max_nodes", "node_memory_bytes", "base"});
  machine_config m;
  if (const json* base = find(v, "base")) m = read_machine(*base, child(where, "base"));
  read_string(v, where, "name", m.name);
  read_int(v, where, "cores_per_node", m.cores_per_node);
  read_int(v, where, "cpus_per_node", m.cpus_per_node);
  read_number(v, where, "clock_ghz", m.clock_ghz);
  read_int(v, where, "numa_domains_per_cpu", m.numa_domains_per_cpu);
  read_number(v, where, "l3_mb_per_cpu", m.l3_mb_per_cpu);
  read_string(v, where, "interconnect", m.interconnect);
  read_int(v, where, "max_nodes", m.max_nodes);
  read_int(v, where, "node_memory_bytes", m.node_memory_bytes);
  return m;
}

inline cost_model read_cost(const json& v, const std::string& where,
                            const machine_config& machine) {
  if (v.is_string()) {
    try {
      return cost_preset(v.get<std::string>());
    } catch (const invalid_argument& e) {
      throw config_error(where, e.what());
    }
  }
  check_keys(v, where,
             {"preset", "c_cell", "p2p_alpha", "p2p_beta", "coll_alpha",
              "coll_beta", "barrier_cost", "etc_fixed", "parallel_regions_per_step",
              "allreduces_per_step", "halo_exchanges_per_step", "reduce_bytes",
              "words_per_cell_level", "thread_efficiency"});
  cost_model c = default_cost_model(machine);
  if (const json* p = find(v, "preset")) {
    const std::string name = as_string(*p, child(where, "preset"));
    try {
      c = cost_preset(name);
    } catch (const invalid_argument& e) {
      if (name != "custom") throw config_error(child(where, "preset"), e.what());
      c.preset = name;
    }
  }
  read_number(v, where, "c_cell", c.c_cell);
  read_number(v, where, "p2p_alpha", c.p2p_alpha);
  read_number(v, where, "p2p_beta", c.p2p_beta);
  read_number(v, where, "coll_alpha", c.coll_alpha);
  read_number(v, where, "coll_beta", c.coll_beta);
  read_number(v, where, "barrier_cost", c.barrier_cost);
  read_number(v, where, "etc_fixed", c.etc_fixed);
  read_int(v, where, "parallel_regions_per_step", c.parallel_regions_per_step);
  read_int(v, where, "allreduces_per_step", c.allreduces_per_step);
  read_int(v, where, "halo_exchanges_per_step", c.halo_exchanges_per_step);
  read_int(v, where, "reduce_bytes", c.reduce_bytes);
  read_int(v, where, "words_per_cell_level", c.words_per_cell_level);
  if (const json* te = find(v, "thread_efficiency")) {
    const std::string at = child(where, "thread_efficiency");
    if (!te->is_object()) throw config_error(at, "expected an object of threads -> efficiency");
    c.thread_efficiency.clear();
    for (const auto& [key, value] : te->items()) {
      int threads = 0;
      auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), threads);
      if (ec != std::errc{} || ptr != key.data() + key.size())
        throw config_error(child(at, key), "thread count keys must be integers");
      c.thread_efficiency[threads] = as_number(value, child(at, key));
    }
  }
  return c;
}

inline dyncore_case read_case(const json& v, const std::string& where,
                              const dyncore_case& defaults) {
  check_keys(v, where, {"mesh", "layout"});
  dyncore_case c = defaults;
  if (const json* m = find(v, "mesh")) {
    const std::string at = child(where, "mesh");
    check_keys(*m, at, {"panel_size", "levels"});
    read_int(*m, at, "panel_size", c.panel_size);
    read_int(*m, at, "levels", c.levels);
  }
  if (const json* l = find(v, "layout")) {
    const std::string at = child(where, "layout");
    check_keys(*l, at, {"nodes", "ranks_per_node", "threads_per_rank"});
    if (const json* n = find(*l, "nodes")) c.nodes = read_int_list(*n, child(at, "nodes"));
    read_int(*l, at, "ranks_per_node", c.ranks_per_node);
    if (const json* t = find(*l, "threads_per_rank"))
      c.threads = read_int_list(*t, child(at, "threads_per_rank"));
  }
  return c;
}

inline decomposition_mode read_mode(const json& v, const std::string& where) {
  const std::string s = as_string(v, where);
  if (s == "exchange_halos") return decomposition_mode::exchange_halos;
  if (s == "redundant_compute") return decomposition_mode::redundant_compute;
  throw config_error(where, "mode must be exchange_halos or redundant_compute");
}

inline diagnostic_schedule read_schedule(const json& v, const std::string& where) {
  check_keys(v, where, {"run_hours", "entries"});
  diagnostic_schedule s;
  read_number(v, where, "run_hours", s.run_hours);
  if (const json* e = find(v, "entries")) {
    const std::string at = child(where, "entries");
    if (!e->is_array()) throw config_error(at, "expected a list");
    for (std::size_t k = 0; k < e->size(); ++k) {
      const std::string ek = at + "/" + std::to_string(k);
      check_keys((*e)[k], ek, {"field_count", "period_hours", "bytes_per_field"});
      schedule_entry entry;
      read_int((*e)[k], ek, "field_count", entry.field_count);
      read_number((*e)[k], ek, "period_hours", entry.period_hours);
      read_int((*e)[k], ek, "bytes_per_field", entry.bytes_per_field);
      s.entries.push_back(entry);
    }
  }
  return s;
}

inline io_scenario read_io(const json& v, const std::string& where) {
  check_keys(v, where,
             {"clients", "servers_level1", "servers_level2", "pools",
              "buffer_bytes", "base_write_rate_mib_s", "striping_factor",
              "stripe_cap", "files", "compute_rate", "transfer_rate_mib_s",
              "pool_contention", "server_nodes", "server_node_memory_bytes",
              "rate_jitter", "seed"});
  io_scenario s;
  read_int(v, where, "clients", s.clients);
  read_int(v, where, "servers_level1", s.servers_level1);
  read_int(v, where, "servers_level2", s.servers_level2);
  read_int(v, where, "pools", s.pools);
  read_int(v, where, "buffer_bytes", s.buffer_bytes);
  double rate = 0, transfer = 0;
  read_number(v, where, "base_write_rate_mib_s", rate);
  read_number(v, where, "transfer_rate_mib_s", transfer);
  s.base_write_rate = rate * mib;
  s.transfer_rate = transfer * mib;
  read_number(v, where, "striping_factor", s.striping_factor);
  read_number(v, where, "stripe_cap", s.stripe_cap);
  read_int(v, where, "files", s.files);
  read_number(v, where, "compute_rate", s.compute_rate);
  read_number(v, where, "pool_contention", s.pool_contention);
  read_int(v, where, "server_nodes", s.server_nodes);
  read_int(v, where, "server_node_memory_bytes", s.server_node_memory_bytes);
  read_number(v, where, "rate_jitter", s.rate_jitter);
  read_int(v, where, "seed", s.seed);
  return s;
}

// Run `f`, turning model validation failures into config errors at `where`.
template <class F>
void checked(const std::string& where, F&& f) {
  try {
    f();
  } catch (const config_error&) {
    throw;
  } catch (const error& e) {
    throw config_error(where, e.what());
  }
}

inline void validate_case(const scenario_config& cfg, const dyncore_case& c,
                          const std::string& where) {
  checked(child(where, "mesh"), [&] { cubed_sphere_mesh(c.panel_size, c.levels); });
  if (c.nodes.size() > 1 && c.threads.size() > 1)
    throw config_error(child(where, "layout"),
                       "nodes and threads_per_rank cannot both be lists");
  for (int n : c.nodes)
    if (n < 1) throw config_error(child(where, "layout/nodes"), "nodes must be >= 1");
  if (c.threads.size() > 1 && c.ranks_per_node != 0)
    throw config_error(child(where, "layout/ranks_per_node"),
                       "ranks_per_node is derived when threads_per_rank is a list");
  for (int t : c.threads) {
    if (t < 1 || cfg.machine.cores_per_node % t != 0)
      throw config_error(child(where, "layout/threads_per_rank"),
                         std::to_string(t) + " threads does not divide " +
                             std::to_string(cfg.machine.cores_per_node) +
                             " cores per node");
    const int rpn = c.ranks_per_node ? c.ranks_per_node : cfg.machine.cores_per_node / t;
    checked(child(where, "layout"), [&] { validate_layout(cfg.machine, rpn, t); });
  }
}

}  // namespace detail

// Fill and validate a config from a parsed document. Errors carry the JSON
// pointer of the offending value.
inline scenario_config config_from_json(const json& doc) {
  using namespace detail;
  check_keys(doc, "",
             {"machine", "cost_model", "mesh", "layout", "cases", "run",
              "schedule", "io_scenario", "sweep"});
  scenario_config cfg;
  if (const json* m = find(doc, "machine")) cfg.machine = read_machine(*m, "/machine");
  checked("/machine", [&] { validate(cfg.machine); });
  cfg.cost = default_cost_model(cfg.machine);
  if (const json* c = find(doc, "cost_model")) cfg.cost = read_cost(*c, "/cost_model", cfg.machine);
  checked("/cost_model", [&] { validate(cfg.cost); });

  if (const json* r = find(doc, "run")) {
    check_keys(*r, "/run",
               {"timesteps", "mode", "halo_depth", "redundant_depth", "bytes_per_cell"});
    read_int(*r, "/run", "timesteps", cfg.run.timesteps);
    if (const json* mode = find(*r, "mode")) cfg.run.mode = read_mode(*mode, "/run/mode");
    read_int(*r, "/run", "halo_depth", cfg.run.halo_depth);
    read_int(*r, "/run", "redundant_depth", cfg.run.redundant_depth);
    read_int(*r, "/run", "bytes_per_cell", cfg.run.bytes_per_cell);
    if (cfg.run.timesteps < 1) throw config_error("/run/timesteps", "must be >= 1");
    if (cfg.run.halo_depth < 1) throw config_error("/run/halo_depth", "must be >= 1");
    if (cfg.run.redundant_depth < 0 || cfg.run.redundant_depth > cfg.run.halo_depth)
      throw config_error("/run/redundant_depth", "must be in [0, halo_depth]");
    if (cfg.run.bytes_per_cell < 1) throw config_error("/run/bytes_per_cell", "must be >= 1");
  }

  // Top-level mesh/layout act as defaults for every entry of `cases`.
  json top = json::object();
  if (const json* m = find(doc, "mesh")) top["mesh"] = *m;
  if (const json* l = find(doc, "layout")) top["layout"] = *l;
  const dyncore_case defaults = read_case(top, "", dyncore_case{});
  if (const json* cases = find(doc, "cases")) {
    if (!cases->is_array() || cases->empty())
      throw config_error("/cases", "expected a non-empty list");
    for (std::size_t k = 0; k < cases->size(); ++k)
      cfg.cases.push_back(read_case((*cases)[k], "/cases/" + std::to_string(k), defaults));
  } else if (!top.empty()) {
    cfg.cases.push_back(defaults);
  }
  for (std::size_t k = 0; k < cfg.cases.size(); ++k)
    validate_case(cfg, cfg.cases[k],
                  find(doc, "cases") ? "/cases/" + std::to_string(k) : "");

  const json* io = find(doc, "io_scenario");
  const json* sched = find(doc, "schedule");
  if (sched && !io) throw config_error("/schedule", "a schedule needs an io_scenario section");
  if (io) {
    cfg.io = read_io(*io, "/io_scenario");
    if (sched) cfg.io->schedule = read_schedule(*sched, "/schedule");
    checked("/io_scenario", [&] { validate(*cfg.io); });
  }

  if (const json* sw = find(doc, "sweep")) {
    const std::set<std::string> allowed(sweep_axes().begin(), sweep_axes().end());
    check_keys(*sw, "/sweep", allowed);
    for (const auto& [axis, values] : sw->items()) {
      const std::string at = "/sweep/" + axis;
      if (!values.is_array()) throw config_error(at, "expected a list");
      auto& out = cfg.sweep[axis];
      for (std::size_t k = 0; k < values.size(); ++k)
        out.push_back(axis == "striping"
                          ? as_number(values[k], at + "/" + std::to_string(k))
                          : static_cast<double>(as_int(values[k], at + "/" + std::to_string(k))));
      if (is_io_axis(axis) && !cfg.io)
        throw config_error(at, "axis needs an io_scenario section");
      if (!is_io_axis(axis) && cfg.cases.empty())
        throw config_error(at, "axis needs a mesh and layout");
    }
  }
  return cfg;
}

// "line L, column C" from a parse error's byte offset.
inline std::string text_position(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

inline scenario_config parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte points one past the offending character
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw config_error(text_position(text, byte), "invalid JSON");
  }
  return config_from_json(doc);
}

inline scenario_config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error(path, "cannot read config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const config_error& e) {
    throw config_error(path + ":" + e.where(),
                       std::string(e.what()).substr(e.where().size() + 2));
  }
}

// --- writing --------------------------------------------------------------

inline json machine_to_json(const machine_config& m) {
  return {{"name", m.name},
          {"cores_per_node", m.cores_per_node},
          {"cpus_per_node", m.cpus_per_node},
          {"clock_ghz", m.clock_ghz},
          {"numa_domains_per_cpu", m.numa_domains_per_cpu},
          {"l3_mb_per_cpu", m.l3_mb_per_cpu},
          {"interconnect", m.interconnect},
          {"max_nodes", m.max_nodes},
          {"node_memory_bytes", m.node_memory_bytes}};
}

inline json cost_to_json(const cost_model& c) {
  json te = json::object();
  for (const auto& [t, e] : c.thread_efficiency) te[std::to_string(t)] = e;
  return {{"preset", c.preset},
          {"c_cell", c.c_cell},
          {"p2p_alpha", c.p2p_alpha},
          {"p2p_beta", c.p2p_beta},
          {"coll_alpha", c.coll_alpha},
          {"coll_beta", c.coll_beta},
          {"barrier_cost", c.barrier_cost},
          {"etc_fixed", c.etc_fixed},
          {"parallel_regions_per_step", c.parallel_regions_per_step},
          {"allreduces_per_step", c.allreduces_per_step},
          {"halo_exchanges_per_step", c.halo_exchanges_per_step},
          {"reduce_bytes", c.reduce_bytes},
          {"words_per_cell_level", c.words_per_cell_level},
          {"thread_efficiency", te}};
}

inline json schedule_to_json(const diagnostic_schedule& s) {
  json entries = json::array();
  for (const auto& e : s.entries)
    entries.push_back({{"field_count", e.field_count},
                       {"period_hours", e.period_hours},
                       {"bytes_per_field", e.bytes_per_field}});
  return {{"run_hours", s.run_hours}, {"entries", entries}};
}

inline json io_to_json(const io_scenario& s) {
  return {{"clients", s.clients},
          {"servers_level1", s.servers_level1},
          {"servers_level2", s.servers_level2},
          {"pools", s.pools},
          {"buffer_bytes", s.buffer_bytes},
          {"base_write_rate_mib_s", s.base_write_rate / mib},
          {"striping_factor", s.striping_factor},
          {"stripe_cap", s.stripe_cap},
          {"files", s.files},
          {"compute_rate", s.compute_rate},
          {"transfer_rate_mib_s", s.transfer_rate / mib},
          {"pool_contention", s.pool_contention},
          {"server_nodes", s.server_nodes},
          {"server_node_memory_bytes", s.server_node_memory_bytes},
          {"rate_jitter", s.rate_jitter},
          {"seed", s.seed}};
}

namespace detail {
inline json int_or_list(const std::vector<int>& v) {
  if (v.size() == 1) return v.front();
  return v;
}
}  // namespace detail

// Canonical form: every field explicit, keys sorted, cases always listed.
inline json config_to_json(const scenario_config& cfg) {
  json doc = {{"machine", machine_to_json(cfg.machine)},
              {"cost_model", cost_to_json(cfg.cost)}};
  doc["run"] = {{"timesteps", cfg.run.timesteps},
                {"mode", cfg.run.mode == decomposition_mode::exchange_halos
                             ? "exchange_halos"
                             : "redundant_compute"},
                {"halo_depth", cfg.run.halo_depth},
                {"redundant_depth", cfg.run.redundant_depth},
                {"bytes_per_cell", cfg.run.bytes_per_cell}};
  if (!cfg.cases.empty()) {
    json cases = json::array();
    for (const auto& c : cfg.cases) {
      json layout = {{"nodes", detail::int_or_list(c.nodes)},
                     {"threads_per_rank", detail::int_or_list(c.threads)}};
      if (c.ranks_per_node) layout["ranks_per_node"] = c.ranks_per_node;
      cases.push_back({{"mesh", {{"panel_size", c.panel_size}, {"levels", c.levels}}},
                       {"layout", layout}});
    }
    doc["cases"] = cases;
  }
  if (cfg.io) {
    doc["io_scenario"] = io_to_json(*cfg.io);
    doc["schedule"] = schedule_to_json(cfg.io->schedule);
  }
  if (!cfg.sweep.empty()) {
    json sweep = json::object();
    for (const auto& [axis, values] : cfg.sweep) {
      json list = json::array();
      for (double v : values) {
        if (axis == "striping") list.push_back(v);
        else list.push_back(static_cast<std::int64_t>(v));
      }
      sweep[axis] = list;
    }
    doc["sweep"] = sweep;
  }
  return doc;
}

inline std::string serialize_config(const scenario_config& cfg) {
  return config_to_json(cfg).dump(2) + "\n";
}

}  // namespace csperf
