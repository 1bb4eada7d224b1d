#pragma once

#include <cstdint>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "error.hpp"

namespace csperf {

struct machine_config {
  std::string name;
  int cores_per_node = 0;
  int cpus_per_node = 0;
  double clock_ghz = 0.0;
  int numa_domains_per_cpu = 0;
  double l3_mb_per_cpu = 0.0;  // 0 when not reported
  std::string interconnect;
  int max_nodes = 0;
  std::int64_t node_memory_bytes = 0;  // memory guard; not a hardware claim

  int cores_per_cpu() const noexcept {
    return cpus_per_node > 0 ? cores_per_node / cpus_per_node : 0;
  }

  friend bool operator==(const machine_config&, const machine_config&) = default;
};

inline void validate(const machine_config& m) {
  auto require = [&](bool ok, const char* what) {
    if (!ok)
      throw invalid_argument("machine '" + m.name + "': " + what);
  };
  require(!m.name.empty(), "name must not be empty");
  require(m.cores_per_node > 0, "cores_per_node must be positive");
  require(m.cpus_per_node > 0, "cpus_per_node must be positive");
  require(m.cores_per_node % m.cpus_per_node == 0,
          "cores_per_node must be a multiple of cpus_per_node");
  require(m.clock_ghz > 0, "clock_ghz must be positive");
  require(m.numa_domains_per_cpu > 0, "numa_domains_per_cpu must be positive");
  require(m.l3_mb_per_cpu >= 0, "l3_mb_per_cpu must not be negative");
  require(m.max_nodes > 0, "max_nodes must be positive");
  require(m.node_memory_bytes > 0, "node_memory_bytes must be positive");
}

inline constexpr std::int64_t gib = std::int64_t{1} << 30;

inline std::vector<machine_config> builtin_machines() {
  return {
      {"ARCHER2", 128, 2, 2.0, 4, 16.0 * 16.0, "Slingshot 10", 5600, 256 * gib},
      {"Setonix", 128, 2, 2.45, 4, 8.0 * 32.0, "Slingshot 11", 1600, 256 * gib},
      {"XC40", 36, 2, 2.1, 1, 0.0, "Aries", 2000, 128 * gib},
  };
}

inline machine_config find_machine(const std::string& name) {
  for (const auto& m : builtin_machines())
    if (m.name == name) return m;
  throw invalid_argument("unknown machine '" + name + "'");
}

// ranks_per_node * threads_per_rank must fill the node exactly.
inline void validate_layout(const machine_config& machine, int ranks_per_node,
                            int threads_per_rank) {
  if (ranks_per_node < 1 || threads_per_rank < 1)
    throw layout_error("ranks_per_node and threads_per_rank must be >= 1");
  if (static_cast<std::int64_t>(ranks_per_node) * threads_per_rank !=
      machine.cores_per_node)
    throw layout_error("ranks_per_node * threads_per_rank must equal "
                       "cores_per_node: " + std::to_string(ranks_per_node) +
                       " * " + std::to_string(threads_per_rank) + " = " +
                       std::to_string(ranks_per_node * threads_per_rank) +
                       " != " + std::to_string(machine.cores_per_node) +
                       " on " + machine.name);
}

// Time-cost coefficients consumed by the timestep simulator. Every default
// below is a calibration value, picked to land the C512 / 48-node ARCHER2 run
// near half a second of USER time per step; none is a measurement.
struct cost_model {
  std::string preset = "custom";
  double c_cell = 1.6e-5;        // s per cell-level of USER work
  double p2p_alpha = 20e-6;      // s per message
  double p2p_beta = 1e9;         // bytes/s
  double coll_alpha = 1e-3;      // s per allreduce stage
  double coll_beta = 1e9;        // bytes/s per stage
  double barrier_cost = 5e-6;    // s per thread per parallel region
  double etc_fixed = 0.02;       // s per step per rank
  int parallel_regions_per_step = 1000;
  int allreduces_per_step = 4;
  int halo_exchanges_per_step = 100;
  std::int64_t reduce_bytes = 8;
  std::int64_t words_per_cell_level = 100;  // memory guard footprint
  std::map<int, double> thread_efficiency = {
      {1, 1.0},   {2, 1.0},   {4, 0.99}, {8, 0.97},
      {16, 0.93}, {32, 0.88}, {64, 0.8}, {128, 0.7}};

  // Efficiency of the largest tabulated thread count <= threads.
  double efficiency(int threads) const {
    auto it = thread_efficiency.upper_bound(threads);
    if (it == thread_efficiency.begin())
      throw invalid_argument("cost model: no thread_efficiency entry for " +
                             std::to_string(threads) + " threads");
    return std::prev(it)->second;
  }

  friend bool operator==(const cost_model&, const cost_model&) = default;
};

inline void validate(const cost_model& c) {
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) throw invalid_argument("cost model '" + c.preset + "': " + what);
  };
  require(c.c_cell >= 0, "c_cell must be >= 0");
  require(c.p2p_alpha >= 0, "p2p_alpha must be >= 0");
  require(c.p2p_beta > 0, "p2p_beta must be > 0");
  require(c.coll_alpha >= 0, "coll_alpha must be >= 0");
  require(c.coll_beta > 0, "coll_beta must be > 0");
  require(c.barrier_cost >= 0, "barrier_cost must be >= 0");
  require(c.etc_fixed >= 0, "etc_fixed must be >= 0");
  require(c.parallel_regions_per_step >= 0, "parallel_regions_per_step must be >= 0");
  require(c.allreduces_per_step >= 0, "allreduces_per_step must be >= 0");
  require(c.halo_exchanges_per_step >= 0, "halo_exchanges_per_step must be >= 0");
  require(c.reduce_bytes >= 0, "reduce_bytes must be >= 0");
  require(c.words_per_cell_level >= 0, "words_per_cell_level must be >= 0");
  require(!c.thread_efficiency.empty(), "thread_efficiency must not be empty");
  auto one = c.thread_efficiency.find(1);
  require(one != c.thread_efficiency.end() && one->second == 1.0,
          "thread_efficiency(1) must be 1");
  for (const auto& [t, e] : c.thread_efficiency)
    require(t >= 1 && e > 0 && e <= 1,
            "thread_efficiency entries must have threads >= 1 and 0 < e <= 1");
}

// Calibrated presets. Cray presets carry the larger barrier and runtime
// overhead (lock/unlock traffic lands in ETC); GNU presets trade lower USER
// time for more expensive MPI. Setonix compute scales with its clock.
inline cost_model cost_preset(const std::string& name) {
  cost_model c;
  c.preset = name;
  constexpr double setonix_speedup = 2.0 / 2.45;
  if (name == "archer2-cray") return c;
  if (name == "archer2-gnu") {
    c.c_cell = 1.5e-5;
    c.p2p_alpha = 25e-6;
    c.coll_alpha = 1.2e-3;
    c.barrier_cost = 4e-6;
    c.etc_fixed = 0.01;
    return c;
  }
  if (name == "setonix-cray") {
    c.c_cell = 1.6e-5 * setonix_speedup;
    c.p2p_alpha = 15e-6;
    c.p2p_beta = 2e9;
    c.coll_alpha = 0.8e-3;
    return c;
  }
  if (name == "setonix-gnu") {
    c.c_cell = 1.5e-5 * setonix_speedup;
    c.p2p_alpha = 18e-6;
    c.p2p_beta = 2e9;
    c.coll_alpha = 1e-3;
    c.barrier_cost = 4e-6;
    c.etc_fixed = 0.01;
    return c;
  }
  if (name == "xc40-intel") {
    c.c_cell = 2.0e-5;
    c.p2p_alpha = 30e-6;
    c.p2p_beta = 0.8e9;
    c.coll_alpha = 1.5e-3;
    c.coll_beta = 0.8e9;
    return c;
  }
  throw invalid_argument("unknown cost preset '" + name + "'");
}

inline std::vector<std::string> cost_preset_names() {
  return {"archer2-cray", "archer2-gnu", "setonix-cray", "setonix-gnu",
          "xc40-intel"};
}

inline cost_model default_cost_model(const machine_config& machine) {
  if (machine.name == "ARCHER2") return cost_preset("archer2-cray");
  if (machine.name == "Setonix") return cost_preset("setonix-cray");
  if (machine.name == "XC40") return cost_preset("xc40-intel");
  return cost_model{};
}

}  // namespace csperf
