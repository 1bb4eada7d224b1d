#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "decomp.hpp"
#include "error.hpp"
#include "machine.hpp"
#include "mesh.hpp"

namespace csperf {

// One simulated dynamical-core configuration.
struct run_spec {
  cubed_sphere_mesh mesh{1, 1};
  machine_config machine;
  int nodes = 1;
  int ranks_per_node = 1;
  int threads_per_rank = 1;
  int timesteps = 96;
  cost_model cost;
  decomposition_mode mode = decomposition_mode::exchange_halos;
  int halo_depth = 1;
  int redundant_depth = 0;  // 0: same as halo_depth
  std::int64_t bytes_per_cell = default_bytes_per_cell;

  int ranks() const noexcept { return nodes * ranks_per_node; }
};

inline void validate(const run_spec& run) {
  validate(run.machine);
  validate(run.cost);
  if (run.nodes < 1) throw invalid_argument("run: nodes must be >= 1");
  if (run.timesteps < 1) throw invalid_argument("run: timesteps must be >= 1");
  validate_layout(run.machine, run.ranks_per_node, run.threads_per_rank);
  if (run.ranks() > run.mesh.total_horizontal_cells())
    throw invalid_argument("run: " + std::to_string(run.ranks()) +
                           " ranks exceed " +
                           std::to_string(run.mesh.total_horizontal_cells()) +
                           " cells");
}

// Per-timestep times. The four categories account for the whole step.
struct timestep_breakdown {
  double user_s = 0;
  double mpi_p2p_s = 0;
  double mpi_coll_s = 0;
  double etc_s = 0;
  double total_s = 0;

  double user_mean_s = 0;
  double mpi_p2p_mean_s = 0;

  int nodes = 0;
  int ranks = 0;
  int threads = 0;
  int timesteps = 0;
  double run_s = 0;  // total_s * timesteps

  // Halo traffic of one exchange.
  std::int64_t max_halo_bytes_per_rank = 0;  // received
  std::int64_t total_halo_bytes = 0;
  std::int64_t messages = 0;
  int participating_ranks = 0;
  std::int64_t compute_cells = 0;  // owned + redundant, summed over ranks

  friend bool operator==(const timestep_breakdown&, const timestep_breakdown&) = default;
};

// ceil(log2 n) for n >= 1.
inline int allreduce_stages(std::int64_t ranks) {
  int stages = 0;
  while ((std::int64_t{1} << stages) < ranks) ++stages;
  return stages;
}

inline timestep_breakdown simulate(const run_spec& run) {
  validate(run);
  const int ranks = run.ranks();
  const int threads = run.threads_per_rank;
  const auto& cost = run.cost;
  const double levels = run.mesh.levels();

  decomposition decomp = compute_halos(
      run.mesh, partition(run.mesh, ranks, run.mode), run.halo_depth);
  decomp.set_redundant_depth(run.redundant_depth);

  if (run.machine.node_memory_bytes > 0 && cost.words_per_cell_level > 0) {
    std::int64_t per_rank = 0;
    for (int r = 0; r < ranks; ++r)
      per_rank = std::max(per_rank, decomp.owned_count(r) + decomp.halo_count(r));
    const double node_bytes = static_cast<double>(per_rank) * levels *
                              static_cast<double>(cost.words_per_cell_level) * 8.0 *
                              run.ranks_per_node;
    if (node_bytes > static_cast<double>(run.machine.node_memory_bytes)) {
      std::ostringstream msg;
      msg << "insufficient memory: C" << run.mesh.panel_size() << " on "
          << run.nodes << " nodes x " << run.ranks_per_node
          << " ranks needs " << node_bytes / gib << " GiB per node, "
          << run.machine.name << " nodes have "
          << static_cast<double>(run.machine.node_memory_bytes) / gib << " GiB";
      throw out_of_memory(msg.str());
    }
  }

  const exchange_pattern pattern = make_exchange_pattern(decomp, run.bytes_per_cell);
  const std::vector<std::int64_t> extra = redundant_compute_extent(decomp);

  timestep_breakdown b;
  b.nodes = run.nodes;
  b.ranks = ranks;
  b.threads = threads;
  b.timesteps = run.timesteps;

  const double thread_rate = threads * cost.efficiency(threads);
  double user_sum = 0;
  for (int r = 0; r < ranks; ++r) {
    const std::int64_t cells = decomp.owned_count(r) + extra[static_cast<std::size_t>(r)];
    b.compute_cells += cells;
    const double user = static_cast<double>(cells) * levels * cost.c_cell / thread_rate;
    b.user_s = std::max(b.user_s, user);
    user_sum += user;
  }
  b.user_mean_s = user_sum / ranks;

  // Blocking master-only exchange: each rank posts its sends in turn, the
  // step waits for the slowest rank.
  std::vector<double> send_s(static_cast<std::size_t>(ranks), 0.0);
  std::vector<std::int64_t> received(static_cast<std::size_t>(ranks), 0);
  for (const auto& m : pattern.messages) {
    send_s[static_cast<std::size_t>(m.src)] +=
        cost.p2p_alpha + static_cast<double>(m.bytes) / cost.p2p_beta;
    received[static_cast<std::size_t>(m.dst)] += m.bytes;
  }
  double p2p_sum = 0;
  for (int r = 0; r < ranks; ++r) {
    const double p2p = cost.halo_exchanges_per_step * send_s[static_cast<std::size_t>(r)];
    b.mpi_p2p_s = std::max(b.mpi_p2p_s, p2p);
    p2p_sum += p2p;
  }
  b.mpi_p2p_mean_s = p2p_sum / ranks;
  b.max_halo_bytes_per_rank = *std::max_element(received.begin(), received.end());
  b.total_halo_bytes = pattern.total_bytes();
  b.messages = static_cast<std::int64_t>(pattern.messages.size());
  b.participating_ranks = pattern.participating_ranks();

  b.mpi_coll_s = cost.allreduces_per_step * allreduce_stages(ranks) *
                 (cost.coll_alpha + static_cast<double>(cost.reduce_bytes) / cost.coll_beta);
  b.etc_s = cost.parallel_regions_per_step * cost.barrier_cost * threads + cost.etc_fixed;
  b.total_s = b.user_s + b.mpi_p2p_s + b.mpi_coll_s + b.etc_s;
  b.run_s = b.total_s * run.timesteps;
  return b;
}

// Seconds of model compute per simulated hour, for driving the I/O model.
inline double compute_seconds_per_model_hour(const timestep_breakdown& b,
                                             double timesteps_per_hour) {
  return b.total_s * timesteps_per_hour;
}

struct scaling_row {
  timestep_breakdown breakdown;
  double ideal_s = std::numeric_limits<double>::quiet_NaN();
};

struct scaling_table {
  std::vector<scaling_row> rows;
  std::vector<std::string> warnings;  // skipped configurations
  std::optional<std::size_t> best;    // argmin total_s (thread sweeps)
  bool has_ideal = false;
};

// Fixed mesh and layout over increasing node counts. Rows failing the memory
// guard are skipped with a warning; the ideal column extrapolates from the
// first row that ran.
inline scaling_table strong_scaling_study(const run_spec& base,
                                          std::vector<int> node_counts) {
  std::sort(node_counts.begin(), node_counts.end());
  node_counts.erase(std::unique(node_counts.begin(), node_counts.end()),
                    node_counts.end());
  scaling_table table;
  table.has_ideal = true;
  for (int nodes : node_counts) {
    run_spec run = base;
    run.nodes = nodes;
    try {
      scaling_row row{simulate(run)};
      if (!table.rows.empty()) {
        const auto& first = table.rows.front().breakdown;
        row.ideal_s = first.total_s * first.nodes / nodes;
      } else {
        row.ideal_s = row.breakdown.total_s;
      }
      table.rows.push_back(row);
    } catch (const out_of_memory& e) {
      table.warnings.push_back(std::to_string(nodes) + " nodes skipped: " + e.what());
    }
  }
  return table;
}

// Fully populated nodes with varying threads per rank.
inline scaling_table thread_sweep(const run_spec& base,
                                  const std::vector<int>& thread_list) {
  scaling_table table;
  const int cores = base.machine.cores_per_node;
  for (int t : thread_list) {
    if (t < 1 || cores % t != 0)
      throw layout_error("thread_sweep: " + std::to_string(t) +
                         " threads does not divide " + std::to_string(cores) +
                         " cores per node");
    run_spec run = base;
    run.threads_per_rank = t;
    run.ranks_per_node = cores / t;
    table.rows.push_back({simulate(run)});
  }
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& row = table.rows[k].breakdown;
    if (!table.best) {
      table.best = k;
      continue;
    }
    const auto& best = table.rows[*table.best].breakdown;
    if (row.total_s < best.total_s ||
        (row.total_s == best.total_s && row.threads < best.threads))
      table.best = k;
  }
  return table;
}

inline const std::vector<std::string>& scaling_columns() {
  static const std::vector<std::string> cols = {
      "nodes", "ranks", "threads", "user_s", "p2p_s", "coll_s", "etc_s", "total_s"};
  return cols;
}

inline std::vector<std::string> breakdown_cells(const timestep_breakdown& b) {
  return {format_number(b.nodes),    format_number(b.ranks),
          format_number(b.threads),  format_number(b.user_s),
          format_number(b.mpi_p2p_s), format_number(b.mpi_coll_s),
          format_number(b.etc_s),    format_number(b.total_s)};
}

inline csv_table scaling_csv(const scaling_table& table) {
  csv_table out;
  out.header = scaling_columns();
  if (table.has_ideal) out.header.push_back("ideal_s");
  for (const auto& row : table.rows) {
    auto cells = breakdown_cells(row.breakdown);
    if (table.has_ideal) cells.push_back(format_number(row.ideal_s));
    out.rows.push_back(std::move(cells));
  }
  return out;
}

// Elementwise a/b over the timing columns of two tables sharing the same
// (nodes, ranks, threads) axes. 0/0 is reported as 1.
inline csv_table ratio_report(const csv_table& a, const csv_table& b) {
  static const std::vector<std::string> axes = {"nodes", "ranks", "threads"};
  static const std::vector<std::string> values = {"user_s", "p2p_s", "coll_s",
                                                  "etc_s", "total_s"};
  for (const auto& table : {&a, &b})
    for (const auto& col : scaling_columns())
      if (table->column(col) < 0)
        throw invalid_argument("ratio_report: missing column '" + col + "'");
  if (a.rows.size() != b.rows.size())
    throw invalid_argument("ratio_report: tables have " +
                           std::to_string(a.rows.size()) + " and " +
                           std::to_string(b.rows.size()) + " rows");
  csv_table out;
  out.header = axes;
  for (const auto& v : values) out.header.push_back(v + "_ratio");
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    std::vector<std::string> cells;
    for (const auto& axis : axes) {
      const auto& va = a.rows[r][static_cast<std::size_t>(a.column(axis))];
      const auto& vb = b.rows[r][static_cast<std::size_t>(b.column(axis))];
      if (va != vb)
        throw invalid_argument("ratio_report: row " + std::to_string(r) +
                               " differs on axis '" + axis + "' (" + va +
                               " vs " + vb + ")");
      cells.push_back(va);
    }
    for (const auto& v : values) {
      const double x = a.number(r, v);
      const double y = b.number(r, v);
      cells.push_back(format_number(x == 0 && y == 0 ? 1.0 : x / y));
    }
    out.rows.push_back(std::move(cells));
  }
  return out;
}

// Horizontal stacked bars, one per row: U = USER, P = MPI-P2P, C = MPI-COLL,
// E = ETC.
inline std::string breakdown_report(const scaling_table& table, int width = 60) {
  double longest = 0;
  for (const auto& row : table.rows)
    longest = std::max(longest, row.breakdown.total_s);
  std::ostringstream os;
  os << "time per timestep  [U] USER  [P] MPI-P2P  [C] MPI-COLL  [E] ETC\n";
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& b = table.rows[k].breakdown;
    auto bar = [&](double s, char glyph) {
      const int n = longest > 0 ? static_cast<int>(std::lround(s / longest * width)) : 0;
      return std::string(static_cast<std::size_t>(n), glyph);
    };
    os << std::setw(5) << b.nodes << "n " << std::setw(6) << b.ranks << "r "
       << std::setw(3) << b.threads << "t |" << bar(b.user_s, 'U')
       << bar(b.mpi_p2p_s, 'P') << bar(b.mpi_coll_s, 'C') << bar(b.etc_s, 'E')
       << "| " << std::fixed << std::setprecision(4) << b.total_s << " s"
       << (table.best && *table.best == k ? "  <- best" : "") << "\n";
    os.unsetf(std::ios::fixed);
  }
  for (const auto& w : table.warnings) os << "warning: " << w << "\n";
  return os.str();
}

}  // namespace csperf
