#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "workload.hpp"

namespace csperf {

inline constexpr double mib = 1024.0 * 1024.0;

// Client/server I/O configuration.
//
// Writing servers are the level-2 servers when any exist, otherwise the
// level-1 servers. Writing servers are split evenly into pools; files are
// dealt round-robin to pools, and inside a pool each file is pinned to one
// write lane. A pool has min(servers, files) lanes, and lanes in the same
// pool slow each other down through `pool_contention`.
struct io_scenario {
  int clients = 1;
  int servers_level1 = 1;
  int servers_level2 = 0;
  int pools = 1;
  std::int64_t buffer_bytes = 0;  // per client
  double base_write_rate = 0;     // bytes/s of one unstriped write stream
  double striping_factor = 1;
  double stripe_cap = 16;         // largest usable striping multiplier
  int files = 1;
  diagnostic_schedule schedule;
  double compute_rate = 0;        // s of model compute per model hour

  double transfer_rate = 0;       // level-1 forwarding bytes/s; 0: 4x base
  double pool_contention = 0.5;
  int server_nodes = 1;
  std::int64_t server_node_memory_bytes = 0;  // 0 disables the guard
  double rate_jitter = 0;         // per-lane rate drawn from [1-j, 1+j]
  std::uint64_t seed = 0;

  int writing_servers() const noexcept {
    return servers_level2 > 0 ? servers_level2 : servers_level1;
  }
  bool two_level() const noexcept {
    return servers_level2 > 0 && servers_level1 > 0;
  }
  double effective_transfer_rate() const noexcept {
    return transfer_rate > 0 ? transfer_rate : 4.0 * base_write_rate;
  }

  friend bool operator==(const io_scenario&, const io_scenario&) = default;
};

inline void validate(const io_scenario& s) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw invalid_argument("io scenario: " + what);
  };
  require(s.clients >= 1, "clients must be >= 1");
  require(s.servers_level1 >= 0 && s.servers_level2 >= 0,
          "server counts must not be negative");
  require(s.servers_level1 + s.servers_level2 >= 1, "need at least one server");
  require(s.pools >= 1, "pools must be >= 1");
  require(s.writing_servers() % s.pools == 0,
          std::to_string(s.writing_servers()) +
              " writing servers are not divisible into " +
              std::to_string(s.pools) + " pools");
  require(s.buffer_bytes >= 1, "buffer_bytes must be >= 1");
  require(s.base_write_rate > 0, "base_write_rate must be positive");
  require(s.striping_factor >= 1, "striping_factor must be >= 1");
  require(s.stripe_cap >= 1, "stripe_cap must be >= 1");
  require(s.files >= 1, "files must be >= 1");
  require(s.compute_rate >= 0, "compute_rate must be >= 0");
  require(s.transfer_rate >= 0, "transfer_rate must be >= 0");
  require(s.pool_contention >= 0, "pool_contention must be >= 0");
  require(s.server_nodes >= 1, "server_nodes must be >= 1");
  require(s.server_node_memory_bytes >= 0, "server_node_memory_bytes must be >= 0");
  require(s.rate_jitter >= 0 && s.rate_jitter < 1, "rate_jitter must be in [0, 1)");
  validate(s.schedule);
}

struct io_metrics {
  double wall_clock_s = 0;
  double client_wait_s = 0;    // mean per client
  double client_wait_pct = 0;  // wait / active time * 100
  double server_write_rate = 0;  // MiB/s: bytes written / server busy time
  std::int64_t bytes_written = 0;

  double compute_s = 0;             // pure compute time per client
  double aggregate_write_rate = 0;  // bytes/s over all lanes
  double server_busy_s = 0;
  int write_lanes = 0;

  friend bool operator==(const io_metrics&, const io_metrics&) = default;
};

// Share of a field held by one client; shares sum to the field size.
inline std::int64_t client_share(std::int64_t bytes, int clients, int client) {
  return bytes / clients + (client < bytes % clients ? 1 : 0);
}

// Static lane layout of the writing servers.
struct io_lanes {
  std::vector<int> pool_first_lane;  // per pool
  std::vector<int> pool_lanes;       // per pool
  std::vector<double> rate;          // per lane, bytes/s
  std::vector<int> lane_of_file;

  int size() const noexcept { return static_cast<int>(rate.size()); }
  double aggregate_rate() const noexcept {
    double total = 0;
    for (double r : rate) total += r;
    return total;
  }
};

inline io_lanes make_lanes(const io_scenario& s) {
  io_lanes lanes;
  const int per_pool = s.writing_servers() / s.pools;
  const double stream =
      s.base_write_rate * std::min(s.striping_factor, s.stripe_cap);
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> jitter(1.0 - s.rate_jitter,
                                                1.0 + s.rate_jitter);
  for (int p = 0; p < s.pools; ++p) {
    const int files_here = s.files / s.pools + (p < s.files % s.pools ? 1 : 0);
    const int n = std::min(per_pool, files_here);
    lanes.pool_first_lane.push_back(lanes.size());
    lanes.pool_lanes.push_back(n);
    const double rate = stream / (1.0 + s.pool_contention * (n - 1));
    for (int k = 0; k < n; ++k)
      lanes.rate.push_back(s.rate_jitter > 0 ? rate * jitter(rng) : rate);
  }
  for (int f = 0; f < s.files; ++f) {
    const int p = f % s.pools;
    const int local = f / s.pools;
    lanes.lane_of_file.push_back(lanes.pool_first_lane[p] + local % lanes.pool_lanes[p]);
  }
  return lanes;
}

// Server-side memory: mirrored client buffers plus one full field staged per
// writing server.
inline std::int64_t server_memory_required(const io_scenario& s) {
  return static_cast<std::int64_t>(s.clients) * s.buffer_bytes +
         static_cast<std::int64_t>(s.writing_servers()) *
             largest_field_bytes(s.schedule);
}

namespace detail {

struct io_wakeup {
  double time;
  int client;
  std::uint64_t seq;
};

// Min-heap order on (time, client, insertion).
struct io_wakeup_after {
  bool operator()(const io_wakeup& a, const io_wakeup& b) const noexcept {
    if (a.time != b.time) return a.time > b.time;
    if (a.client != b.client) return a.client > b.client;
    return a.seq > b.seq;
  }
};

struct pending_write {
  double done;
  std::int64_t bytes;
};

struct pending_after {
  bool operator()(const pending_write& a, const pending_write& b) const noexcept {
    return a.done > b.done;
  }
};

struct io_client {
  std::int64_t free = 0;
  std::size_t cursor = 0;
  double clock = 0;  // wall time at which model time `model_hours` was reached
  double model_hours = 0;
  bool blocked = false;
  double blocked_since = 0;
  double wait = 0;
  double finish = 0;
  std::vector<pending_write> pending;  // min-heap on completion time
};

// Every write lane and level-1 server is shared fairly: each client owns a
// 1/n slice of its rate and a private FIFO queue. A client's completions then
// depend on its own emissions only, which makes blocking monotone in the
// buffer size. Clients are still advanced in global time order.
class io_simulation {
public:
  explicit io_simulation(const io_scenario& s)
      : s_(s),
        events_(emission_events(s.schedule)),
        lanes_(make_lanes(s)),
        channel_free_(static_cast<std::size_t>(s.clients) *
                          static_cast<std::size_t>(lanes_.size()),
                      0.0),
        lane_busy_(static_cast<std::size_t>(lanes_.size()), 0.0),
        lane_bytes_(static_cast<std::size_t>(lanes_.size()), 0),
        level1_free_(static_cast<std::size_t>(s.two_level() ? s.clients : 0), 0.0),
        clients_(static_cast<std::size_t>(s.clients)) {}

  io_metrics run() {
    for (auto& c : clients_) c.free = s_.buffer_bytes;
    for (int c = 0; c < s_.clients; ++c) advance(c, 0.0);
    while (!queue_.empty()) {
      const io_wakeup w = queue_.top();
      queue_.pop();
      resume(w.client, w.time);
    }

    io_metrics m;
    m.compute_s = s_.schedule.run_hours * s_.compute_rate;
    for (std::int64_t b : lane_bytes_) m.bytes_written += b;
    if (m.bytes_written != emitted_)
      throw std::logic_error("io simulation lost bytes");
    m.aggregate_write_rate = lanes_.aggregate_rate();
    m.write_lanes = lanes_.size();
    double wait_sum = 0, active_sum = 0;
    for (double t : channel_free_) m.wall_clock_s = std::max(m.wall_clock_s, t);
    for (const auto& c : clients_) {
      wait_sum += c.wait;
      active_sum += c.finish;
      m.wall_clock_s = std::max(m.wall_clock_s, c.finish);
    }
    m.client_wait_s = wait_sum / s_.clients;
    m.client_wait_pct = active_sum > 0 ? wait_sum / active_sum * 100.0 : 0.0;
    for (double b : lane_busy_) m.server_busy_s += b;
    m.server_write_rate =
        m.server_busy_s > 0 ? static_cast<double>(m.bytes_written) / m.server_busy_s / mib : 0.0;
    return m;
  }

private:
  void wake(int client, double time) { queue_.push({time, client, seq_++}); }

  void resume(int id, double now) {
    auto& c = clients_[static_cast<std::size_t>(id)];
    if (c.blocked) {
      c.blocked = false;
      c.wait += now - c.blocked_since;
      c.clock = now;
    }
    advance(id, now);
  }

  // Move a client forward until it has to compute, blocks, or finishes.
  void advance(int id, double now) {
    auto& c = clients_[static_cast<std::size_t>(id)];
    while (c.cursor < events_.size()) {
      const emission_event& e = events_[c.cursor];
      const double due = c.clock + (e.time_hours - c.model_hours) * s_.compute_rate;
      if (due > now) {
        wake(id, due);
        return;
      }
      c.clock = now;
      c.model_hours = e.time_hours;
      const std::int64_t share = client_share(e.bytes, s_.clients, id);
      while (!c.pending.empty() && c.pending.front().done <= now) reclaim(c);
      if (c.free < share) {
        // Nothing this client does can change its own completions, so the
        // release time is the completion that first makes room.
        double until = now;
        while (c.free < share) until = reclaim(c);
        c.blocked = true;
        c.blocked_since = now;
        wake(id, until);
        return;
      }
      c.free -= share;
      emitted_ += share;
      c.pending.push_back({dispatch(id, e.variable, share, now), share});
      std::push_heap(c.pending.begin(), c.pending.end(), pending_after{});
      ++c.cursor;
    }
    c.finish = c.clock + (s_.schedule.run_hours - c.model_hours) * s_.compute_rate;
  }

  double reclaim(io_client& c) {
    std::pop_heap(c.pending.begin(), c.pending.end(), pending_after{});
    const pending_write w = c.pending.back();
    c.pending.pop_back();
    c.free += w.bytes;
    return w.done;
  }

  // Returns the completion time of the chunk's write.
  double dispatch(int client, std::int64_t variable, std::int64_t bytes, double now) {
    const auto lane = static_cast<std::size_t>(
        lanes_.lane_of_file[static_cast<std::size_t>(variable % s_.files)]);
    double arrival = now;
    if (s_.two_level()) {
      // Clients are assigned round-robin to level-1 servers.
      const int server = client % s_.servers_level1;
      const int sharing = s_.clients / s_.servers_level1 +
                          (server < s_.clients % s_.servers_level1 ? 1 : 0);
      double& free_at = level1_free_[static_cast<std::size_t>(client)];
      free_at = std::max(now, free_at) +
                static_cast<double>(bytes) * sharing / s_.effective_transfer_rate();
      arrival = free_at;
    }
    const double duration = static_cast<double>(bytes) / lanes_.rate[lane];
    double& free_at = channel_free_[static_cast<std::size_t>(client) *
                                        static_cast<std::size_t>(lanes_.size()) +
                                    lane];
    free_at = std::max(arrival, free_at) + duration * s_.clients;
    lane_busy_[lane] += duration;
    lane_bytes_[lane] += bytes;
    return free_at;
  }

  const io_scenario& s_;
  std::vector<emission_event> events_;
  io_lanes lanes_;
  std::vector<double> channel_free_;  // per (client, lane)
  std::vector<double> lane_busy_;
  std::vector<std::int64_t> lane_bytes_;
  std::vector<double> level1_free_;  // per client
  std::vector<io_client> clients_;
  std::priority_queue<io_wakeup, std::vector<io_wakeup>, io_wakeup_after> queue_;
  std::uint64_t seq_ = 0;
  std::int64_t emitted_ = 0;
};

}  // namespace detail

// Event-driven run of one scenario. Clients compute between emissions; an
// emission copies the client's share of a field into its buffer, or blocks
// the client until writes complete and release enough space.
inline io_metrics simulate_io(const io_scenario& scenario) {
  validate(scenario);
  const std::int64_t largest = largest_field_bytes(scenario.schedule);
  const std::int64_t largest_share =
      largest / scenario.clients + (largest % scenario.clients ? 1 : 0);
  if (largest_share > scenario.buffer_bytes)
    throw unwritable_field("a field share of " + std::to_string(largest_share) +
                           " bytes does not fit a " +
                           std::to_string(scenario.buffer_bytes) +
                           "-byte client buffer");
  if (scenario.server_node_memory_bytes > 0) {
    const std::int64_t need = server_memory_required(scenario);
    const std::int64_t have =
        static_cast<std::int64_t>(scenario.server_nodes) * scenario.server_node_memory_bytes;
    if (need > have)
      throw out_of_memory("out of memory: I/O servers need " + std::to_string(need) +
                          " bytes, " + std::to_string(scenario.server_nodes) +
                          " server nodes provide " + std::to_string(have));
  }
  return detail::io_simulation(scenario).run();
}

// --- sweeps ---------------------------------------------------------------

struct io_sweep_row {
  double value = 0;  // the swept parameter
  io_metrics metrics;
};

struct io_sweep {
  std::string axis;
  std::vector<io_sweep_row> rows;
};

inline io_sweep buffer_sweep(const io_scenario& base,
                             const std::vector<std::int64_t>& sizes) {
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < 1) throw invalid_argument("buffer_sweep: sizes must be positive");
    if (k && sizes[k] <= sizes[k - 1])
      throw invalid_argument("buffer_sweep: sizes must be strictly ascending");
  }
  io_sweep out{"buffer_bytes", {}};
  for (std::int64_t size : sizes) {
    io_scenario s = base;
    s.buffer_bytes = size;
    out.rows.push_back({static_cast<double>(size), simulate_io(s)});
  }
  return out;
}

// Varies the writing-server count (level 2 when present, else level 1).
inline io_sweep server_sweep(const io_scenario& base, const std::vector<int>& counts) {
  io_sweep out{"servers", {}};
  for (int n : counts) {
    if (n < 1) throw invalid_argument("server_sweep: server counts must be >= 1");
    io_scenario s = base;
    (s.servers_level2 > 0 ? s.servers_level2 : s.servers_level1) = n;
    out.rows.push_back({static_cast<double>(n), simulate_io(s)});
  }
  return out;
}

inline io_sweep pool_sweep(const io_scenario& base, const std::vector<int>& pool_counts) {
  io_sweep out{"pools", {}};
  for (int p : pool_counts) {
    if (p < 1 || base.writing_servers() % p != 0)
      throw invalid_argument("pool_sweep: " + std::to_string(p) +
                             " pools do not divide " +
                             std::to_string(base.writing_servers()) +
                             " writing servers");
    io_scenario s = base;
    s.pools = p;
    out.rows.push_back({static_cast<double>(p), simulate_io(s)});
  }
  return out;
}

inline io_sweep striping_sweep(const io_scenario& base, const std::vector<double>& factors) {
  io_sweep out{"striping", {}};
  for (double f : factors) {
    if (!(f >= 1)) throw invalid_argument("striping_sweep: factors must be >= 1");
    io_scenario s = base;
    s.striping_factor = f;
    out.rows.push_back({f, simulate_io(s)});
  }
  return out;
}

struct striping_comparison {
  io_metrics off;
  io_metrics on;

  double write_rate_ratio() const noexcept {
    return off.server_write_rate > 0 ? on.server_write_rate / off.server_write_rate : 1.0;
  }
  double wall_clock_ratio() const noexcept {
    return off.wall_clock_s > 0 ? on.wall_clock_s / off.wall_clock_s : 1.0;
  }
  double wait_pct_ratio() const noexcept {
    if (off.client_wait_pct == 0) return on.client_wait_pct == 0 ? 1.0 : INFINITY;
    return on.client_wait_pct / off.client_wait_pct;
  }
};

// The scenario as configured ("on") against the same scenario unstriped.
inline striping_comparison striping_compare(const io_scenario& scenario) {
  io_scenario off = scenario;
  off.striping_factor = 1;
  return {simulate_io(off), simulate_io(scenario)};
}

// --- repeated runs --------------------------------------------------------

// Run k uses seed + k; with rate_jitter == 0 all runs coincide.
inline std::vector<io_metrics> repeat_io(const io_scenario& scenario, int repeat,
                                         std::uint64_t seed) {
  if (repeat < 1) throw invalid_argument("repeat must be >= 1");
  std::vector<io_metrics> runs;
  for (int k = 0; k < repeat; ++k) {
    io_scenario s = scenario;
    s.seed = seed + static_cast<std::uint64_t>(k);
    runs.push_back(simulate_io(s));
  }
  return runs;
}

struct mean_sd {
  double mean = 0;
  double sd = 0;  // sample standard deviation, 0 for a single value
};

inline mean_sd summarize(const std::vector<double>& values) {
  mean_sd out;
  if (values.empty()) return out;
  if (std::all_of(values.begin(), values.end(),
                  [&](double v) { return v == values.front(); })) {
    out.mean = values.front();
    return out;
  }
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

inline const std::vector<std::string>& io_metric_columns() {
  static const std::vector<std::string> cols = {"wall_clock_s", "wait_pct",
                                                "write_rate_mib_s", "bytes_written"};
  return cols;
}

inline std::vector<std::string> io_metric_cells(const io_metrics& m) {
  return {format_number(m.wall_clock_s), format_number(m.client_wait_pct),
          format_number(m.server_write_rate), format_number(m.bytes_written)};
}

// One row per run.
inline csv_table io_runs_csv(const std::vector<io_metrics>& runs) {
  csv_table t;
  t.header = {"run"};
  for (const auto& c : io_metric_columns()) t.header.push_back(c);
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::vector<std::string> row = {format_number(static_cast<std::int64_t>(k))};
    for (auto& cell : io_metric_cells(runs[k])) row.push_back(std::move(cell));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Mean and standard deviation of every metric column of a per-run table.
inline csv_table io_summary_csv(const csv_table& runs) {
  csv_table t;
  t.header = {"runs"};
  std::vector<std::string> row = {format_number(static_cast<std::int64_t>(runs.rows.size()))};
  for (const auto& col : io_metric_columns()) {
    std::vector<double> values;
    for (std::size_t r = 0; r < runs.rows.size(); ++r) values.push_back(runs.number(r, col));
    const mean_sd s = summarize(values);
    t.header.push_back(col + "_mean");
    t.header.push_back(col + "_sd");
    row.push_back(format_number(s.mean));
    row.push_back(format_number(s.sd));
  }
  t.rows.push_back(std::move(row));
  return t;
}

inline csv_table io_sweep_csv(const io_sweep& sweep) {
  csv_table t;
  t.header = {sweep.axis};
  for (const auto& c : io_metric_columns()) t.header.push_back(c);
  for (const auto& r : sweep.rows) {
    std::vector<std::string> row = {format_axis(r.value)};
    for (auto& cell : io_metric_cells(r.metrics)) row.push_back(std::move(cell));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline csv_table striping_csv(const striping_comparison& cmp) {
  csv_table t;
  t.header = {"striping"};
  for (const auto& c : io_metric_columns()) t.header.push_back(c);
  auto add = [&](const char* label, const io_metrics& m) {
    std::vector<std::string> row = {label};
    for (auto& cell : io_metric_cells(m)) row.push_back(std::move(cell));
    t.rows.push_back(std::move(row));
  };
  add("off", cmp.off);
  add("on", cmp.on);
  return t;
}

}  // namespace csperf
