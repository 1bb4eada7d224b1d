#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <csperf/iosim.hpp>

using namespace csperf;

namespace {

io_scenario small() {
  io_scenario s;
  s.clients = 8;
  s.servers_level1 = 2;
  s.buffer_bytes = 4000;
  s.base_write_rate = 1000;
  s.files = 4;
  s.compute_rate = 10;
  s.schedule = {{{3, 1, 8000}, {2, 2, 16000}}, 6};
  return s;
}

// Random scenario in which every field share fits the buffer.
io_scenario random_scenario(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  io_scenario s;
  s.clients = pick(1, 24);
  s.pools = pick(1, 3);
  s.servers_level2 = pick(0, 2) * s.pools;
  s.servers_level1 = s.servers_level2 > 0 ? pick(0, 4) : pick(1, 3) * s.pools;
  s.files = pick(1, 8);
  s.base_write_rate = real(1e3, 1e6);
  s.striping_factor = pick(0, 1) ? 1.0 : real(1.0, 4.0);
  s.pool_contention = real(0.0, 1.0);
  s.compute_rate = pick(0, 3) ? real(0.0, 100.0) : 0.0;
  s.rate_jitter = pick(0, 1) ? 0.0 : 0.2;
  s.seed = rng();
  s.schedule.run_hours = pick(1, 12);
  const int entries = pick(0, 4);
  for (int k = 0; k < entries; ++k)
    s.schedule.entries.push_back({pick(1, 6), static_cast<double>(pick(1, 6)),
                                  std::uniform_int_distribution<std::int64_t>(1, 2'000'000)(rng)});
  const std::int64_t largest = largest_field_bytes(s.schedule);
  s.buffer_bytes = std::max<std::int64_t>(1, (largest + s.clients - 1) / s.clients);
  return s;
}

}  // namespace

TEST(IoSim, EmptyScheduleIsPureCompute) {
  auto s = small();
  s.schedule.entries.clear();
  const auto m = simulate_io(s);
  EXPECT_DOUBLE_EQ(m.wall_clock_s, 60.0);
  EXPECT_EQ(m.client_wait_pct, 0);
  EXPECT_EQ(m.bytes_written, 0);
}

TEST(IoSim, HugeBufferHidesEverything) {
  auto s = small();
  s.buffer_bytes = total_bytes(s.schedule);
  const auto m = simulate_io(s);
  EXPECT_EQ(m.client_wait_pct, 0);
  EXPECT_EQ(m.client_wait_s, 0);
  EXPECT_EQ(m.bytes_written, total_bytes(s.schedule));
}

TEST(IoSim, SmallBufferBlocks) {
  auto s = small();
  s.buffer_bytes = 2000;  // one 16000-byte share
  const auto m = simulate_io(s);
  EXPECT_GT(m.client_wait_pct, 0);
  EXPECT_LE(m.client_wait_pct, 100);
}

TEST(IoSim, Errors) {
  auto s = small();
  s.buffer_bytes = 1999;
  EXPECT_THROW(simulate_io(s), unwritable_field);
  s = small();
  s.server_node_memory_bytes = 1000;
  EXPECT_THROW(simulate_io(s), out_of_memory);
  s.server_node_memory_bytes = 8 * 4000 + 2 * 16000;
  EXPECT_NO_THROW(simulate_io(s));
  s = small();
  s.servers_level2 = 3;
  s.pools = 2;
  EXPECT_THROW(simulate_io(s), invalid_argument);
  s = small();
  s.servers_level1 = 0;
  EXPECT_THROW(simulate_io(s), invalid_argument);
}

TEST(IoSim, ClientShares) {
  for (std::int64_t bytes : {0LL, 1LL, 7LL, 1000LL, 78'704'252LL}) {
    std::int64_t sum = 0;
    for (int c = 0; c < 13; ++c) sum += client_share(bytes, 13, c);
    EXPECT_EQ(sum, bytes);
  }
}

TEST(IoSim, LaneLayout) {
  io_scenario s = small();
  s.servers_level1 = 8;
  s.servers_level2 = 8;
  s.pools = 4;
  s.files = 6;  // pools get 2, 2, 1, 1 files
  s.pool_contention = 0.5;
  s.striping_factor = 40;
  const auto lanes = make_lanes(s);
  EXPECT_EQ(lanes.pool_lanes, (std::vector<int>{2, 2, 1, 1}));
  EXPECT_DOUBLE_EQ(lanes.rate[0], 1000 * 16 / 1.5);
  EXPECT_DOUBLE_EQ(lanes.rate[4], 1000 * 16.0);
  EXPECT_EQ(lanes.lane_of_file, (std::vector<int>{0, 2, 4, 5, 1, 3}));
}

TEST(IoSim, Determinism) {
  auto s = small();
  s.rate_jitter = 0.3;
  s.seed = 11;
  EXPECT_EQ(simulate_io(s), simulate_io(s));
  s.buffer_bytes = 2000;
  EXPECT_EQ(simulate_io(s), simulate_io(s));
}

TEST(IoSim, TwoLevelConserves) {
  auto s = small();
  s.servers_level1 = 3;
  s.servers_level2 = 4;
  s.pools = 2;
  const auto m = simulate_io(s);
  EXPECT_EQ(m.bytes_written, total_bytes(s.schedule));
  EXPECT_EQ(m.write_lanes, 4);
}

TEST(IoSim, ServerSweep) {
  auto s = small();
  s.buffer_bytes = 2000;
  s.files = 8;
  s.pool_contention = 0;  // a second server doubles the drain rate
  const auto sweep = server_sweep(s, {1, 2});
  EXPECT_EQ(sweep.axis, "servers");
  EXPECT_LT(sweep.rows[1].metrics.wall_clock_s, sweep.rows[0].metrics.wall_clock_s);
  EXPECT_THROW(server_sweep(s, {0}), invalid_argument);
}

TEST(IoSim, BufferSweep) {
  auto s = small();
  const auto sweep = buffer_sweep(s, {2000, 4000, 8000, 64000});
  for (std::size_t k = 1; k < sweep.rows.size(); ++k)
    EXPECT_LE(sweep.rows[k].metrics.client_wait_s, sweep.rows[k - 1].metrics.client_wait_s);
  EXPECT_THROW(buffer_sweep(s, {4000, 2000}), invalid_argument);
  EXPECT_THROW(buffer_sweep(s, {0}), invalid_argument);
}

TEST(IoSim, PoolSweep) {
  auto s = small();
  s.servers_level1 = 2;
  s.servers_level2 = 8;
  s.buffer_bytes = 2000;
  s.files = 8;
  const auto sweep = pool_sweep(s, {1, 2, 4, 8});
  ASSERT_EQ(sweep.rows.size(), 4u);
  for (const auto& r : sweep.rows) EXPECT_EQ(r.metrics.bytes_written, total_bytes(s.schedule));
  EXPECT_NE(sweep.rows[0].metrics.wall_clock_s, sweep.rows[3].metrics.wall_clock_s);
  EXPECT_THROW(pool_sweep(s, {3}), invalid_argument);

  // One pool with one server is the single-server case.
  auto one = small();
  one.servers_level1 = 1;
  EXPECT_EQ(pool_sweep(one, {1}).rows[0].metrics,
            server_sweep(one, {1}).rows[0].metrics);
}

TEST(IoSim, Striping) {
  auto s = small();
  s.buffer_bytes = 2000;
  const auto same = striping_compare(s);
  EXPECT_EQ(same.off, same.on);
  EXPECT_EQ(same.write_rate_ratio(), 1.0);
  s.striping_factor = 2.5;
  const auto cmp = striping_compare(s);
  EXPECT_NEAR(cmp.write_rate_ratio(), 2.5, 1e-9);
  EXPECT_LT(cmp.on.client_wait_pct, cmp.off.client_wait_pct);
  s.stripe_cap = 2;
  EXPECT_NEAR(striping_compare(s).write_rate_ratio(), 2.0, 1e-9);
  const auto sweep = striping_sweep(s, {1, 1.5});
  EXPECT_EQ(io_sweep_csv(sweep).rows[1][0], "1.5");
}

TEST(IoSim, RepeatsAndSummary) {
  auto s = small();
  s.buffer_bytes = 2000;
  const auto flat = io_summary_csv(io_runs_csv(repeat_io(s, 3, 0)));
  EXPECT_EQ(flat.number(0, "wall_clock_s_sd"), 0);
  s.rate_jitter = 0.2;
  const auto runs = repeat_io(s, 3, 5);
  const auto table = io_runs_csv(runs);
  ASSERT_EQ(table.rows.size(), 3u);
  const auto summary = io_summary_csv(table);
  EXPECT_EQ(summary.rows[0][0], "3");
  EXPECT_GT(summary.number(0, "wall_clock_s_sd"), 0);
  EXPECT_EQ(summary.number(0, "bytes_written_sd"), 0);

  std::vector<double> wall;
  for (const auto& m : runs) wall.push_back(m.wall_clock_s);
  double mean = (wall[0] + wall[1] + wall[2]) / 3;
  double ss = 0;
  for (double w : wall) ss += (w - mean) * (w - mean);
  EXPECT_NEAR(summary.number(0, "wall_clock_s_sd"), std::sqrt(ss / 2), 1e-9);
  EXPECT_THROW(repeat_io(s, 0, 0), invalid_argument);
}

TEST(IoSim, SummarizeOracle) {
  const auto s = summarize({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.sd, 1.2909944487358056, 1e-15);
  EXPECT_EQ(summarize({7}).sd, 0);
  EXPECT_EQ(summarize({0.1, 0.1, 0.1}).sd, 0);
}

TEST(IoSimProperty, ConservationBoundsMonotonicity) {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_scenario(rng);
    SCOPED_TRACE("trial " + std::to_string(trial));
    const auto m = simulate_io(s);
    ASSERT_EQ(m.bytes_written, total_bytes(s.schedule));
    ASSERT_GE(m.client_wait_pct, 0);
    ASSERT_LE(m.client_wait_pct, 100);
    const double compute = s.schedule.run_hours * s.compute_rate;
    const double bandwidth = static_cast<double>(m.bytes_written) / m.aggregate_write_rate;
    ASSERT_GE(m.wall_clock_s * (1 + 1e-12), compute);
    ASSERT_GE(m.wall_clock_s * (1 + 1e-12), bandwidth);

    double last = m.client_wait_s;
    io_scenario bigger = s;
    for (int step = 0; step < 3; ++step) {
      bigger.buffer_bytes = bigger.buffer_bytes * 2 + 1;
      const auto mb = simulate_io(bigger);
      ASSERT_LE(mb.client_wait_s, last * (1 + 1e-12) + 1e-12) << "buffer " << bigger.buffer_bytes;
      last = mb.client_wait_s;
    }
  }
}
