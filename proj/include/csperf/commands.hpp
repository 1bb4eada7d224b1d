#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "csv.hpp"
#include "dyncore.hpp"
#include "iosim.hpp"

namespace csperf {

enum exit_code : int { exit_ok = 0, exit_config = 2, exit_simulation = 3 };

// Named output produced by a command; written only once everything succeeded.
struct output_file {
  std::string name;
  std::string content;
};

// Each file goes to a temporary sibling first and is renamed into place.
inline void write_outputs(const std::string& dir, const std::vector<output_file>& files) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& f : files) {
    const fs::path final_path = fs::path(dir) / f.name;
    const fs::path tmp = fs::path(dir) / ("." + f.name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
      out << f.content;
      if (!out.flush()) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    }
    fs::rename(tmp, final_path);
  }
}

// Fixed-width text rendering of a CSV table.
inline std::string render_table(const csv_table& t) {
  std::vector<std::size_t> width(t.header.size(), 0);
  for (std::size_t k = 0; k < t.header.size(); ++k) width[k] = t.header[k].size();
  for (const auto& r : t.rows)
    for (std::size_t k = 0; k < r.size() && k < width.size(); ++k)
      width[k] = std::max(width[k], r[k].size());
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) os << "  ";
      os << std::setw(static_cast<int>(width[k])) << cells[k];
    }
    os << "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return os.str();
}

// --- dynamical core -------------------------------------------------------

inline run_spec make_run_spec(const scenario_config& cfg, const dyncore_case& c) {
  run_spec run;
  run.mesh = cubed_sphere_mesh(c.panel_size, c.levels);
  run.machine = cfg.machine;
  run.cost = cfg.cost;
  run.nodes = c.nodes.front();
  run.threads_per_rank = c.threads.front();
  run.ranks_per_node =
      c.ranks_per_node ? c.ranks_per_node : cfg.machine.cores_per_node / run.threads_per_rank;
  run.timesteps = cfg.run.timesteps;
  run.mode = cfg.run.mode;
  run.halo_depth = cfg.run.halo_depth;
  run.redundant_depth = cfg.run.redundant_depth;
  run.bytes_per_cell = cfg.run.bytes_per_cell;
  return run;
}

inline scaling_table run_case(const scenario_config& cfg, const dyncore_case& c) {
  const run_spec base = make_run_spec(cfg, c);
  if (c.nodes.size() > 1) return strong_scaling_study(base, c.nodes);
  if (c.threads.size() > 1) return thread_sweep(base, c.threads);
  scaling_table t;
  t.rows.push_back({simulate(base)});
  return t;
}

// Rows of several case tables, prefixed with the mesh size.
inline csv_table cases_csv(const std::vector<std::pair<int, scaling_table>>& tables) {
  bool ideal = !tables.empty();
  for (const auto& [n, t] : tables) ideal = ideal && t.has_ideal;
  csv_table out;
  out.header = {"panel_size"};
  for (const auto& c : scaling_columns()) out.header.push_back(c);
  if (ideal) out.header.push_back("ideal_s");
  for (const auto& [n, t] : tables)
    for (const auto& row : t.rows) {
      std::vector<std::string> cells = {format_number(n)};
      for (auto& cell : breakdown_cells(row.breakdown)) cells.push_back(std::move(cell));
      if (ideal) cells.push_back(format_number(row.ideal_s));
      out.rows.push_back(std::move(cells));
    }
  return out;
}

inline std::string cases_report(const std::vector<std::pair<int, scaling_table>>& tables,
                                const scenario_config& cfg) {
  std::ostringstream os;
  for (std::size_t k = 0; k < tables.size(); ++k) {
    const auto& c = cfg.cases[k];
    os << "C" << c.panel_size << " L" << c.levels << " on " << cfg.machine.name
       << " (" << cfg.cost.preset << ")\n"
       << breakdown_report(tables[k].second) << "\n";
  }
  return os.str();
}

// --- I/O ------------------------------------------------------------------

inline std::string io_summary_text(const csv_table& summary) {
  std::ostringstream os;
  os << "io runs: " << summary.rows.at(0).at(0) << "\n";
  for (const auto& col : io_metric_columns())
    os << "  " << std::left << std::setw(18) << col << std::right
       << format_number(summary.number(0, col + "_mean")) << " +- "
       << format_number(summary.number(0, col + "_sd")) << "\n";
  return os.str();
}

// --- commands -------------------------------------------------------------

inline std::vector<output_file> run_outputs(const scenario_config& cfg, int repeat,
                                            std::optional<std::uint64_t> seed) {
  std::vector<output_file> files;
  std::string text;
  if (!cfg.cases.empty()) {
    std::vector<std::pair<int, scaling_table>> tables;
    for (const auto& c : cfg.cases) tables.emplace_back(c.panel_size, run_case(cfg, c));
    files.push_back({"dyncore.csv", cases_csv(tables).str()});
    const std::string report = cases_report(tables, cfg);
    files.push_back({"breakdown.txt", report});
    text += report;
  }
  if (cfg.io) {
    const auto runs = repeat_io(*cfg.io, repeat, seed.value_or(cfg.io->seed));
    const csv_table per_run = io_runs_csv(runs);
    const csv_table summary = io_summary_csv(per_run);
    files.push_back({"io.csv", per_run.str()});
    files.push_back({"io_summary.csv", summary.str()});
    text += io_summary_text(summary);
  }
  if (files.empty()) throw config_error("/", "nothing to run: no mesh/layout and no io_scenario");
  files.push_back({"summary.txt", text});
  return files;
}

// CSV for one sweep axis.
inline csv_table sweep_axis(const scenario_config& cfg, const std::string& axis) {
  auto it = cfg.sweep.find(axis);
  if (it == cfg.sweep.end())
    throw config_error("/sweep/" + axis, "axis is not configured");
  const auto& values = it->second;
  if (values.empty()) throw config_error("/sweep/" + axis, "axis has no values");
  std::vector<int> ints;
  for (double v : values) ints.push_back(static_cast<int>(v));

  if (axis == "threads" || axis == "nodes") {
    std::vector<std::pair<int, scaling_table>> tables;
    for (const auto& c : cfg.cases) {
      const run_spec base = make_run_spec(cfg, c);
      tables.emplace_back(c.panel_size, axis == "threads" ? thread_sweep(base, ints)
                                                         : strong_scaling_study(base, ints));
    }
    return cases_csv(tables);
  }
  const io_scenario& s = *cfg.io;
  if (axis == "buffer_bytes") {
    std::vector<std::int64_t> sizes;
    for (double v : values) sizes.push_back(static_cast<std::int64_t>(v));
    return io_sweep_csv(buffer_sweep(s, sizes));
  }
  if (axis == "servers") return io_sweep_csv(server_sweep(s, ints));
  if (axis == "pools") return io_sweep_csv(pool_sweep(s, ints));
  if (axis == "striping") return io_sweep_csv(striping_sweep(s, values));
  throw config_error("/sweep/" + axis, "unknown axis");
}

inline std::vector<output_file> sweep_outputs(const scenario_config& cfg,
                                              std::vector<std::string> axes) {
  if (axes.empty())
    for (const auto& [axis, values] : cfg.sweep) axes.push_back(axis);
  if (axes.empty()) throw config_error("/sweep", "no sweep axis given or configured");
  std::vector<output_file> files;
  for (const auto& axis : axes) {
    bool known = false;
    for (const auto& a : sweep_axes()) known = known || a == axis;
    if (!known) throw config_error("--axis " + axis, "unknown axis");
    files.push_back({axis + ".csv", sweep_axis(cfg, axis).str()});
  }
  return files;
}

// --- report ---------------------------------------------------------------

enum class table_kind { scaling, io };

inline table_kind classify(const csv_table& t, const std::string& path) {
  bool scaling = true, io = true;
  for (const auto& c : scaling_columns()) scaling = scaling && t.column(c) >= 0;
  for (const auto& c : io_metric_columns()) io = io && t.column(c) >= 0;
  if (scaling) return table_kind::scaling;
  if (io) return table_kind::io;
  throw config_error(path, "not a scaling or io metrics table");
}

// Mean and standard deviation of every metric of each io table, then the
// ratio of each table's means to the first table's.
inline csv_table io_comparison(const std::vector<csv_table>& tables,
                               const std::vector<std::string>& labels) {
  csv_table out;
  out.header = {"metric"};
  for (const auto& l : labels) {
    out.header.push_back(l + "_mean");
    out.header.push_back(l + "_sd");
  }
  for (std::size_t k = 1; k < labels.size(); ++k) out.header.push_back(labels[k] + "_ratio");
  for (const auto& col : io_metric_columns()) {
    std::vector<std::string> row = {col};
    std::vector<double> means;
    for (const auto& t : tables) {
      std::vector<double> values;
      for (std::size_t r = 0; r < t.rows.size(); ++r) values.push_back(t.number(r, col));
      const mean_sd s = summarize(values);
      means.push_back(s.mean);
      row.push_back(format_number(s.mean));
      row.push_back(format_number(s.sd));
    }
    for (std::size_t k = 1; k < means.size(); ++k)
      row.push_back(format_number(means[0] == 0 && means[k] == 0 ? 1.0 : means[k] / means[0]));
    out.rows.push_back(std::move(row));
  }
  return out;
}

struct report_result {
  std::string text;
  std::vector<output_file> files;
};

inline report_result report(const std::vector<std::string>& paths) {
  if (paths.empty()) throw config_error("report", "no CSV files given");
  std::vector<csv_table> tables;
  for (const auto& p : paths) {
    try {
      tables.push_back(read_csv(p));
    } catch (const invalid_argument& e) {
      throw config_error(p, e.what());
    }
  }
  const table_kind kind = classify(tables[0], paths[0]);
  for (std::size_t k = 1; k < tables.size(); ++k) {
    if (classify(tables[k], paths[k]) != kind || tables[k].header != tables[0].header)
      throw config_error(paths[k], "schema differs from " + paths[0]);
  }

  report_result out;
  std::ostringstream os;
  if (kind == table_kind::scaling) {
    if (tables.size() == 1) {
      os << paths[0] << "\n" << render_table(tables[0]);
    }
    for (std::size_t k = 1; k < tables.size(); ++k) {
      csv_table ratios;
      try {
        ratios = ratio_report(tables[0], tables[k]);
      } catch (const invalid_argument& e) {
        throw config_error(paths[k], e.what());
      }
      os << "ratio " << paths[0] << " / " << paths[k] << "\n" << render_table(ratios) << "\n";
      out.files.push_back({"ratio_" + std::to_string(k) + ".csv", ratios.str()});
    }
  } else {
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < paths.size(); ++k) labels.push_back("f" + std::to_string(k));
    const csv_table cmp = io_comparison(tables, labels);
    for (std::size_t k = 0; k < paths.size(); ++k)
      os << labels[k] << ": " << paths[k] << " (" << tables[k].rows.size() << " rows)\n";
    os << render_table(cmp);
    out.files.push_back({"io_report.csv", cmp.str()});
  }
  out.text = os.str();
  return out;
}

}  // namespace csperf
