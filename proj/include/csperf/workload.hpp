#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"

namespace csperf {

struct schedule_entry {
  std::int64_t field_count = 0;
  double period_hours = 0;
  std::int64_t bytes_per_field = 0;

  friend bool operator==(const schedule_entry&, const schedule_entry&) = default;
};

// Diagnostic output plan: each entry writes field_count fields every
// period_hours, first output one period into the run.
struct diagnostic_schedule {
  std::vector<schedule_entry> entries;
  double run_hours = 0;

  friend bool operator==(const diagnostic_schedule&, const diagnostic_schedule&) = default;
};

inline void validate(const diagnostic_schedule& s) {
  if (!(s.run_hours > 0))
    throw invalid_argument("schedule: run_hours must be positive");
  for (std::size_t k = 0; k < s.entries.size(); ++k) {
    const auto& e = s.entries[k];
    const std::string where = "schedule entry " + std::to_string(k) + ": ";
    if (e.field_count < 1) throw invalid_argument(where + "field_count must be >= 1");
    if (!(e.period_hours > 0)) throw invalid_argument(where + "period_hours must be positive");
    if (e.bytes_per_field < 1) throw invalid_argument(where + "bytes_per_field must be >= 1");
  }
}

// Number of output times k * period <= run_hours, k >= 1.
inline std::int64_t outputs_per_field(const schedule_entry& e, double run_hours) {
  return static_cast<std::int64_t>(std::floor(run_hours / e.period_hours + 1e-9));
}

inline std::int64_t total_fields(const diagnostic_schedule& s) {
  std::int64_t total = 0;
  for (const auto& e : s.entries) total += e.field_count * outputs_per_field(e, s.run_hours);
  return total;
}

inline std::int64_t total_bytes(const diagnostic_schedule& s) {
  std::int64_t total = 0;
  for (const auto& e : s.entries)
    total += e.field_count * outputs_per_field(e, s.run_hours) * e.bytes_per_field;
  return total;
}

inline std::int64_t largest_field_bytes(const diagnostic_schedule& s) {
  std::int64_t largest = 0;
  for (const auto& e : s.entries) largest = std::max(largest, e.bytes_per_field);
  return largest;
}

// Distinct field variables (sum of field_count).
inline std::int64_t field_variables(const diagnostic_schedule& s) {
  std::int64_t total = 0;
  for (const auto& e : s.entries) total += e.field_count;
  return total;
}

struct emission_event {
  double time_hours = 0;
  int entry = 0;
  std::int64_t field = 0;     // index within the entry
  std::int64_t variable = 0;  // index across all entries
  std::int64_t bytes = 0;

  friend bool operator==(const emission_event&, const emission_event&) = default;
};

// Every field write, ordered by (time, entry, field).
inline std::vector<emission_event> emission_events(const diagnostic_schedule& s) {
  std::vector<emission_event> events;
  events.reserve(static_cast<std::size_t>(total_fields(s)));
  std::int64_t variable_base = 0;
  for (std::size_t k = 0; k < s.entries.size(); ++k) {
    const auto& e = s.entries[k];
    const std::int64_t outputs = outputs_per_field(e, s.run_hours);
    for (std::int64_t n = 1; n <= outputs; ++n)
      for (std::int64_t f = 0; f < e.field_count; ++f)
        events.push_back({static_cast<double>(n) * e.period_hours,
                          static_cast<int>(k), f, variable_base + f,
                          e.bytes_per_field});
    variable_base += e.field_count;
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const emission_event& a, const emission_event& b) {
                     if (a.time_hours != b.time_hours) return a.time_hours < b.time_hours;
                     if (a.entry != b.entry) return a.entry < b.entry;
                     return a.field < b.field;
                   });
  return events;
}

// The 48-hour C192 diagnostic load: 38 fields @18h, 6 @12h, 9 @9h,
// 27 @3h, 99 @1h.
inline diagnostic_schedule c192_schedule(std::int64_t bytes_per_field = 78'704'252) {
  return {{{38, 18, bytes_per_field},
           {6, 12, bytes_per_field},
           {9, 9, bytes_per_field},
           {27, 3, bytes_per_field},
           {99, 1, bytes_per_field}},
          48};
}

}  // namespace csperf
