#pragma once

#include <stdexcept>
#include <string>

namespace csperf {

// Base for all errors raised by the model. `what()` carries a human-readable
// diagnostic; `kind()` a stable machine-readable tag.
class error : public std::runtime_error {
public:
  error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

// Bad input to a model operation (sizes, layouts, depths).
class invalid_argument : public error {
public:
  explicit invalid_argument(const std::string& message)
      : error("INVALID_ARGUMENT", message) {}
};

// A layout that violates ranks_per_node * threads_per_rank == cores_per_node.
class layout_error : public error {
public:
  explicit layout_error(const std::string& message)
      : error("LAYOUT", message) {}
};

// Simulated configuration needs more memory than the nodes provide.
class out_of_memory : public error {
public:
  explicit out_of_memory(const std::string& message)
      : error("OUT_OF_MEMORY", message) {}
};

// A single field share does not fit into a client buffer.
class unwritable_field : public error {
public:
  explicit unwritable_field(const std::string& message)
      : error("UNWRITABLE_FIELD", message) {}
};

// Scenario file problems; `where` is a JSON pointer or "line:column".
class config_error : public error {
public:
  config_error(std::string where, const std::string& message)
      : error("CONFIG", where.empty() ? message : where + ": " + message),
        where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

private:
  std::string where_;
};

}  // namespace csperf
