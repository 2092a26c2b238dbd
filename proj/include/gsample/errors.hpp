#pragma once

#include <stdexcept>
#include <string>

namespace gsample {

// Invalid user-supplied parameter (sample size out of range, zero
// partitions, more walkers than vertices, ...).
struct parameter_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A metric is mathematically undefined for the given graph, e.g. density
// of a graph with fewer than two vertices.
struct undefined_metric : std::domain_error {
  using std::domain_error::domain_error;
};

// Malformed input file. The message carries the line number or field name.
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failure inside a vertex-centric program, e.g. a message addressed to a
// vertex id that does not exist.
struct bsp_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gsample
