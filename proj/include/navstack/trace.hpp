#pragma once

// Boolean traces as CSV: a header row `t,<atom>,...` and one row per step
// with 0/1 values. Atom names containing commas must be quoted.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "navstack/pastltl.hpp"

namespace navstack {

struct Trace {
  std::vector<std::string> atoms;
  std::vector<double> t;
  std::vector<ltl::Valuation> rows;
};

/// Throws SchemaError.
Trace parse_trace_csv(std::string_view text);
Trace load_trace_csv(const std::filesystem::path& path);

std::string to_csv(const Trace& trace);

}  // namespace navstack
