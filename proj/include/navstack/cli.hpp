#pragma once

namespace navstack::cli {

/// Entry point of the `navstack` tool. Exit codes: 0 success, 1 the checked
/// property or run failed, 2 bad input (config, spec, schema, usage).
int run(int argc, char** argv);

}  // namespace navstack::cli
