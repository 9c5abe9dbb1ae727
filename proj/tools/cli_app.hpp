#pragma once

#include <iosfwd>

namespace lowrank::cli {

/// Entry point shared by the `lowrank` binary and the tests. Returns 0 on
/// success, 1 on validation errors and 2 on numerical failures.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs the built-in example checks; returns the number of failures.
int selftest(std::ostream& out);

}  // namespace lowrank::cli
