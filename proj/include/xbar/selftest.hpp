#pragma once

#include <iosfwd>

namespace xbar {

/// Quick oracle-equivalence and invariant checks; one line per check on `os`.
/// Returns true when all pass.
bool run_selftest(std::ostream& os, unsigned seeds = 10);

}  // namespace xbar
