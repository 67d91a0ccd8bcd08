#pragma once

#include <cstdint>
#include <ostream>

namespace csbm {

// Runs the built-in oracle-equivalence suite: closed forms against
// definitional counts, solver cross-checks, and the worked threshold
// arithmetic. Prints one line per check and returns true when all pass.
bool run_selftest(std::ostream& out, std::uint64_t seed);

}  // namespace csbm
