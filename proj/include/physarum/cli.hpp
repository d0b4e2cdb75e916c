#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace physarum {

// Entry point shared by the physarum binary and the tests. Returns the
// process exit code: 0 success (solve: converged with support match),
// 1 partial (max_time or support mismatch), 2 infeasible or divergence.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace physarum
