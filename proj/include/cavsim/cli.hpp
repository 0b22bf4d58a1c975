#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cavsim {

inline constexpr const char* kVersion = "1.0.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitIo = 3;

// Entry point shared by the executable and the tests. Default output root
// comes from CAVSIM_OUT_ROOT, else "runs".
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cavsim
