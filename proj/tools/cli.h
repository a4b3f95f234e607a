#pragma once

#include <ostream>
#include <string_view>

#include <Eigen/Dense>

namespace whcert {
namespace cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitUnknown = 4;
inline constexpr int kExitCounterexample = 5;
inline constexpr int kExitViolation = 6;

// Comma-separated values. Throws std::invalid_argument.
Eigen::VectorXd ParseVectorArg(std::string_view text);
// Row-major rows x cols gain from comma-separated values.
Eigen::MatrixXd ParseGainArg(std::string_view text, int rows, int cols);

// Runs one whcert command line. Normal output goes to `out`, diagnostics to
// `err`; returns the process exit code.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cli
}  // namespace whcert
