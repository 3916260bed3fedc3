#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace socnav::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitAcceptance = 4;

/// Parses argv (without the program name) and runs one subcommand:
/// gen-uncertainty-data, train-uncertainty, train-policy, evaluate, sweep-noise,
/// simulate or plot. Returns one of the exit codes above.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace socnav::cli
