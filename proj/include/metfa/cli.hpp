#ifndef METFA_CLI_HPP
#define METFA_CLI_HPP

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace metfa::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInsufficientSamples = 3;
inline constexpr int kExitMetricUndefined = 4;

struct Environment {
  std::optional<std::string> seed;  // METFA_SEED, used when --seed is absent
};

Environment environment_from_process();

// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Environment& env = {});

}  // namespace metfa::cli

#endif  // METFA_CLI_HPP
