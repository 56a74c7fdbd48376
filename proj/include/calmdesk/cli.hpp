#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace calmdesk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Subcommands: forge, reframe, metrics, ratings, serve. args excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

} // namespace calmdesk::cli
