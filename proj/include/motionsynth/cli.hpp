#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace motionsynth {

/// Entry point of the `motionsynth` tool: subcommands render, serve, demo.
/// Returns the process exit code (0 ok, 1 on any error).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace motionsynth
