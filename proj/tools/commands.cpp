#include <CLI11.hpp>

namespace cqed::cli {

// Subcommands are registered here as the corresponding engines land.
void register_commands(CLI::App& app) { (void)app; }

}  // namespace cqed::cli
