#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "cqed/log.hpp"
#include "cqed/version.hpp"

namespace cqed::cli {
void register_commands(CLI::App& app);
}

int main(int argc, char** argv) {
  CLI::App app{"cavity QED simulation toolkit"};
  app.set_version_flag("--version", cqed::version_string);
  app.require_subcommand(0, 1);
  cqed::cli::register_commands(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    cqed::log(cqed::LogLevel::error, e.what());
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  if (app.get_subcommands().empty()) std::puts(app.help().c_str());
  return 0;
}
