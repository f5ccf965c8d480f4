#pragma once

namespace pricesim {

// Entry point behind the pricesim binary: subcommands run, report, inspect.
// Returns the process exit status.
int cli_main(int argc, const char* const* argv);

}  // namespace pricesim
