#pragma once

#include <ostream>

namespace udn {

/// Entry point of the udnsim driver. Returns the process exit code; results
/// go to `out`, diagnostics and progress to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace udn
