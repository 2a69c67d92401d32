#pragma once

#include <iosfwd>

namespace greenflow {

// Entry point of the `greenflow` tool. Data goes to --out files (stdout when
// omitted), diagnostics to `err`. Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace greenflow
