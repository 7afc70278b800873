#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fedgnn {

// Subcommands: gen-data, run, sweep, report. Returns the process exit code;
// diagnostics go to `err` prefixed by a stable error tag.
int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace fedgnn
