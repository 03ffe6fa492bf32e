#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace metsim::cli {

/// Process exit codes. Usage/input/validation failures are distinct so
/// callers can script against them.
enum exit_code : int {
    exit_ok = 0,
    exit_usage = 2,
    exit_input_error = 3,
    exit_validation_failed = 4,
};

/// Runs the command line (argv without the program name) against the
/// given streams. The binary in tools/ is a thin wrapper around this.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metsim::cli
