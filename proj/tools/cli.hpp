#pragma once

#include <iosfwd>

namespace tfs::cli {

/// Runs the command line and returns the process exit status.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace tfs::cli
