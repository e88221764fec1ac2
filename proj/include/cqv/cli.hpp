/// @file cli.hpp
/// @brief Command-line entry point shared by the `cqv` binary and the tests.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cqv::cli {

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 on a domain error ("error [Kind]: message" on `err`), 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cqv::cli
