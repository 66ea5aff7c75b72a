#pragma once

#include <string>
#include <vector>

namespace kgbayes::cli {

// Subcommands: encode, fit, predict, rules, eval. Returns the process exit
// code: 0 success, 1 usage error, 2 data/model error. Errors go to stderr.
int run(const std::vector<std::string>& argv);

}  // namespace kgbayes::cli
