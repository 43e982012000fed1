#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gamtalk/service/config.hpp"

namespace gamtalk::service {

/// Entry point of the `gamtalk` tool. `args` excludes the program name.
/// Errors are written to `err` as one JSON object per line; the return value
/// is the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in,
        const EnvLookup& env = process_env());

} // namespace gamtalk::service
