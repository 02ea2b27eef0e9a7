#pragma once

#include <iostream>

namespace bayesio
{

/// Entry point of the `bayesio` tool. Returns 0 on success, 1 on a usage
/// error (usage text goes to `err`), 2 when the command itself fails.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                 std::ostream& err = std::cerr);

}  // namespace bayesio
