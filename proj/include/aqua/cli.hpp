#pragma once

namespace aqua {

/// Entry point of the `aqua` command-line tool.  Exit codes: 0 success,
/// 1 parse/validation error, 2 infeasible, 3 resource caps hit (partial
/// result written).
int run_cli(int argc, const char* const* argv);

}  // namespace aqua
