#pragma once

namespace sqlbound {

/// Subcommands mine, validate, verify, evaluate and replay. Returns 0 on a
/// clean run, 1 when any entry failed and 2 on a configuration error.
int cli_main(int argc, char** argv);

}  // namespace sqlbound
