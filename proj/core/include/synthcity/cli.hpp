#ifndef SYNTHCITY_CLI_HPP
#define SYNTHCITY_CLI_HPP

namespace synthcity {

/// Entry point for the synthcity command line tool. Dispatches the
/// generate, pool, subsample, batchplan, eval, and stats subcommands.
/// Returns the process exit status: 0 on success, 1 on an operational
/// failure, 2 on a usage or config error. The SYNTHCITY_LOG environment
/// variable (error, warn, info, debug) controls stderr verbosity.
int run_cli(int argc, const char* const* argv);

}  // namespace synthcity

#endif  // SYNTHCITY_CLI_HPP
