#ifndef BLOCKSPEC_CLI_HPP
#define BLOCKSPEC_CLI_HPP

#include <iosfwd>

namespace blockspec::cli {

/// Runs one CLI invocation: parses argv, executes the requested analysis,
/// and writes a single JSON report document to `out` (diagnostics to `err`).
/// Exit codes: 0 analysis completed (Unknown verdicts included), 1 failed
/// checks / error verdicts / internal failures, 2 usage or parse errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        std::istream& in);

}  // namespace blockspec::cli

#endif
