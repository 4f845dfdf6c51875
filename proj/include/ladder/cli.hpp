#ifndef LADDER_CLI_HPP
#define LADDER_CLI_HPP

namespace ladder {

inline constexpr const char* kToolVersion = "1.0.0";

/// Exit codes: 0 success, 1 internal error, 2 bad input, 3 feasibility cap.
int cli_main(int argc, const char* const* argv);

} // namespace ladder

#endif
