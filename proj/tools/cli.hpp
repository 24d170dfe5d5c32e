#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spolf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRunFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSafetyBreach = 3;

/// Entry point shared by the executable and the tests. args excludes argv[0].
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spolf
