#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace sphchaos::cli {

// Exit codes: 0 all checks passed, 1 a check or tolerance failed, 2 usage.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Comma-separated items, each "n", "a..b" (a, 2a, 4a, ... up to b) or
// "a:b:step". Throws DomainError on malformed input.
std::vector<int> parse_ell_list(const std::string& text);
std::vector<double> parse_real_list(const std::string& text);

// "key = value" lines; '#' starts a comment. Keys may use '_' for '-'.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

}  // namespace sphchaos::cli
