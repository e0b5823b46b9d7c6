#pragma once

#include <string>
#include <vector>

namespace umic {

struct SubprocessResult {
    int exit_code = -1;
    std::string stderr_text;
};

// Runs argv[0] with the given arguments, stdout inherited, stderr captured.
// Throws ErrKind::codec when the process cannot be spawned.
SubprocessResult run_subprocess(const std::vector<std::string>& argv);

// Splits a command template on whitespace after substituting {placeholders}.
std::vector<std::string> split_command(const std::string& command);

}  // namespace umic
