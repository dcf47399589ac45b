#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace harvest::detail {

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs `argv` (argv[0] looked up on PATH) in `cwd`, feeding `input` to stdin
/// and collecting stdout/stderr. Throws std::system_error when the process
/// cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          std::string_view input = {});

}  // namespace harvest::detail
