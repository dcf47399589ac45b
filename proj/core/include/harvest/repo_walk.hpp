#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "harvest/diagnostics.hpp"

namespace harvest::repo {

inline constexpr std::uint64_t kDefaultMaxBlobBytes = 5ull * 1024 * 1024;

struct FileVersion {
    /// Repository-relative, forward slashes.
    std::string path;
    std::optional<std::string> commit_id;
    /// Git blob id (SHA-1 over "blob <size>\0" + bytes), lowercase hex.
    std::string content_digest;
    /// Lossily decoded UTF-8.
    std::string content;

    friend bool operator==(const FileVersion&, const FileVersion&) = default;
};

struct WalkOptions {
    std::uint64_t max_blob_bytes = kDefaultMaxBlobBytes;
};

struct WalkStats {
    std::size_t files = 0;
    std::size_t blobs = 0;
    std::size_t commits = 0;
};

using FileSink = std::function<void(FileVersion&&)>;

/// Git blob id of `bytes`.
std::string blob_digest(std::string_view bytes);

/// True when the first 8 KiB contain a NUL byte.
bool looks_binary(std::string_view bytes);

/// Every regular file under `root` in path order. `.git` directories and
/// symlinks are skipped; oversized, binary and unreadable files are skipped
/// with a diagnostic (binary ones silently).
void enumerate_worktree(const std::filesystem::path& root, const WalkOptions& options, Diagnostics& diags,
                        const FileSink& sink, WalkStats* stats = nullptr);
std::vector<FileVersion> enumerate_worktree(const std::filesystem::path& root, const WalkOptions& options,
                                            Diagnostics& diags, WalkStats* stats = nullptr);

bool is_git_repository(const std::filesystem::path& path);

/// Commits reachable from all refs, parents before children; ties broken by
/// commit timestamp, then id. Throws FatalError("not-a-repository").
std::vector<std::string> ordered_commits(const std::filesystem::path& repo);

/// Every (path, blob) reachable from all refs, each distinct pair yielded once
/// and tagged with the earliest commit containing it. Throws FatalError with
/// code "not-a-repository" or "corrupt-object".
void enumerate_history(const std::filesystem::path& repo, const WalkOptions& options, Diagnostics& diags,
                       const FileSink& sink, WalkStats* stats = nullptr);
std::vector<FileVersion> enumerate_history(const std::filesystem::path& repo, const WalkOptions& options,
                                           Diagnostics& diags, WalkStats* stats = nullptr);

/// Every file of every commit without deduplication.
std::vector<FileVersion> enumerate_history_raw(const std::filesystem::path& repo, const WalkOptions& options,
                                               Diagnostics& diags);

/// Files of one commit's tree.
std::vector<FileVersion> snapshot_at(const std::filesystem::path& repo, const std::string& commit,
                                     const WalkOptions& options, Diagnostics& diags);

/// HEAD's tree, or empty when the repository has no commits.
std::vector<FileVersion> head_snapshot(const std::filesystem::path& repo, const WalkOptions& options,
                                       Diagnostics& diags);

}  // namespace harvest::repo
