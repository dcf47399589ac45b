#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "harvest/proximity.hpp"
#include "harvest/pyflow/sinks.hpp"
#include "harvest/report.hpp"
#include "harvest/repo_walk.hpp"

namespace harvest {

enum class ScanMode { Worktree, History };

struct ScanConfig {
    std::filesystem::path target;
    ScanMode mode = ScanMode::Worktree;
    /// Run the data-flow stage on every distinct historical snapshot too.
    bool flow_history = false;
    /// Catalog file, or `builtin` / `asyncpg-legacy`.
    std::string sink_catalog = "builtin";
    /// Secrets report from external detectors; the builtin detector runs when absent.
    std::optional<std::filesystem::path> secrets_report;
    std::uint32_t window = proximity::kDefaultWindow;
    double threshold = proximity::kDefaultThreshold;
    std::uint64_t max_blob_bytes = repo::kDefaultMaxBlobBytes;
    std::optional<std::filesystem::path> output;
    ReportFormat format = ReportFormat::Json;
    /// 0 picks the hardware concurrency.
    unsigned threads = 0;
};

/// Throws FatalError on an invalid configuration.
void validate_config(const ScanConfig& cfg);

/// Pattern matching over every file version, data flow over the latest
/// snapshot (every snapshot with `flow_history`), then proximity pairing of
/// secrets whose value no earlier stage paired. Returns the merged pairs.
/// Throws FatalError for an invalid target, catalog or secrets report.
Report run_scan(const ScanConfig& cfg);

/// Stage entry points over in-memory files, used by run_scan.
std::vector<SecretAssetPair> pattern_stage(const std::vector<repo::FileVersion>& files, Diagnostics& diags,
                                           unsigned threads = 1);
std::vector<SecretAssetPair> flow_stage(const std::vector<repo::FileVersion>& snapshot,
                                        const std::vector<pyflow::SinkSpec>& catalog, Diagnostics& diags,
                                        unsigned threads = 1);
/// Builtin detection runs over `files`; external findings are located in
/// `latest` first, then in the last version of the path within `files`.
std::vector<SecretAssetPair> proximity_stage(const std::vector<repo::FileVersion>& files,
                                             const std::vector<repo::FileVersion>& latest,
                                             const std::vector<SecretAssetPair>& covered,
                                             const std::optional<std::vector<proximity::SecretFinding>>& external,
                                             const proximity::ProximityOptions& options, Diagnostics& diags,
                                             unsigned threads = 1);

/// Grammar groups, sink catalog summary and heuristic parameters.
std::string explain_rules(const std::vector<pyflow::SinkSpec>& catalog, const proximity::ProximityOptions& options = {});

}  // namespace harvest
