#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/diagnostics.hpp"
#include "harvest/model.hpp"

namespace harvest {

inline constexpr std::string_view kReportSchema = "harvest-report/1";

enum class ReportFormat { Json, HumanText };

struct ScanCounts {
    std::size_t files = 0;
    std::size_t blobs = 0;
    std::size_t commits = 0;

    friend bool operator==(const ScanCounts&, const ScanCounts&) = default;
};

struct Report {
    std::string schema_version{kReportSchema};
    ScanCounts scanned;
    /// merge_pairs output.
    std::vector<SecretAssetPair> pairs;
    std::vector<Diagnostic> diagnostics;

    friend bool operator==(const Report&, const Report&) = default;
};

/// Json: fixed key order, two-space indent, trailing newline. Absent
/// optionals are written as null. HumanText groups pairs by secret file.
std::string emit_report(const Report& report, ReportFormat format);

/// Inverse of the Json form. Throws FatalError("invalid-report").
Report parse_report(std::string_view json);
Report read_report_file(const std::string& path);

/// `p****3` style masking used by the text format.
std::string mask_secret(std::string_view secret);

}  // namespace harvest
