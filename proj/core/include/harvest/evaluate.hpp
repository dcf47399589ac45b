#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/model.hpp"
#include "harvest/report.hpp"

namespace harvest {

inline constexpr std::string_view kTruthSchema = "harvest-truth/1";

/// One labeled pair: the identity key plus its kind.
struct TruthPair {
    DatabaseKind kind = DatabaseKind::Unknown;
    PairKey key;

    friend bool operator==(const TruthPair&, const TruthPair&) = default;
};

/// Ground truth file:
///
///     {"schema_version": "harvest-truth/1",
///      "pairs": [{"kind": "MySQL", "password": "...", "username": null,
///                 "host": "...", "port": 3306, "file_path": "...", "line": 4}]}
///
/// `username` and `port` may be null or omitted. Throws SchemaError whose
/// record is the 1-based index into `pairs` (0 for document-level problems).
std::vector<TruthPair> parse_truth(std::string_view json);
std::vector<TruthPair> read_truth_file(const std::string& path);
std::string emit_truth(const std::vector<TruthPair>& truth);
std::vector<TruthPair> truth_from_pairs(const std::vector<SecretAssetPair>& pairs);

double precision(std::size_t tp, std::size_t fp);
double recall(std::size_t tp, std::size_t fn);
/// Harmonic mean; 0 when p + r = 0.
double f1_score(double p, double r);

struct Metrics {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    double precision() const { return harvest::precision(tp, fp); }
    double recall() const { return harvest::recall(tp, fn); }
    double f1() const { return f1_score(precision(), recall()); }

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct EvalResult {
    std::map<DatabaseKind, Metrics> per_kind;
    Metrics overall;
};

/// Matches on pair_identity. True positives and false negatives are filed
/// under the labeled kind, false positives under the reported kind.
EvalResult evaluate(const std::vector<SecretAssetPair>& reported, const std::vector<TruthPair>& truth);
EvalResult evaluate(const Report& report, const std::vector<TruthPair>& truth);

std::string emit_eval(const EvalResult& result, ReportFormat format);

}  // namespace harvest
