#include <cmath>

#include <gtest/gtest.h>

#include "harvest/evaluate.hpp"
#include "harvest/report.hpp"

using namespace harvest;

namespace {

SecretAssetPair sample(DetectionMethod method, std::string password = "s3cret") {
    SecretAssetPair p;
    p.kind = DatabaseKind::PostgreSQL;
    p.credential = {std::string("app"), std::move(password)};
    p.asset = make_asset("db.example.com", 5432, std::string("main"), std::string("postgresql"));
    p.secret_location = {std::string("0123abcd"), "src/db.py", 4, 12};
    p.asset_location = {std::string("0123abcd"), "src/db.py", 2, std::nullopt};
    p.method = method;
    if (method == DetectionMethod::DataFlow) p.sink_call_location = SourceLocation{std::nullopt, "src/db.py", 9, 5};
    if (method == DetectionMethod::ProximityHeuristic) p.similarity_score = 0.6123456789012345;
    return p;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

TEST(Report, EmptyIsValid) {
    Report r;
    const auto json = emit_report(r, ReportFormat::Json);
    EXPECT_NE(json.find("\"pairs\": []"), std::string::npos);
    EXPECT_EQ(parse_report(json), r);
    EXPECT_EQ(json.back(), '\n');
}

TEST(Report, RoundTripAllFields) {
    Report r;
    r.scanned = {3, 5, 2};
    r.pairs = {sample(DetectionMethod::DataFlow, "a\"b\\c"), sample(DetectionMethod::ProximityHeuristic, "zzé"),
               sample(DetectionMethod::PatternMatch)};
    r.pairs[1].credential.username.reset();
    r.pairs[1].asset.port.reset();
    r.diagnostics.push_back({Severity::Warning, "io-error", "cannot read x", SourceLocation{std::nullopt, "x", 1, 2}});
    r.diagnostics.push_back({Severity::Info, "note", "plain", std::nullopt});
    const auto json = emit_report(r, ReportFormat::Json);
    const auto back = parse_report(json);
    EXPECT_EQ(back, r);
    EXPECT_EQ(emit_report(back, ReportFormat::Json), json);
}

TEST(Report, StableKeyOrder) {
    Report r;
    r.pairs = {sample(DetectionMethod::PatternMatch)};
    const auto json = emit_report(r, ReportFormat::Json);
    EXPECT_LT(json.find("\"schema_version\""), json.find("\"scanned\""));
    EXPECT_LT(json.find("\"scanned\""), json.find("\"pairs\""));
    EXPECT_LT(json.find("\"pairs\""), json.find("\"diagnostics\""));
    EXPECT_NE(json.find(std::string(kReportSchema)), std::string::npos);
}

TEST(Report, InvalidDocuments) {
    EXPECT_THROW(parse_report("not json"), FatalError);
    EXPECT_THROW(parse_report("{\"schema_version\": \"other/9\", \"pairs\": []}"), FatalError);
    EXPECT_THROW(parse_report("{\"schema_version\": \"harvest-report/1\", \"pairs\": [{}]}"), FatalError);
}

TEST(Report, TextGroupsByFileAndMasks) {
    Report r;
    r.pairs = {sample(DetectionMethod::PatternMatch, "hunter22")};
    const auto text = emit_report(r, ReportFormat::HumanText);
    EXPECT_NE(text.find("src/db.py"), std::string::npos);
    EXPECT_NE(text.find("DnsName"), std::string::npos);
    EXPECT_EQ(text.find("hunter22"), std::string::npos);
    EXPECT_EQ(mask_secret("hunter22"), "h******2");
}

TEST(Metrics, PublishedArithmetic) {
    EXPECT_NEAR(round2(precision(712, 13)), 0.98, 0.005);
    EXPECT_NEAR(round2(f1_score(1.00, 0.32)), 0.48, 0.005);
    EXPECT_DOUBLE_EQ(precision(712, 13), 712.0 / 725.0);
    EXPECT_DOUBLE_EQ(recall(1626, 165), 1626.0 / 1791.0);
    EXPECT_NEAR(f1_score(1.00, 0.32), 2 * 0.32 / 1.32, 1e-12);
}

TEST(Metrics, ZeroDenominators) {
    EXPECT_EQ(precision(0, 0), 0.0);
    EXPECT_EQ(recall(0, 0), 0.0);
    EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
}

TEST(Evaluate, CountsAndKinds) {
    auto a = sample(DetectionMethod::PatternMatch, "one");
    auto b = sample(DetectionMethod::PatternMatch, "two");
    b.kind = DatabaseKind::MySQL;
    auto c = sample(DetectionMethod::PatternMatch, "three");
    auto truth = truth_from_pairs({a, b});
    TruthPair missing{DatabaseKind::MongoDB, pair_identity(sample(DetectionMethod::PatternMatch, "four"))};
    truth.push_back(missing);
    const auto r = evaluate({a, b, c}, truth);
    EXPECT_EQ(r.overall.tp, 2u);
    EXPECT_EQ(r.overall.fp, 1u);
    EXPECT_EQ(r.overall.fn, 1u);
    EXPECT_EQ(r.overall.tp + r.overall.fn, truth.size());
    EXPECT_EQ(r.overall.tp + r.overall.fp, 3u);
    EXPECT_EQ(r.per_kind.at(DatabaseKind::MySQL).tp, 1u);
    EXPECT_EQ(r.per_kind.at(DatabaseKind::MongoDB).fn, 1u);
    EXPECT_EQ(r.per_kind.at(DatabaseKind::PostgreSQL).fp, 1u);
}

TEST(Truth, RoundTripAndSchemaErrors) {
    const auto truth = truth_from_pairs({sample(DetectionMethod::DataFlow)});
    EXPECT_EQ(parse_truth(emit_truth(truth)), truth);
    try {
        parse_truth("{\"schema_version\": \"harvest-truth/1\", \"pairs\": [{\"kind\": \"MySQL\", \"password\": \"x\", "
                    "\"host\": \"h\", \"file_path\": \"f\", \"line\": 1}, {\"kind\": \"MySQL\"}]}");
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.record(), 2u);
    }
    EXPECT_THROW(parse_truth("{\"pairs\": []}"), SchemaError);
    EXPECT_THROW(parse_truth("[]"), SchemaError);
}

TEST(EvalOutput, Formats) {
    const auto truth = truth_from_pairs({sample(DetectionMethod::DataFlow)});
    const auto r = evaluate({sample(DetectionMethod::DataFlow)}, truth);
    EXPECT_NE(emit_eval(r, ReportFormat::HumanText).find("1.00"), std::string::npos);
    EXPECT_NE(emit_eval(r, ReportFormat::Json).find("\"precision\""), std::string::npos);
}
