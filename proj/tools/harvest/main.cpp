// harvest: find database secret-asset pairs in a source tree or git history.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "harvest/evaluate.hpp"
#include "harvest/pipeline.hpp"

namespace {

constexpr int kExitClean = 0;
constexpr int kExitFindings = 1;
constexpr int kExitFatal = 2;

std::string catalog_choice(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("HARVEST_SINKS"); env && *env) return env;
    return "builtin";
}

void write_output(const std::optional<std::string>& path, const std::string& bytes) {
    if (!path) {
        std::cout << bytes << std::flush;
        return;
    }
    std::ofstream out(*path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << bytes)) throw harvest::FatalError("output", fmt::format("{}: cannot write", *path));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Find database credentials together with the hosts they protect."};
    app.require_subcommand(1);

    harvest::ScanConfig cfg;
    std::string target;
    bool history = false;
    std::string sinks;
    std::string secrets_in;
    std::string format = "json";
    std::string out_path;

    auto* scan = app.add_subcommand("scan", "Scan a directory, or a git repository's history with --history");
    scan->add_option("path", target, "Directory or repository to scan")->required();
    scan->add_flag("--history", history, "Scan every blob reachable from any ref");
    scan->add_flag("--flow-history", cfg.flow_history, "Also run data flow on every historical snapshot");
    scan->add_option("--sinks", sinks, "Sink catalog file, or builtin / asyncpg-legacy (default: $HARVEST_SINKS, builtin)");
    scan->add_option("--secrets-in", secrets_in, "Secrets report from external detectors");
    scan->add_option("--window", cfg.window, "Proximity window in lines")->check(CLI::NonNegativeNumber);
    scan->add_option("--threshold", cfg.threshold, "Minimum Jaro-Winkler similarity")->check(CLI::Range(0.0, 1.0));
    scan->add_option("--max-blob-bytes", cfg.max_blob_bytes, "Skip files larger than this")->check(CLI::PositiveNumber);
    scan->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}));
    scan->add_option("--out", out_path, "Write the report here instead of stdout");
    scan->add_option("--jobs", cfg.threads, "Worker threads (0: hardware concurrency)");

    std::string report_path;
    std::string truth_path;
    std::string eval_format = "text";
    auto* eval = app.add_subcommand("eval", "Score a report against labeled pairs");
    eval->add_option("--report", report_path, "Report produced by scan --format json")->required();
    eval->add_option("--truth", truth_path, "Ground truth (harvest-truth/1)")->required();
    eval->add_option("--format", eval_format, "Output format")->check(CLI::IsMember({"json", "text"}));

    std::string explain_sinks;
    auto* explain = app.add_subcommand("explain-rules", "Print grammars, sink catalog and heuristic parameters");
    explain->add_option("--sinks", explain_sinks, "Sink catalog file, or builtin / asyncpg-legacy");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitClean : kExitFatal;
    }

    try {
        if (*scan) {
            cfg.target = target;
            cfg.mode = history ? harvest::ScanMode::History : harvest::ScanMode::Worktree;
            cfg.sink_catalog = catalog_choice(sinks);
            if (!secrets_in.empty()) cfg.secrets_report = secrets_in;
            cfg.format = format == "text" ? harvest::ReportFormat::HumanText : harvest::ReportFormat::Json;
            if (!out_path.empty()) cfg.output = out_path;
            const auto report = harvest::run_scan(cfg);
            write_output(cfg.output ? std::optional<std::string>(cfg.output->string()) : std::nullopt,
                         harvest::emit_report(report, cfg.format));
            return report.pairs.empty() ? kExitClean : kExitFindings;
        }
        if (*eval) {
            const auto report = harvest::read_report_file(report_path);
            const auto truth = harvest::read_truth_file(truth_path);
            const auto result = harvest::evaluate(report, truth);
            std::cout << harvest::emit_eval(result, eval_format == "json" ? harvest::ReportFormat::Json
                                                                          : harvest::ReportFormat::HumanText);
            return kExitClean;
        }
        if (*explain) {
            const auto catalog = harvest::pyflow::load_catalog_file(catalog_choice(explain_sinks));
            std::cout << harvest::explain_rules(catalog);
            return kExitClean;
        }
    } catch (const harvest::FatalError& e) {
        std::cerr << fmt::format("harvest: {}: {}\n", e.code(), e.what());
        return kExitFatal;
    } catch (const harvest::SchemaError& e) {
        std::cerr << fmt::format("harvest: schema error: {}\n", e.what());
        return kExitFatal;
    } catch (const std::exception& e) {
        std::cerr << fmt::format("harvest: internal error: {}\n", e.what());
        return kExitFatal;
    }
    return kExitFatal;
}
