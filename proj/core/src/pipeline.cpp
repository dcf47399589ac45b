#include "harvest/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "harvest/connstr.hpp"
#include "harvest/pyflow/analysis.hpp"
#include "harvest/text.hpp"

namespace harvest {

namespace {

unsigned effective_threads(unsigned requested) {
    if (requested > 0) return requested;
    return std::clamp(std::thread::hardware_concurrency(), 1u, 8u);
}

// Runs fn(i, diags_i) for i in [0, n) on up to `threads` workers and returns
// the per-item results and diagnostics in index order.
template <typename Fn>
auto fan_out(std::size_t n, unsigned threads, Diagnostics& diags, Fn fn) {
    using Result = decltype(fn(std::size_t{0}, diags));
    std::vector<Result> results(n);
    std::vector<Diagnostics> local(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                results[i] = fn(i, local[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1)));
    if (count <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < count; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    for (auto& d : local) diags.append(d);
    return results;
}

SourceLocation context_of(const repo::FileVersion& f) {
    SourceLocation ctx;
    ctx.commit_id = f.commit_id;
    ctx.file_path = f.path;
    return ctx;
}

std::vector<SecretAssetPair> keep_valid(std::vector<SecretAssetPair> pairs, Diagnostics& diags) {
    std::vector<SecretAssetPair> out;
    for (auto& p : pairs) {
        if (auto reason = validate_pair(p)) {
            diags.warn("invalid-pair", fmt::format("dropped pair: {}", *reason), p.secret_location);
            continue;
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::string snapshot_signature(const std::vector<repo::FileVersion>& files) {
    std::string sig;
    for (const auto& f : files) {
        sig += f.path;
        sig.push_back('\0');
        sig += f.content_digest;
        sig.push_back('\n');
    }
    return sig;
}

}  // namespace

void validate_config(const ScanConfig& cfg) {
    if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0)) {
        throw FatalError("invalid-config", fmt::format("threshold {} is outside [0, 1]", cfg.threshold));
    }
    if (cfg.max_blob_bytes == 0) throw FatalError("invalid-config", "max blob size must be positive");
    std::error_code ec;
    if (!std::filesystem::exists(cfg.target, ec)) {
        throw FatalError("invalid-target", fmt::format("{}: no such file or directory", cfg.target.string()));
    }
    if (!std::filesystem::is_directory(cfg.target, ec)) {
        throw FatalError("invalid-target", fmt::format("{}: not a directory", cfg.target.string()));
    }
    if (cfg.mode == ScanMode::History && !repo::is_git_repository(cfg.target)) {
        throw FatalError("not-a-repository", fmt::format("{}: not a git repository", cfg.target.string()));
    }
    if (cfg.flow_history && cfg.mode != ScanMode::History) {
        throw FatalError("invalid-config", "--flow-history requires --history");
    }
}

std::vector<SecretAssetPair> pattern_stage(const std::vector<repo::FileVersion>& files, Diagnostics& diags,
                                           unsigned threads) {
    auto per_file = fan_out(files.size(), threads, diags, [&](std::size_t i, Diagnostics& d) {
        return connstr::scan_text(files[i].content, context_of(files[i]), d);
    });
    std::vector<SecretAssetPair> out;
    for (auto& v : per_file) std::move(v.begin(), v.end(), std::back_inserter(out));
    return keep_valid(std::move(out), diags);
}

std::vector<SecretAssetPair> flow_stage(const std::vector<repo::FileVersion>& snapshot,
                                        const std::vector<pyflow::SinkSpec>& catalog, Diagnostics& diags,
                                        unsigned threads) {
    std::vector<pyflow::SourceFile> sources;
    std::unordered_map<std::string, const repo::FileVersion*> by_path;
    std::optional<std::string> commit_id;
    for (const auto& f : snapshot) {
        by_path.emplace(f.path, &f);
        if (text::ends_with(f.path, ".py")) sources.push_back(pyflow::SourceFile{f.path, f.content});
        if (f.commit_id) commit_id = f.commit_id;
    }
    if (sources.empty()) return {};
    pyflow::FileReader reader = [&by_path](const std::string& path) -> std::optional<std::string> {
        auto it = by_path.find(path);
        if (it == by_path.end()) return std::nullopt;
        return it->second->content;
    };
    return keep_valid(pyflow::analyze_project(sources, catalog, reader, diags, commit_id, threads), diags);
}

std::vector<SecretAssetPair> proximity_stage(const std::vector<repo::FileVersion>& files,
                                             const std::vector<repo::FileVersion>& latest,
                                             const std::vector<SecretAssetPair>& covered,
                                             const std::optional<std::vector<proximity::SecretFinding>>& external,
                                             const proximity::ProximityOptions& options, Diagnostics& diags,
                                             unsigned threads) {
    std::set<std::string> paired_values;
    for (const auto& p : covered) paired_values.insert(p.credential.password);

    struct Job {
        const repo::FileVersion* file;
        std::vector<proximity::SecretFinding> findings;
    };
    std::vector<Job> jobs;
    if (external) {
        std::unordered_map<std::string, const repo::FileVersion*> by_path;
        for (const auto& f : files) by_path[f.path] = &f;
        for (const auto& f : latest) by_path[f.path] = &f;
        std::map<const repo::FileVersion*, std::size_t> job_of;
        for (const auto& finding : *external) {
            if (paired_values.count(finding.value)) continue;
            auto it = by_path.find(finding.location.file_path);
            if (it == by_path.end()) {
                diags.warn("secret-file-missing",
                           fmt::format("secrets report names '{}', which was not scanned", finding.location.file_path),
                           finding.location);
                continue;
            }
            auto [slot, fresh] = job_of.emplace(it->second, jobs.size());
            if (fresh) jobs.push_back(Job{it->second, {}});
            auto located = finding;
            located.location.commit_id = it->second->commit_id;
            jobs[slot->second].findings.push_back(std::move(located));
        }
    } else {
        for (const auto& f : files) jobs.push_back(Job{&f, {}});
    }

    auto per_job = fan_out(jobs.size(), threads, diags, [&](std::size_t i, Diagnostics& d) {
        const Job& job = jobs[i];
        auto findings = external ? job.findings : proximity::builtin_detect_secrets(job.file->content, context_of(*job.file));
        std::vector<SecretAssetPair> out;
        if (findings.empty()) return out;
        const auto lines = text::split_lines(job.file->content);
        for (const auto& finding : findings) {
            if (paired_values.count(finding.value)) continue;
            if (finding.location.line > lines.size()) {
                d.warn("secret-line-out-of-range",
                       fmt::format("line {} is past the end of the file ({} lines)", finding.location.line, lines.size()),
                       finding.location);
                continue;
            }
            if (auto pair = proximity::pair_by_proximity(finding, lines, options)) out.push_back(std::move(*pair));
        }
        return out;
    });
    std::vector<SecretAssetPair> out;
    for (auto& v : per_job) std::move(v.begin(), v.end(), std::back_inserter(out));
    return keep_valid(std::move(out), diags);
}

Report run_scan(const ScanConfig& cfg) {
    validate_config(cfg);
    const auto& catalog = pyflow::load_catalog_file(cfg.sink_catalog);
    std::optional<std::vector<proximity::SecretFinding>> external;
    if (cfg.secrets_report) {
        try {
            external = proximity::ingest_secrets_file(cfg.secrets_report->string());
        } catch (const SchemaError& e) {
            throw FatalError("invalid-secrets-report", fmt::format("{}: {}", cfg.secrets_report->string(), e.what()));
        }
    }
    const unsigned threads = effective_threads(cfg.threads);
    const repo::WalkOptions walk{cfg.max_blob_bytes};

    Report report;
    Diagnostics diags;
    repo::WalkStats stats;
    std::vector<repo::FileVersion> files;
    std::vector<repo::FileVersion> latest;
    if (cfg.mode == ScanMode::History) {
        files = repo::enumerate_history(cfg.target, walk, diags, &stats);
        latest = repo::head_snapshot(cfg.target, walk, diags);
    } else {
        files = repo::enumerate_worktree(cfg.target, walk, diags, &stats);
        stats.blobs = stats.files;
    }
    report.scanned = ScanCounts{stats.files, stats.blobs, stats.commits};

    auto pairs = pattern_stage(files, diags, threads);

    const auto& flow_snapshot = cfg.mode == ScanMode::History ? latest : files;
    auto flow_pairs = flow_stage(flow_snapshot, catalog, diags, threads);
    if (cfg.flow_history) {
        std::set<std::string> seen{snapshot_signature(latest)};
        for (const auto& commit : repo::ordered_commits(cfg.target)) {
            auto snapshot = repo::snapshot_at(cfg.target, commit, walk, diags);
            if (!seen.insert(snapshot_signature(snapshot)).second) continue;
            Diagnostics snapshot_diags;
            auto more = flow_stage(snapshot, catalog, snapshot_diags, threads);
            for (auto& d : snapshot_diags.take()) {
                if (d.severity != Severity::Info) diags.add(d.severity, d.code, d.message, d.location);
            }
            std::move(more.begin(), more.end(), std::back_inserter(flow_pairs));
        }
    }
    std::move(flow_pairs.begin(), flow_pairs.end(), std::back_inserter(pairs));

    const proximity::ProximityOptions options{cfg.window, cfg.threshold};
    auto heuristic = proximity_stage(files, latest, pairs, external, options, diags, threads);
    std::move(heuristic.begin(), heuristic.end(), std::back_inserter(pairs));

    report.pairs = merge_pairs(std::move(pairs));
    report.diagnostics = diags.take();
    normalize(report.diagnostics);
    return report;
}

std::string explain_rules(const std::vector<pyflow::SinkSpec>& catalog, const proximity::ProximityOptions& options) {
    std::string out = "Connection-string grammar groups\n";
    const auto& rules = connstr::compile_rules();
    std::vector<connstr::RuleGroup> groups;
    for (const auto& r : rules) {
        if (std::find(groups.begin(), groups.end(), r.group) == groups.end()) groups.push_back(r.group);
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        out += fmt::format("  {}. {}\n", g + 1, connstr::to_string(groups[g]));
        for (const auto& r : rules) {
            if (r.group != groups[g]) continue;
            std::string kinds;
            for (auto k : r.kinds) kinds += (kinds.empty() ? "" : ", ") + std::string(to_string(k));
            out += fmt::format("     {:<14} {}\n", r.name, r.grammar);
            if (!kinds.empty()) out += fmt::format("     {:<14} kinds: {}\n", "", kinds);
        }
    }

    const auto drivers = pyflow::catalog_drivers(catalog);
    out += fmt::format("\nSink catalog: {} drivers, {} sinks\n", drivers.size(), catalog.size());
    for (const auto& driver : drivers) {
        out += fmt::format("  {}\n", driver);
        for (const auto& spec : catalog) {
            if (spec.driver != driver) continue;
            std::vector<std::string> roles;
            for (const auto& [pos, role] : spec.positional_roles) roles.push_back(fmt::format("#{}={}", pos, pyflow::to_string(role)));
            for (const auto& [kw, role] : spec.keyword_roles) roles.push_back(fmt::format("{}={}", kw, pyflow::to_string(role)));
            for (const auto& seq : spec.sequence_roles) {
                std::string names;
                for (auto role : seq.roles) names += (names.empty() ? "" : ",") + std::string(pyflow::to_string(role));
                std::string where = seq.slot.keyword ? *seq.slot.keyword : fmt::format("#{}", seq.slot.position.value_or(0));
                roles.push_back(fmt::format("{}=[{}]", where, names));
            }
            out += fmt::format("     {:<40} {:<11} {}\n", spec.callee_path, to_string(spec.kind), fmt::join(roles, " "));
        }
    }

    out += "\nProximity heuristic\n";
    out += fmt::format("  window            +/-{} lines\n", options.window);
    out += fmt::format("  threshold         Jaro-Winkler >= {}\n", options.threshold);
    out += fmt::format("  winkler           prefix scale 0.1, prefix cap 4\n");
    out += fmt::format("  ip candidates     {}\n", proximity::kIpPattern);
    out += fmt::format("  dns candidates    {}\n", proximity::kDnsPattern);
    return out;
}

}  // namespace harvest
