#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "harvest/config_tree.hpp"
#include "harvest/diagnostics.hpp"
#include "harvest/model.hpp"
#include "harvest/pyflow/sinks.hpp"
#include "harvest/pyflow/syntax.hpp"
#include "harvest/pyflow/value.hpp"

namespace harvest::pyflow {

struct SourceFile {
    /// Repository-relative, `/`-separated.
    std::string path;
    std::string content;
};

struct FlowFact {
    /// `module.name`, or `module.function.name` for function locals.
    std::string symbol;
    Value value;
    SourceLocation def_location;
};

struct CallArg {
    std::optional<std::string> keyword;
    bool star = false;
    bool double_star = false;
    Value value;
    SourceLocation location;
};

struct CallSite {
    std::string module;
    std::string file_path;
    /// Resolved dotted callee, e.g. `pymysql.connect` for `pm.connect` after `import pymysql as pm`.
    std::string callee;
    SourceLocation location;
    std::vector<CallArg> args;
};

struct SinkMatch {
    CallSite call;
    SinkSpec spec;
};

struct ModuleAnalysis {
    std::vector<FlowFact> facts;
    std::vector<CallSite> calls;
};

struct ProjectIndex {
    std::optional<std::string> commit_id;
    /// Module name to syntax tree.
    std::map<std::string, Module> modules;
    /// Module name to its module-level bindings after import resolution.
    std::map<std::string, std::map<std::string, Value>> exports;
    std::map<std::string, ModuleAnalysis> analysis;
};

/// Parses every `.py` file (in parallel when `threads` > 1). When two files map
/// to one module name the lexicographically first path wins and the other is
/// reported.
ProjectIndex build_index(const std::vector<SourceFile>& files, Diagnostics& diags,
                         const std::optional<std::string>& commit_id = std::nullopt, unsigned threads = 1);

/// Evaluates modules in import-dependency order; mutually importing modules
/// are evaluated twice so constants crossing the cycle settle.
void resolve_imports(ProjectIndex& index, Diagnostics& diags);

std::vector<FlowFact> propagate_constants(const ProjectIndex& index, const std::string& module);

/// Call sites of `module` whose resolved callee matches a catalog entry, in source order.
std::vector<SinkMatch> find_sink_calls(const ProjectIndex& index, const std::string& module,
                                       const std::vector<SinkSpec>& catalog);

/// Reads a repository-relative file; nothing when absent.
using FileReader = std::function<std::optional<std::string>(const std::string& path)>;

/// Loads and caches configuration files for key-path lookups. Thread-safe.
class ConfigResolver {
public:
    explicit ConfigResolver(FileReader reader, std::optional<std::string> commit_id = std::nullopt);

    struct Scalar {
        std::string text;
        SourceLocation location;
    };

    /// Finds `ref.text` relative to the directory of `module_path`, then the
    /// repository root, and loads it. Problems go to `diags`.
    const config::Node* root(const Value& ref, const std::string& module_path, Diagnostics& diags,
                             std::string* resolved_path = nullptr);
    const config::Node* node(const Value& ref, const std::string& module_path, Diagnostics& diags,
                             std::string* resolved_path = nullptr);
    std::optional<Scalar> scalar(const Value& ref, const std::string& module_path, Diagnostics& diags);

private:
    struct Entry {
        std::optional<config::Node> tree;
        std::string error;
    };
    const Entry* load(const std::string& path, config::ConfigFormat format, Diagnostics& diags);

    FileReader reader_;
    std::optional<std::string> commit_id_;
    std::mutex mu_;
    std::map<std::string, std::unique_ptr<Entry>> cache_;
};

/// Binds arguments to roles and emits a DataFlow pair when Password and Host
/// resolve. ConfigRef arguments are looked up through `configs`.
std::optional<SecretAssetPair> extract_pair_at_sink(const SinkMatch& match, ConfigResolver& configs,
                                                    Diagnostics& diags);

/// As extract_pair_at_sink, restricted to calls where a role argument refers
/// into a configuration file; nothing otherwise.
std::optional<SecretAssetPair> bridge_config(const SinkMatch& match, ConfigResolver& configs, Diagnostics& diags);

/// build_index + resolve_imports + sink extraction over every module.
std::vector<SecretAssetPair> analyze_project(const std::vector<SourceFile>& files, const std::vector<SinkSpec>& catalog,
                                             const FileReader& reader, Diagnostics& diags,
                                             const std::optional<std::string>& commit_id = std::nullopt,
                                             unsigned threads = 1);

/// Parses a libpq `key=value` connection string (`host=h user=u password=p`).
std::optional<std::map<std::string, std::string>> parse_libpq_dsn(std::string_view dsn);

}  // namespace harvest::pyflow
