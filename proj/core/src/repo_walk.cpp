#include "harvest/repo_walk.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "harvest/text.hpp"
#include "process.hpp"

namespace fs = std::filesystem;

namespace harvest::repo {

namespace {

constexpr std::size_t kBinaryProbe = 8 * 1024;

struct TreeEntry {
    std::string mode;
    std::string type;
    std::string oid;
    std::uint64_t size = 0;
    std::string path;
};

detail::ProcessResult git(const fs::path& repo, std::vector<std::string> args, std::string_view input = {}) {
    std::vector<std::string> argv{"git", "-c", "safe.directory=*", "-C", repo.string()};
    argv.insert(argv.end(), std::make_move_iterator(args.begin()), std::make_move_iterator(args.end()));
    return detail::run_process(argv, {}, input);
}

std::string git_checked(const fs::path& repo, std::vector<std::string> args, std::string_view input = {}) {
    const std::string what = args.empty() ? std::string{} : args.front();
    auto r = git(repo, std::move(args), input);
    if (r.exit_code != 0) {
        throw FatalError("corrupt-object", fmt::format("git {} failed in {}: {}", what, repo.string(),
                                                       text::trim(r.err)));
    }
    return std::move(r.out);
}

void require_repository(const fs::path& repo) {
    if (!is_git_repository(repo)) {
        throw FatalError("not-a-repository", fmt::format("{} is not a git repository", repo.string()));
    }
}

std::vector<TreeEntry> ls_tree(const fs::path& repo, const std::string& commit) {
    const std::string out = git_checked(repo, {"ls-tree", "-r", "-l", "-z", "--full-tree", commit});
    std::vector<TreeEntry> entries;
    std::size_t pos = 0;
    while (pos < out.size()) {
        const auto end = out.find('\0', pos);
        const std::string_view record = std::string_view(out).substr(pos, end - pos);
        pos = end == std::string::npos ? out.size() : end + 1;
        const auto tab = record.find('\t');
        if (tab == std::string_view::npos) continue;
        std::istringstream meta{std::string(record.substr(0, tab))};
        TreeEntry e;
        std::string size;
        meta >> e.mode >> e.type >> e.oid >> size;
        e.path = std::string(record.substr(tab + 1));
        if (e.type != "blob" || e.mode == "120000") continue;
        e.size = size == "-" ? 0 : std::stoull(size);
        entries.push_back(std::move(e));
    }
    return entries;
}

std::unordered_map<std::string, std::string> cat_blobs(const fs::path& repo, const std::vector<std::string>& oids) {
    std::unordered_map<std::string, std::string> blobs;
    if (oids.empty()) return blobs;
    std::string request;
    for (const auto& oid : oids) request += oid + "\n";
    const std::string out = git_checked(repo, {"cat-file", "--batch"}, request);
    std::size_t pos = 0;
    while (pos < out.size()) {
        const auto nl = out.find('\n', pos);
        if (nl == std::string::npos) break;
        const std::string header = out.substr(pos, nl - pos);
        pos = nl + 1;
        std::istringstream h(header);
        std::string oid, type, size;
        h >> oid >> type >> size;
        if (type == "missing" || size.empty()) {
            throw FatalError("corrupt-object", fmt::format("object {} is missing from {}", oid, repo.string()));
        }
        const std::size_t n = std::stoull(size);
        if (pos + n > out.size()) throw FatalError("corrupt-object", fmt::format("truncated object {}", oid));
        blobs.emplace(oid, out.substr(pos, n));
        pos += n + 1;
    }
    for (const auto& oid : oids) {
        if (!blobs.count(oid)) throw FatalError("corrupt-object", fmt::format("object {} could not be read", oid));
    }
    return blobs;
}

// Reads the selected entries of one commit and hands text files to `sink`.
void emit_entries(const fs::path& repo, const std::string& commit, const std::vector<TreeEntry>& entries,
                  const WalkOptions& options, Diagnostics& diags, const FileSink& sink, std::size_t* emitted) {
    std::vector<const TreeEntry*> wanted;
    for (const auto& e : entries) {
        if (e.size > options.max_blob_bytes) {
            diags.info("oversized-file",
                       fmt::format("skipped {} ({} bytes > {} byte cap)", e.path, e.size, options.max_blob_bytes),
                       SourceLocation{commit, e.path, 1, std::nullopt});
            continue;
        }
        wanted.push_back(&e);
    }
    std::vector<std::string> oids;
    for (const auto* e : wanted) oids.push_back(e->oid);
    std::sort(oids.begin(), oids.end());
    oids.erase(std::unique(oids.begin(), oids.end()), oids.end());
    const auto blobs = cat_blobs(repo, oids);
    for (const auto* e : wanted) {
        const std::string& bytes = blobs.at(e->oid);
        if (looks_binary(bytes)) continue;
        sink(FileVersion{e->path, commit, e->oid, text::decode_utf8_lossy(bytes)});
        if (emitted) ++*emitted;
    }
}

}  // namespace

std::string blob_digest(std::string_view bytes) {
    const std::string header = fmt::format("blob {}", bytes.size());
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
    EVP_DigestUpdate(ctx, header.data(), header.size() + 1);  // includes the NUL terminator
    EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

bool looks_binary(std::string_view bytes) {
    return bytes.substr(0, kBinaryProbe).find('\0') != std::string_view::npos;
}

void enumerate_worktree(const fs::path& root, const WalkOptions& options, Diagnostics& diags, const FileSink& sink,
                        WalkStats* stats) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw FatalError("invalid-target", fmt::format("{} is not a readable directory", root.string()));
    }
    std::vector<std::string> paths;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec), end;
    for (; !ec && it != end; it.increment(ec)) {
        const auto status = it->symlink_status(ec);
        if (ec) break;
        if (fs::is_directory(status)) {
            if (it->path().filename() == ".git") it.disable_recursion_pending();
            continue;
        }
        if (!fs::is_regular_file(status)) continue;
        paths.push_back(fs::relative(it->path(), root).generic_string());
    }
    if (ec) diags.warn("io-error", fmt::format("directory walk stopped early: {}", ec.message()));
    std::sort(paths.begin(), paths.end());

    for (const auto& rel : paths) {
        const fs::path full = root / rel;
        const SourceLocation loc{std::nullopt, rel, 1, std::nullopt};
        std::error_code size_ec;
        const auto size = fs::file_size(full, size_ec);
        if (size_ec) {
            diags.warn("io-error", fmt::format("cannot stat {}: {}", rel, size_ec.message()), loc);
            continue;
        }
        if (size > options.max_blob_bytes) {
            diags.info("oversized-file",
                       fmt::format("skipped {} ({} bytes > {} byte cap)", rel, size, options.max_blob_bytes), loc);
            continue;
        }
        std::ifstream in(full, std::ios::binary);
        std::ostringstream buf;
        if (!in || (!(buf << in.rdbuf()) && size > 0)) {
            diags.warn("io-error", fmt::format("cannot read {}", rel), loc);
            continue;
        }
        const std::string bytes = std::move(buf).str();
        if (looks_binary(bytes)) continue;
        if (stats) ++stats->files;
        sink(FileVersion{rel, std::nullopt, blob_digest(bytes), text::decode_utf8_lossy(bytes)});
    }
}

std::vector<FileVersion> enumerate_worktree(const fs::path& root, const WalkOptions& options, Diagnostics& diags,
                                            WalkStats* stats) {
    std::vector<FileVersion> out;
    enumerate_worktree(root, options, diags, [&](FileVersion&& f) { out.push_back(std::move(f)); }, stats);
    return out;
}

bool is_git_repository(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_directory(path, ec)) return false;
    try {
        const auto r = git(path, {"rev-parse", "--git-dir"});
        return r.exit_code == 0;
    } catch (const std::system_error&) {
        return false;
    }
}

std::vector<std::string> ordered_commits(const fs::path& repo) {
    require_repository(repo);
    const auto r = git(repo, {"log", "--all", "--format=%H %ct %P"});
    if (r.exit_code != 0) {
        // A repository without any commit has nothing to walk.
        if (git(repo, {"rev-parse", "--verify", "-q", "HEAD"}).exit_code != 0 &&
            text::trim(git_checked(repo, {"for-each-ref"})).empty())
            return {};
        throw FatalError("corrupt-object", fmt::format("git log failed: {}", text::trim(r.err)));
    }

    struct Node {
        long long time = 0;
        std::vector<std::string> parents;
        std::vector<std::string> children;
        std::size_t pending = 0;
    };
    std::map<std::string, Node> nodes;
    std::istringstream lines(r.out);
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string id;
        long long time = 0;
        fields >> id >> time;
        if (id.empty()) continue;
        Node& n = nodes[id];
        n.time = time;
        std::string parent;
        while (fields >> parent) n.parents.push_back(parent);
    }
    for (auto& [id, n] : nodes) {
        for (const auto& p : n.parents) {
            auto it = nodes.find(p);
            if (it == nodes.end()) continue;
            it->second.children.push_back(id);
            ++n.pending;
        }
    }
    using Key = std::pair<long long, std::string>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
    for (const auto& [id, n] : nodes) {
        if (n.pending == 0) ready.emplace(n.time, id);
    }
    std::vector<std::string> order;
    while (!ready.empty()) {
        const auto [time, id] = ready.top();
        ready.pop();
        order.push_back(id);
        for (const auto& child : nodes[id].children) {
            Node& c = nodes[child];
            if (--c.pending == 0) ready.emplace(c.time, child);
        }
    }
    return order;
}

void enumerate_history(const fs::path& repo, const WalkOptions& options, Diagnostics& diags, const FileSink& sink,
                       WalkStats* stats) {
    const auto commits = ordered_commits(repo);
    std::set<std::pair<std::string, std::string>> seen;
    std::set<std::string> paths;
    std::size_t emitted = 0;
    for (const auto& commit : commits) {
        std::vector<TreeEntry> fresh;
        for (auto& e : ls_tree(repo, commit)) {
            if (seen.emplace(e.path, e.oid).second) fresh.push_back(std::move(e));
        }
        emit_entries(repo, commit, fresh, options, diags,
                     [&](FileVersion&& f) {
                         paths.insert(f.path);
                         sink(std::move(f));
                     },
                     &emitted);
    }
    if (stats) {
        stats->commits += commits.size();
        stats->blobs += emitted;
        stats->files += paths.size();
    }
}

std::vector<FileVersion> enumerate_history(const fs::path& repo, const WalkOptions& options, Diagnostics& diags,
                                           WalkStats* stats) {
    std::vector<FileVersion> out;
    enumerate_history(repo, options, diags, [&](FileVersion&& f) { out.push_back(std::move(f)); }, stats);
    return out;
}

std::vector<FileVersion> snapshot_at(const fs::path& repo, const std::string& commit, const WalkOptions& options,
                                     Diagnostics& diags) {
    require_repository(repo);
    std::vector<FileVersion> out;
    emit_entries(repo, commit, ls_tree(repo, commit), options, diags,
                 [&](FileVersion&& f) { out.push_back(std::move(f)); }, nullptr);
    return out;
}

std::vector<FileVersion> enumerate_history_raw(const fs::path& repo, const WalkOptions& options,
                                               Diagnostics& diags) {
    std::vector<FileVersion> out;
    for (const auto& commit : ordered_commits(repo)) {
        auto files = snapshot_at(repo, commit, options, diags);
        std::move(files.begin(), files.end(), std::back_inserter(out));
    }
    return out;
}

std::vector<FileVersion> head_snapshot(const fs::path& repo, const WalkOptions& options, Diagnostics& diags) {
    require_repository(repo);
    const auto r = git(repo, {"rev-parse", "--verify", "-q", "HEAD^{commit}"});
    if (r.exit_code != 0) return {};
    return snapshot_at(repo, std::string(text::trim(r.out)), options, diags);
}

}  // namespace harvest::repo
