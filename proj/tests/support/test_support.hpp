#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace harvest::testing {

inline std::filesystem::path fixture(const std::string& rel) {
    return std::filesystem::path(HARVEST_FIXTURE_DIR) / rel;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        const auto base = std::filesystem::temp_directory_path();
        for (int attempt = 0; attempt < 100; ++attempt) {
            path_ = base / ("harvest-test-" + std::to_string(rd()));
            if (std::filesystem::create_directory(path_)) return;
        }
        throw std::runtime_error("cannot create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out.push_back(c);
    }
    return out + "'";
}

/// Scripted repository with fixed identities and strictly increasing commit dates.
class GitRepo {
public:
    explicit GitRepo(std::filesystem::path root) : root_(std::move(root)) {
        std::filesystem::create_directories(root_);
        git("init -q -b main");
    }

    void write(const std::string& rel, const std::string& content) { write_file(root_ / rel, content); }
    void remove(const std::string& rel) { std::filesystem::remove(root_ / rel); }

    void commit(const std::string& message) {
        ++clock_;
        const std::string date = std::to_string(1700000000 + clock_ * 60) + " +0000";
        git("add -A");
        git("-c user.name=Fixture -c user.email=fixture@example.com commit -q --allow-empty -m " + shell_quote(message),
            "GIT_AUTHOR_DATE=" + shell_quote(date) + " GIT_COMMITTER_DATE=" + shell_quote(date) + " ");
    }

    std::string head() const {
        const auto out = root_ / ".git" / "harvest-head";
        git("rev-parse HEAD > " + shell_quote(out.string()));
        std::string id = read_file(out);
        std::filesystem::remove(out);
        while (!id.empty() && (id.back() == '\n' || id.back() == '\r')) id.pop_back();
        return id;
    }

    const std::filesystem::path& path() const { return root_; }

private:
    void git(const std::string& args, const std::string& env = "") const {
        const std::string cmd = env + "git -C " + shell_quote(root_.string()) + " " + args;
        if (std::system(cmd.c_str()) != 0) throw std::runtime_error("command failed: " + cmd);
    }

    std::filesystem::path root_;
    int clock_ = 0;
};

}  // namespace harvest::testing
