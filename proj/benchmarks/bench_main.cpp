#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "connstr_gen.hpp"
#include "harvest/connstr.hpp"
#include "harvest/proximity.hpp"
#include "harvest/pyflow/analysis.hpp"
#include "harvest/similarity.hpp"
#include "harvest/text.hpp"

using namespace harvest;

namespace {

std::string random_line(std::mt19937& rng, std::size_t len) {
    static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789-_:=. \"";
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
    return s;
}

void BM_JaroWinkler(benchmark::State& state) {
    std::mt19937 rng(1);
    const auto a = random_line(rng, static_cast<std::size_t>(state.range(0)));
    const auto b = random_line(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(similarity::jaro_winkler(a, b));
}
BENCHMARK(BM_JaroWinkler)->Arg(16)->Arg(64)->Arg(256);

void BM_ScanText(benchmark::State& state) {
    harvest::testing::ConnStringGenerator gen(2);
    std::mt19937 rng(2);
    std::string content;
    for (int i = 0; i < state.range(0); ++i) {
        content += i % 10 == 0 ? "url = \"" + gen.next().text + "\"\n" : random_line(rng, 60) + "\n";
    }
    Diagnostics diags;
    for (auto _ : state) {
        benchmark::DoNotOptimize(connstr::scan_text(content, {std::nullopt, "b.txt", 1, std::nullopt}, diags));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * content.size()));
}
BENCHMARK(BM_ScanText)->Arg(100)->Arg(1000);

void BM_Proximity(benchmark::State& state) {
    std::mt19937 rng(3);
    std::vector<std::string> store;
    for (int i = 0; i < 200; ++i)
        store.push_back(i % 7 == 0 ? "db_host: 10.0." + std::to_string(i) + ".1" : random_line(rng, 40));
    store[100] = "db_password: \"bench-secret\"";
    std::vector<std::string_view> lines(store.begin(), store.end());
    const proximity::SecretFinding f{"bench-secret", {std::nullopt, "f", 101, std::nullopt}, "r", "t"};
    for (auto _ : state) benchmark::DoNotOptimize(proximity::pair_by_proximity(f, lines));
}
BENCHMARK(BM_Proximity);

void BM_AnalyzeProject(benchmark::State& state) {
    std::vector<pyflow::SourceFile> files;
    files.push_back({"settings.py", "HOST = '10.1.1.1'\nUSER = 'svc'\nPASSWORD = 'bench-pw'\n"});
    for (int i = 0; i < state.range(0); ++i) {
        files.push_back({"mod" + std::to_string(i) + ".py",
                         "import pymysql\nfrom settings import *\nDB = 'app" + std::to_string(i) +
                             "'\n\ndef connect():\n    return pymysql.connect(host=HOST, user=USER, password=PASSWORD, "
                             "db=DB)\n"});
    }
    const pyflow::FileReader reader = [](const std::string&) { return std::optional<std::string>(); };
    for (auto _ : state) {
        Diagnostics diags;
        benchmark::DoNotOptimize(pyflow::analyze_project(files, pyflow::builtin_catalog(), reader, diags));
    }
}
BENCHMARK(BM_AnalyzeProject)->Arg(10)->Arg(100);

}  // namespace
BENCHMARK_MAIN();
