#include <filesystem>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "harvest/config_tree.hpp"
#include "test_support.hpp"

using namespace harvest;
using namespace harvest::config;

namespace {

nlohmann::ordered_json to_json(const Node& n) {
    if (n.is_null) return nullptr;
    switch (n.kind) {
        case Node::Kind::Scalar:
            return n.scalar;
        case Node::Kind::Seq: {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& item : n.seq) arr.push_back(to_json(item));
            return arr;
        }
        default: {
            auto obj = nlohmann::ordered_json::object();
            for (const auto& [k, v] : n.map) obj[k] = to_json(v);
            return obj;
        }
    }
}

// Random tree restricted to what every format represents: non-empty string
// scalars, maps with identifier keys, and sequences of at least two items.
Node random_tree(std::mt19937& rng, int depth, bool xml) {
    auto word = [&](std::size_t min) {
        static const std::string a = "abcdefghijklmnopqrstuvwxyz";
        std::string s(1, a[rng() % a.size()]);
        for (std::size_t i = 1, n = min + rng() % 6; i < n; ++i) s.push_back(a[rng() % a.size()]);
        return s;
    };
    auto scalar = [&]() {
        static const std::string a = "abcdefghijklmnopqrstuvwxyzABC0123456789-_.@/";
        std::string s(1, 'v');
        for (std::size_t i = 0, n = rng() % 10; i < n; ++i) s.push_back(a[rng() % a.size()]);
        return Node::make_scalar(s);
    };
    Node map = Node::make_map();
    for (std::size_t i = 0, n = 1 + rng() % 4; i < n; ++i) {
        std::string key = word(2);
        while (map.find(key)) key += "x";
        const auto choice = depth <= 0 ? 0u : rng() % 3;
        if (choice == 0) {
            map.set(key, scalar());
        } else if (choice == 1) {
            map.set(key, random_tree(rng, depth - 1, xml));
        } else {
            Node seq = Node::make_seq();
            for (std::size_t k = 0, m = 2 + rng() % 3; k < m; ++k)
                seq.seq.push_back(xml ? random_tree(rng, depth - 1, xml) : scalar());
            map.set(key, seq);
        }
    }
    return map;
}

void collect_paths(const Node& n, std::vector<std::string>& prefix, std::vector<std::vector<std::string>>& out) {
    if (n.is_scalar()) {
        out.push_back(prefix);
        return;
    }
    if (n.is_map()) {
        for (const auto& [k, v] : n.map) {
            prefix.push_back(k);
            collect_paths(v, prefix, out);
            prefix.pop_back();
        }
    } else {
        for (std::size_t i = 0; i < n.seq.size(); ++i) {
            prefix.push_back(std::to_string(i));
            collect_paths(n.seq[i], prefix, out);
            prefix.pop_back();
        }
    }
}

}  // namespace

TEST(LoadConfig, YamlExample) {
    const auto t = load_config("dbhost: h\ndbuser: u\n", ConfigFormat::Yaml);
    ASSERT_TRUE(t.is_map());
    ASSERT_EQ(t.map.size(), 2u);
    EXPECT_EQ(t.map[0].first, "dbhost");
    EXPECT_EQ(t.map[0].second.scalar, "h");
    EXPECT_EQ(t.map[1].first, "dbuser");
    EXPECT_EQ(t.map[1].second.scalar, "u");
}

TEST(LoadConfig, JsonEmptyObject) {
    const auto t = load_config("{}", ConfigFormat::Json);
    EXPECT_TRUE(t.is_map());
    EXPECT_TRUE(t.map.empty());
}

TEST(LoadConfig, XmlExample) {
    const auto t = load_config("<db><host>h</host></db>", ConfigFormat::Xml);
    EXPECT_EQ(lookup(t, {"db", "host"}), "h");
}

TEST(LoadConfig, Positions) {
    const auto t = load_config("a:\n  b: x\n  c: y\n", ConfigFormat::Yaml);
    const auto* c = lookup_node(t, {"a", "c"});
    ASSERT_NE(c, nullptr);
    EXPECT_EQ(c->line, 3u);
    const auto j = load_config("{\n  \"k\": {\n    \"v\": \"1\"\n  }\n}", ConfigFormat::Json);
    EXPECT_EQ(lookup_node(j, {"k", "v"})->line, 3u);
}

TEST(LoadConfig, ParseErrorsCarryPosition) {
    try {
        load_config("{\n  \"a\": [1,\n}", ConfigFormat::Json);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_GE(e.line(), 2u);
    }
    EXPECT_THROW(load_config("<a><b></a>", ConfigFormat::Xml), ParseError);
    EXPECT_THROW(load_config("a: [1, 2\n", ConfigFormat::Yaml), ParseError);
}

TEST(LoadConfig, YamlMultiDocumentDiagnostic) {
    Diagnostics diags;
    const auto t = load_config("a: 1\n---\na: 2\n", ConfigFormat::Yaml, &diags);
    EXPECT_EQ(lookup(t, {"a"}), "1");
    EXPECT_FALSE(diags.empty());
}

TEST(LoadConfig, ScalarsNotCoerced) {
    const auto t = load_config("{\"port\": 3306, \"ok\": true, \"n\": null}", ConfigFormat::Json);
    EXPECT_EQ(lookup(t, {"port"}), "3306");
    EXPECT_EQ(lookup(t, {"ok"}), "true");
    EXPECT_TRUE(lookup_node(t, {"n"})->is_null);
}

TEST(Lookup, Basics) {
    Node t = Node::make_map();
    t.set("a", Node::make_scalar("x"));
    EXPECT_EQ(lookup(t, {"a"}), "x");
    EXPECT_FALSE(lookup(t, {"b"}));
    EXPECT_FALSE(lookup(t, {}));
}

TEST(Lookup, FlatConfigKeys) {
    const auto t = load_config("dbhost: h\ndbuser: u\ndbpass: p\ndbname: d\n", ConfigFormat::Yaml);
    EXPECT_EQ(lookup(t, {"dbhost"}), "h");
    EXPECT_EQ(lookup(t, {"dbpass"}), "p");
}

TEST(Lookup, SequenceIndex) {
    const auto t = load_config("hosts:\n  - a\n  - b\n", ConfigFormat::Yaml);
    EXPECT_EQ(lookup(t, {"hosts", "1"}), "b");
    EXPECT_FALSE(lookup(t, {"hosts", "2"}));
}

// Reference outputs were produced by xmltodict.parse on the same documents.
TEST(XmlOracle, MatchesReferenceConversion) {
    const auto dir = harvest::testing::fixture("xml_oracle");
    std::size_t checked = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".xml") continue;
        auto expected_path = entry.path();
        expected_path.replace_extension(".expected.json");
        const auto expected = nlohmann::ordered_json::parse(harvest::testing::read_file(expected_path));
        const auto tree = load_config(harvest::testing::read_file(entry.path()), ConfigFormat::Xml);
        EXPECT_EQ(to_json(tree), expected) << entry.path();
        ++checked;
    }
    EXPECT_EQ(checked, 10u);
}

TEST(Serialize, RoundTripLookupEveryFormat) {
    std::mt19937 rng(11);
    for (const auto format : {ConfigFormat::Yaml, ConfigFormat::Json, ConfigFormat::Xml}) {
        for (int i = 0; i < 200; ++i) {
            Node tree = random_tree(rng, 3, format == ConfigFormat::Xml);
            if (format == ConfigFormat::Xml) {
                Node root = Node::make_map();
                root.set("config", tree);
                tree = root;
            }
            const std::string text = serialize_config(tree, format);
            const Node back = load_config(text, format);
            EXPECT_TRUE(same_tree(tree, back)) << to_string(format) << "\n" << text;
            std::vector<std::string> prefix;
            std::vector<std::vector<std::string>> paths;
            collect_paths(tree, prefix, paths);
            for (const auto& p : paths) EXPECT_EQ(lookup(back, p), lookup(tree, p));
        }
    }
}

TEST(Serialize, DeterministicOrderPreserving) {
    const std::string doc = "zeta: 1\nalpha: 2\nmid:\n  b: x\n  a: y\n";
    const auto a = load_config(doc, ConfigFormat::Yaml);
    const auto b = load_config(doc, ConfigFormat::Yaml);
    EXPECT_TRUE(same_tree(a, b));
    EXPECT_EQ(a.map[0].first, "zeta");
    EXPECT_EQ(serialize_config(a, ConfigFormat::Json), serialize_config(b, ConfigFormat::Json));
}

TEST(FormatFromExtension, Cases) {
    EXPECT_EQ(format_from_extension("a/b.YML"), ConfigFormat::Yaml);
    EXPECT_EQ(format_from_extension("x.yaml"), ConfigFormat::Yaml);
    EXPECT_EQ(format_from_extension("x.json"), ConfigFormat::Json);
    EXPECT_EQ(format_from_extension("x.xml"), ConfigFormat::Xml);
    EXPECT_FALSE(format_from_extension("x.ini"));
}
