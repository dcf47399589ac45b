#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harvest/model.hpp"

namespace harvest::pyflow {

enum class Role { Username, Password, Host, Port, DatabaseName, Dsn };

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view text);

/// A call argument addressed by position, by keyword, or both.
struct ArgSlot {
    std::optional<int> position;
    std::optional<std::string> keyword;

    friend bool operator==(const ArgSlot&, const ArgSlot&) = default;
};

/// An argument that carries several roles at once: a list binds by index,
/// a dict binds `user`/`password`-style keys.
struct SequenceBinding {
    ArgSlot slot;
    std::vector<Role> roles;

    friend bool operator==(const SequenceBinding&, const SequenceBinding&) = default;
};

struct SinkSpec {
    std::string driver;
    /// Dotted callee pattern; `*` matches exactly one segment.
    std::string callee_path;
    DatabaseKind kind = DatabaseKind::Unknown;
    std::map<int, Role> positional_roles;
    std::map<std::string, Role> keyword_roles;
    /// Also present in the role maps as Role::Dsn.
    std::optional<ArgSlot> dsn_role;
    std::vector<SequenceBinding> sequence_roles;

    friend bool operator==(const SinkSpec&, const SinkSpec&) = default;
};

/// Returns a reason when the spec is unusable.
std::optional<std::string> validate_spec(const SinkSpec& spec);

/// Parses a YAML catalog. Throws FatalError("invalid-catalog") with a
/// `name:line: message` text on any schema problem. A document with
/// `extends: builtin` starts from the builtin catalog and replaces the
/// entries of every driver it redefines.
std::vector<SinkSpec> load_catalog(std::string_view yaml_text, std::string_view source_name);

/// Reads and parses a catalog file; `builtin` and `asyncpg-legacy` name the embedded ones.
std::vector<SinkSpec> load_catalog_file(const std::string& path_or_name);

const std::vector<SinkSpec>& builtin_catalog();
/// Builtin catalog with asyncpg's positional order as (user, password, database, host).
const std::vector<SinkSpec>& asyncpg_legacy_catalog();

/// Distinct driver names in catalog order.
std::vector<std::string> catalog_drivers(const std::vector<SinkSpec>& catalog);

bool callee_matches(std::string_view pattern, std::string_view callee);

}  // namespace harvest::pyflow
