#include "rely/schema.hpp"

#include <set>

#include "rely/errors.hpp"

namespace rely {

std::string column_kind_name(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::binary: return "binary";
        case ColumnKind::categorical: return "categorical";
        case ColumnKind::real: return "real";
        case ColumnKind::count: return "count";
    }
    return "?";
}

ColumnKind column_kind_from_name(const std::string& name) {
    if (name == "binary") return ColumnKind::binary;
    if (name == "categorical") return ColumnKind::categorical;
    if (name == "real") return ColumnKind::real;
    if (name == "count") return ColumnKind::count;
    throw UsageError("unknown column kind '" + name +
                     "' (expected binary, categorical, real or count)");
}

std::string column_role_name(ColumnRole role) {
    switch (role) {
        case ColumnRole::outcome: return "outcome";
        case ColumnRole::covariate: return "covariate";
        case ColumnRole::selection: return "selection";
        case ColumnRole::group: return "group";
        case ColumnRole::auxiliary: return "auxiliary";
    }
    return "?";
}

ColumnRole column_role_from_name(const std::string& name) {
    if (name == "outcome") return ColumnRole::outcome;
    if (name == "covariate") return ColumnRole::covariate;
    if (name == "selection") return ColumnRole::selection;
    if (name == "group") return ColumnRole::group;
    if (name == "auxiliary") return ColumnRole::auxiliary;
    throw UsageError("unknown column role '" + name +
                     "' (expected outcome, covariate, selection, group or auxiliary)");
}

std::optional<std::size_t> ColumnSchema::level_index(const std::string& level) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i] == level) return i;
    return std::nullopt;
}

Schema Schema::parse(const TextDocument& doc) {
    Schema schema;
    for (const TextSection* section : doc.find_all("column")) {
        ColumnSchema col;
        col.name = section->require("name");
        col.kind = column_kind_from_name(section->require("kind"));
        col.role = column_role_from_name(section->require("role"));
        if (auto levels = section->get("levels")) {
            for (const std::string& level : split(*levels, ','))
                col.levels.push_back(trim(level));
        }
        schema.columns.push_back(std::move(col));
    }
    if (schema.columns.empty())
        throw UsageError("schema declares no [column] sections");
    schema.validate();
    return schema;
}

Schema Schema::parse_file(const std::string& path) {
    return parse(TextDocument::parse_file(path));
}

TextDocument Schema::to_document() const {
    TextDocument doc;
    for (const ColumnSchema& col : columns) {
        TextSection& section = doc.add("column");
        section.set("name", col.name);
        section.set("kind", column_kind_name(col.kind));
        section.set("role", column_role_name(col.role));
        if (!col.levels.empty()) section.set("levels", join(col.levels, ", "));
    }
    return doc;
}

std::size_t Schema::index_of(const std::string& name) const {
    if (auto i = find(name)) return *i;
    throw UsageError("schema has no column named '" + name + "'");
}

std::optional<std::size_t> Schema::find(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return i;
    return std::nullopt;
}

std::size_t Schema::outcome_index() const {
    std::vector<std::size_t> found = indexes_with_role(ColumnRole::outcome);
    if (found.size() != 1)
        throw UsageError("schema must declare exactly one outcome column, found " +
                         std::to_string(found.size()));
    return found.front();
}

std::vector<std::size_t> Schema::indexes_with_role(ColumnRole role) const {
    std::vector<std::size_t> found;
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].role == role) found.push_back(i);
    return found;
}

void Schema::validate() const {
    std::set<std::string> names;
    for (const ColumnSchema& col : columns) {
        if (col.name.empty()) throw UsageError("schema column has an empty name");
        if (!names.insert(col.name).second)
            throw UsageError("schema declares column '" + col.name + "' more than once");
        if (col.kind == ColumnKind::categorical) {
            if (col.levels.empty())
                throw UsageError("categorical column '" + col.name + "' declares no levels");
            std::set<std::string> seen;
            for (const std::string& level : col.levels) {
                if (level.empty())
                    throw UsageError("categorical column '" + col.name + "' has an empty level");
                if (!seen.insert(level).second)
                    throw UsageError("categorical column '" + col.name +
                                     "' declares level '" + level + "' more than once");
            }
        } else if (!col.levels.empty()) {
            throw UsageError("column '" + col.name + "' is not categorical but declares levels");
        }
    }
}

} // namespace rely
