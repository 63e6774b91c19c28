// Column schemas for tabular datasets.
//
// A schema lists the columns of a CSV file in order, giving each a name, a
// value kind and a role in the analysis.  Schemas are stored as text files
// with one [column] section per column:
//
//   [column]
//   name = gender
//   kind = categorical
//   role = covariate
//   levels = female, male
//
// Kinds:
//   binary       0 or 1
//   categorical  one of a fixed list of string levels (stored by level index)
//   real         finite floating point
//   count        nonnegative integer (stored as double, must fit in 53 bits)
//
// Roles:
//   outcome      the decision or score being analyzed (exactly one per schema)
//   covariate    candidate input to the decision
//   selection    0/1 indicator of inclusion in a subpopulation
//   group        identifies which decision-maker produced the row
//   auxiliary    carried through but not used unless named explicitly

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rely/text_format.hpp"

namespace rely {

enum class ColumnKind { binary, categorical, real, count };
enum class ColumnRole { outcome, covariate, selection, group, auxiliary };

std::string column_kind_name(ColumnKind kind);
ColumnKind column_kind_from_name(const std::string& name);
std::string column_role_name(ColumnRole role);
ColumnRole column_role_from_name(const std::string& name);

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::real;
    ColumnRole role = ColumnRole::auxiliary;
    std::vector<std::string> levels;  // categorical only, in declaration order

    // Index of a level string, if declared.
    std::optional<std::size_t> level_index(const std::string& level) const;
};

struct Schema {
    std::vector<ColumnSchema> columns;

    static Schema parse(const TextDocument& doc);
    static Schema parse_file(const std::string& path);
    TextDocument to_document() const;

    std::size_t size() const { return columns.size(); }
    const ColumnSchema& at(std::size_t i) const { return columns.at(i); }

    // Index of the column with the given name; throws UsageError if absent.
    std::size_t index_of(const std::string& name) const;
    std::optional<std::size_t> find(const std::string& name) const;

    // Index of the unique outcome column; throws UsageError if there is not
    // exactly one.
    std::size_t outcome_index() const;

    // Indexes of all columns with the given role, in schema order.
    std::vector<std::size_t> indexes_with_role(ColumnRole role) const;

    // Throws UsageError on duplicate names, categorical columns without
    // levels, duplicate levels, or levels on non-categorical columns.
    void validate() const;
};

} // namespace rely
