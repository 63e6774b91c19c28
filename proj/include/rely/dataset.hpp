// Column-typed tabular datasets backed by CSV files.
//
// A Dataset stores one double per cell in column-major order.  Categorical
// cells hold the index of their level in the schema's declaration list;
// binary cells hold 0 or 1; count cells hold nonnegative integers that fit in
// 53 bits so the double representation is exact.
//
// Loading follows a drop-and-count policy: rows with missing or unparseable
// cells are dropped, counted, and reported with a per-row reason.  Structural
// problems (missing declared column, empty file) abort the load instead.

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rely/schema.hpp"

namespace rely {

// Outcome of a lossy ingestion step (CSV load, derived-column computation).
struct LoadReport {
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0;
    // (1-based data row number, human-readable reason), in file order.
    std::vector<std::pair<std::size_t, std::string>> drops;

    void drop(std::size_t row, std::string reason) {
        ++rows_dropped;
        drops.emplace_back(row, std::move(reason));
    }
};

struct Dataset {
    Schema schema;
    std::vector<std::vector<double>> columns;  // one vector per schema column
    std::string provenance;                    // file path or simulator tag

    static Dataset empty(Schema schema);

    std::size_t n_rows() const { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t n_cols() const { return columns.size(); }

    const std::vector<double>& column(std::size_t i) const { return columns.at(i); }
    const std::vector<double>& column(const std::string& name) const {
        return columns.at(schema.index_of(name));
    }
    double cell(std::size_t row, std::size_t col) const { return columns.at(col).at(row); }

    // Values must be in schema order; no per-cell validation is applied.
    void append_row(const std::vector<double>& values);

    // Renders one cell as it would appear in CSV output (level string for
    // categorical, plain integer for binary and count, shortest
    // round-trip decimal for real).
    std::string render_cell(std::size_t row, std::size_t col) const;
};

// Named split of the covariates for a reliance analysis.  x1 holds the
// covariates whose influence is being measured; x2 holds the rest.
struct Partition {
    std::vector<std::string> x1_columns;  // nonempty
    std::vector<std::string> x2_columns;  // may be empty
    std::string outcome;

    // Throws UsageError if any named column is missing from the schema, the
    // lists overlap, or x1 is empty.
    void validate(const Schema& schema) const;
};

// Parses an RFC 4180 CSV file with a header row.  Header names are matched
// to schema columns order-insensitively; columns present in the file but not
// in the schema are ignored.  Rows that fail cell validation are dropped and
// recorded in the report.
Dataset load_csv(const std::string& path, const Schema& schema, LoadReport* report = nullptr);
Dataset parse_csv(const std::string& text, const Schema& schema, const std::string& source_name,
                  LoadReport* report = nullptr);

std::string render_csv(const Dataset& data);
void write_csv(const Dataset& data, const std::string& path);

// New dataset holding the given rows of data, in order; indexes may repeat
// (bootstrap resamples) and must be < n_rows.
Dataset gather_rows(const Dataset& data, const std::vector<std::size_t>& rows);

// Splits rows by the level of the schema's group column.  Parts appear in
// level declaration order for categorical group columns and in ascending
// numeric order otherwise; only observed levels produce parts.
std::vector<std::pair<std::string, Dataset>> split_by_group(const Dataset& data);

// Interruptions per 1000 advocate tokens.  Requires tokens >= 1.
double interruption_rate(double interruptions, double advocate_tokens);

// Appends a real outcome column named rate_name holding the interruption
// rate of each row.  Rows with zero tokens are dropped and counted.  The
// schema must not already declare an outcome column.
Dataset derive_interruption_rate(const Dataset& data, const std::string& interruptions_column,
                                 const std::string& tokens_column, const std::string& rate_name,
                                 LoadReport* report = nullptr);

} // namespace rely
