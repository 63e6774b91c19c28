#include "rely/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "rely/errors.hpp"
#include "rely/text_format.hpp"

namespace rely {

namespace {

// Largest integer magnitude a double stores exactly.
constexpr double kMaxExactInt = 9007199254740992.0;  // 2^53

// Splits CSV text into records of fields per RFC 4180.  Accepts LF and CRLF
// line endings; quoted fields may contain commas, quotes (doubled) and
// newlines.  A trailing newline does not produce an empty final record.
std::vector<std::vector<std::string>> split_csv_records(const std::string& text,
                                                        const std::string& source_name) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool any_field_started = false;
    std::size_t line = 1;

    auto end_field = [&] {
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(fields));
        fields.clear();
        any_field_started = false;
    };

    std::size_t i = 0;
    // Skip a UTF-8 byte order mark if present.
    if (text.size() >= 3 && text.compare(0, 3, "\xef\xbb\xbf") == 0) i = 3;

    for (; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || field_was_quoted)
                    throw DataError(source_name + ":" + std::to_string(line) +
                                    ": quote opened in the middle of a field");
                in_quotes = true;
                field_was_quoted = true;
                any_field_started = true;
                break;
            case ',':
                end_field();
                any_field_started = true;
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') break;  // CRLF handled at '\n'
                field.push_back(c);
                break;
            case '\n':
                if (any_field_started || !field.empty()) end_record();
                ++line;
                break;
            default:
                field.push_back(c);
                any_field_started = true;
                break;
        }
    }
    if (in_quotes)
        throw DataError(source_name + ": unterminated quoted field at end of file");
    if (any_field_started || !field.empty()) end_record();
    return records;
}

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\r\n") != std::string::npos;
}

std::string quote_csv_field(const std::string& field) {
    if (!needs_quoting(field)) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

// Parses one cell for the given column.  Returns the stored double or throws
// DataError with a reason suitable for the drop report.
double parse_cell(const std::string& raw, const ColumnSchema& col) {
    std::string value = trim(raw);
    if (value.empty())
        throw DataError("missing value in column '" + col.name + "'");
    switch (col.kind) {
        case ColumnKind::binary: {
            if (value == "0") return 0.0;
            if (value == "1") return 1.0;
            throw DataError("binary column '" + col.name + "' has value '" + value + "'");
        }
        case ColumnKind::categorical: {
            if (auto idx = col.level_index(value)) return static_cast<double>(*idx);
            throw DataError("categorical column '" + col.name + "' has undeclared level '" +
                            value + "'");
        }
        case ColumnKind::real: {
            double x;
            try {
                x = parse_double(value);
            } catch (const Error&) {
                throw DataError("real column '" + col.name + "' has unparseable value '" +
                                value + "'");
            }
            if (!std::isfinite(x))
                throw DataError("real column '" + col.name + "' has non-finite value '" +
                                value + "'");
            return x;
        }
        case ColumnKind::count: {
            long long x;
            try {
                x = parse_int(value);
            } catch (const Error&) {
                throw DataError("count column '" + col.name + "' has unparseable value '" +
                                value + "'");
            }
            if (x < 0)
                throw DataError("count column '" + col.name + "' has negative value '" +
                                value + "'");
            if (static_cast<double>(x) > kMaxExactInt)
                throw DataError("count column '" + col.name + "' has value '" + value +
                                "' too large to store exactly");
            return static_cast<double>(x);
        }
    }
    throw DataError("unhandled column kind");
}

std::string format_integer_cell(double v) {
    return std::to_string(static_cast<long long>(std::llround(v)));
}

} // namespace

Dataset Dataset::empty(Schema schema) {
    schema.validate();
    Dataset data;
    data.columns.resize(schema.size());
    data.schema = std::move(schema);
    return data;
}

void Dataset::append_row(const std::vector<double>& values) {
    if (values.size() != columns.size())
        throw UsageError("append_row got " + std::to_string(values.size()) +
                         " values for " + std::to_string(columns.size()) + " columns");
    for (std::size_t c = 0; c < columns.size(); ++c) columns[c].push_back(values[c]);
}

std::string Dataset::render_cell(std::size_t row, std::size_t col) const {
    const ColumnSchema& cs = schema.at(col);
    double v = cell(row, col);
    switch (cs.kind) {
        case ColumnKind::binary:
        case ColumnKind::count:
            return format_integer_cell(v);
        case ColumnKind::categorical: {
            auto idx = static_cast<std::size_t>(v);
            if (idx >= cs.levels.size())
                throw DataError("categorical cell in '" + cs.name + "' holds invalid level index");
            return cs.levels[idx];
        }
        case ColumnKind::real:
            return format_double(v);
    }
    throw DataError("unhandled column kind");
}

void Partition::validate(const Schema& schema) const {
    if (x1_columns.empty())
        throw UsageError("partition needs at least one x1 column");
    std::vector<std::string> all = x1_columns;
    all.insert(all.end(), x2_columns.begin(), x2_columns.end());
    all.push_back(outcome);
    std::set<std::string> seen;
    for (const std::string& name : all) {
        schema.index_of(name);  // throws if absent
        if (!seen.insert(name).second)
            throw UsageError("partition names column '" + name + "' more than once");
    }
}

Dataset parse_csv(const std::string& text, const Schema& schema, const std::string& source_name,
                  LoadReport* report) {
    schema.validate();
    std::vector<std::vector<std::string>> records = split_csv_records(text, source_name);
    if (records.empty())
        throw DataError(source_name + ": file is empty");

    // Map each schema column to its position in the header.
    const std::vector<std::string>& header = records.front();
    std::vector<std::size_t> header_pos(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
        const std::string& want = schema.at(c).name;
        bool found = false;
        for (std::size_t h = 0; h < header.size(); ++h) {
            if (trim(header[h]) == want) {
                header_pos[c] = h;
                found = true;
                break;
            }
        }
        if (!found)
            throw DataError(source_name + ": header is missing declared column '" + want + "'");
    }

    Dataset data = Dataset::empty(schema);
    data.provenance = source_name;
    LoadReport local;
    LoadReport& rep = report ? *report : local;

    std::vector<double> row(schema.size());
    for (std::size_t r = 1; r < records.size(); ++r) {
        const std::vector<std::string>& fields = records[r];
        if (fields.size() != header.size()) {
            rep.drop(r, "row has " + std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
            continue;
        }
        bool ok = true;
        for (std::size_t c = 0; c < schema.size() && ok; ++c) {
            try {
                row[c] = parse_cell(fields[header_pos[c]], schema.at(c));
            } catch (const DataError& e) {
                rep.drop(r, e.what());
                ok = false;
            }
        }
        if (ok) {
            data.append_row(row);
            ++rep.rows_kept;
        }
    }
    return data;
}

Dataset load_csv(const std::string& path, const Schema& schema, LoadReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open CSV file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), schema, path, report);
}

std::string render_csv(const Dataset& data) {
    std::string out;
    for (std::size_t c = 0; c < data.schema.size(); ++c) {
        if (c) out.push_back(',');
        out += quote_csv_field(data.schema.at(c).name);
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
        for (std::size_t c = 0; c < data.schema.size(); ++c) {
            if (c) out.push_back(',');
            out += quote_csv_field(data.render_cell(r, c));
        }
        out.push_back('\n');
    }
    return out;
}

void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << render_csv(data);
    if (!out) throw DataError("failed writing CSV to '" + path + "'");
}

Dataset gather_rows(const Dataset& data, const std::vector<std::size_t>& rows) {
    Dataset out = Dataset::empty(data.schema);
    out.provenance = data.provenance;
    for (std::size_t c = 0; c < data.n_cols(); ++c) {
        out.columns[c].reserve(rows.size());
        const std::vector<double>& src = data.column(c);
        for (std::size_t r : rows) out.columns[c].push_back(src.at(r));
    }
    return out;
}

std::vector<std::pair<std::string, Dataset>> split_by_group(const Dataset& data) {
    std::vector<std::size_t> group_cols = data.schema.indexes_with_role(ColumnRole::group);
    if (group_cols.size() != 1)
        throw UsageError("split_by_group needs exactly one group column, schema declares " +
                         std::to_string(group_cols.size()));
    std::size_t g = group_cols.front();
    const ColumnSchema& gcol = data.schema.at(g);
    const std::vector<double>& values = data.column(g);

    // Distinct levels in presentation order.
    std::vector<double> levels;
    if (gcol.kind == ColumnKind::categorical) {
        for (std::size_t i = 0; i < gcol.levels.size(); ++i)
            levels.push_back(static_cast<double>(i));
    } else {
        levels = values;
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    }

    std::vector<std::pair<std::string, Dataset>> parts;
    std::vector<double> row(data.schema.size());
    for (double level : levels) {
        Dataset part = Dataset::empty(data.schema);
        part.provenance = data.provenance;
        for (std::size_t r = 0; r < data.n_rows(); ++r) {
            if (values[r] != level) continue;
            for (std::size_t c = 0; c < data.schema.size(); ++c) row[c] = data.cell(r, c);
            part.append_row(row);
        }
        if (part.n_rows() == 0) continue;
        std::string label = gcol.kind == ColumnKind::categorical
                                ? gcol.levels[static_cast<std::size_t>(level)]
                                : part.render_cell(0, g);
        parts.emplace_back(std::move(label), std::move(part));
    }
    return parts;
}

double interruption_rate(double interruptions, double advocate_tokens) {
    if (!(advocate_tokens >= 1.0))
        throw DataError("interruption rate needs advocate_tokens >= 1, got " +
                        format_double(advocate_tokens));
    return interruptions / (advocate_tokens / 1000.0);
}

Dataset derive_interruption_rate(const Dataset& data, const std::string& interruptions_column,
                                 const std::string& tokens_column, const std::string& rate_name,
                                 LoadReport* report) {
    std::size_t ic = data.schema.index_of(interruptions_column);
    std::size_t tc = data.schema.index_of(tokens_column);
    if (data.schema.at(ic).kind != ColumnKind::count)
        throw UsageError("interruptions column '" + interruptions_column + "' must have kind count");
    if (data.schema.at(tc).kind != ColumnKind::count)
        throw UsageError("tokens column '" + tokens_column + "' must have kind count");
    if (data.schema.find(rate_name))
        throw UsageError("schema already has a column named '" + rate_name + "'");
    if (!data.schema.indexes_with_role(ColumnRole::outcome).empty())
        throw UsageError("schema already declares an outcome column");

    Schema extended = data.schema;
    ColumnSchema rate_col;
    rate_col.name = rate_name;
    rate_col.kind = ColumnKind::real;
    rate_col.role = ColumnRole::outcome;
    extended.columns.push_back(rate_col);

    Dataset out = Dataset::empty(extended);
    out.provenance = data.provenance;
    LoadReport local;
    LoadReport& rep = report ? *report : local;

    std::vector<double> row(extended.size());
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
        double tokens = data.cell(r, tc);
        if (tokens < 1.0) {
            rep.drop(r + 1, "row has zero '" + tokens_column + "', rate undefined");
            continue;
        }
        for (std::size_t c = 0; c < data.schema.size(); ++c) row[c] = data.cell(r, c);
        row.back() = interruption_rate(data.cell(r, ic), tokens);
        out.append_row(row);
        ++rep.rows_kept;
    }
    return out;
}

} // namespace rely
