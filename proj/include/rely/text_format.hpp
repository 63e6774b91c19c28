// Sectioned key-value text format used for schema files, run configs,
// serialized models and reports.
//
//   # comment
//   [section name]
//   key = value
//   key = another value     # repeated keys are allowed and kept in order
//
// Values are taken verbatim after trimming surrounding whitespace; there is
// no quoting or escaping. Section names repeat freely. Serialization is
// deterministic: what you put in is what comes out, in order.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rely {

struct TextSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(std::string_view key) const;
    // First value for key, or nullopt.
    std::optional<std::string> get(std::string_view key) const;
    // First value for key; UsageError naming the section and key if absent.
    const std::string& require(std::string_view key) const;
    // All values for key, in file order.
    std::vector<std::string> get_all(std::string_view key) const;

    void set(std::string key, std::string value);
};

struct TextDocument {
    std::vector<TextSection> sections;

    // Parses text; source_name is used in error messages only.
    static TextDocument parse(std::string_view text, std::string_view source_name);
    static TextDocument parse_file(const std::string& path);

    std::string serialize() const;

    const TextSection* find(std::string_view name) const;
    std::vector<const TextSection*> find_all(std::string_view name) const;

    TextSection& add(std::string name);
};

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
// Strict full-string parse; UsageError mentioning `what` on failure.
double parse_double(std::string_view text, std::string_view what = "value");
long long parse_int(std::string_view text, std::string_view what = "value");
bool parse_bool(std::string_view text, std::string_view what = "value");

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

} // namespace rely
