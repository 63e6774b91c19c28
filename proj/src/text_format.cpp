#include "rely/text_format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rely/errors.hpp"

namespace rely {

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(s.substr(start)));
            break;
        }
        out.push_back(trim(s.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

bool TextSection::has(std::string_view key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return true;
    return false;
}

std::optional<std::string> TextSection::get(std::string_view key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return v;
    return std::nullopt;
}

const std::string& TextSection::require(std::string_view key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return v;
    throw UsageError("section [" + name + "] is missing required key '" + std::string(key) + "'");
}

std::vector<std::string> TextSection::get_all(std::string_view key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries)
        if (k == key) out.push_back(v);
    return out;
}

void TextSection::set(std::string key, std::string value) {
    entries.emplace_back(std::move(key), std::move(value));
}

TextDocument TextDocument::parse(std::string_view text, std::string_view source_name) {
    TextDocument doc;
    TextSection* current = nullptr;
    size_t lineno = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view raw = (nl == std::string_view::npos)
                                   ? text.substr(pos)
                                   : text.substr(pos, nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++lineno;

        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw UsageError(std::string(source_name) + ":" + std::to_string(lineno) +
                                 ": unterminated section header");
            std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
            if (name.empty())
                throw UsageError(std::string(source_name) + ":" + std::to_string(lineno) +
                                 ": empty section name");
            doc.sections.push_back(TextSection{name, {}});
            current = &doc.sections.back();
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(std::string(source_name) + ":" + std::to_string(lineno) +
                             ": expected 'key = value', got '" + line + "'");
        if (current == nullptr)
            throw UsageError(std::string(source_name) + ":" + std::to_string(lineno) +
                             ": key outside of any [section]");
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty())
            throw UsageError(std::string(source_name) + ":" + std::to_string(lineno) +
                             ": empty key");
        current->entries.emplace_back(std::move(key), std::move(value));
    }
    return doc;
}

TextDocument TextDocument::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

std::string TextDocument::serialize() const {
    std::string out;
    for (size_t i = 0; i < sections.size(); ++i) {
        if (i > 0) out += '\n';
        out += '[';
        out += sections[i].name;
        out += "]\n";
        for (const auto& [k, v] : sections[i].entries) {
            out += k;
            out += " = ";
            out += v;
            out += '\n';
        }
    }
    return out;
}

const TextSection* TextDocument::find(std::string_view name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

std::vector<const TextSection*> TextDocument::find_all(std::string_view name) const {
    std::vector<const TextSection*> out;
    for (const auto& s : sections)
        if (s.name == name) out.push_back(&s);
    return out;
}

TextSection& TextDocument::add(std::string name) {
    sections.push_back(TextSection{std::move(name), {}});
    return sections.back();
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
    std::string t = trim(text);
    double v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || !std::isfinite(v))
        throw UsageError("cannot parse '" + t + "' as a number for " + std::string(what));
    return v;
}

long long parse_int(std::string_view text, std::string_view what) {
    std::string t = trim(text);
    long long v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw UsageError("cannot parse '" + t + "' as an integer for " + std::string(what));
    return v;
}

bool parse_bool(std::string_view text, std::string_view what) {
    std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw UsageError("cannot parse '" + t + "' as a boolean for " + std::string(what));
}

} // namespace rely
