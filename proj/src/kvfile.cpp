#include "sto/kvfile.hpp"
#include "sto/errors.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace sto {

const std::vector<KvFile::Table> KvFile::empty_;

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
    bool in_quote = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_quote = !in_quote;
        if (line[i] == '#' && !in_quote) return line.substr(0, i);
    }
    return line;
}

double parse_number(const std::string& raw, const std::string& where) {
    const std::string t = trim(raw);
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0')
        throw ParseError(where + ": expected a number, got '" + t + "'");
    return v;
}

} // namespace

double KvFile::Table::number(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end())
        throw ParseError("missing required key '" + key + "'" + (name.empty() ? "" : " in [" + name + "]"));
    return parse_number(it->second, "key '" + key + "'");
}

double KvFile::Table::number_or(const std::string& key, double fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : parse_number(it->second, "key '" + key + "'");
}

bool KvFile::Table::boolean_or(const std::string& key, bool fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    const std::string t = trim(it->second);
    if (t == "true") return true;
    if (t == "false") return false;
    throw ParseError("key '" + key + "': expected true/false, got '" + t + "'");
}

std::string KvFile::Table::text(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end())
        throw ParseError("missing required key '" + key + "'" + (name.empty() ? "" : " in [" + name + "]"));
    std::string t = trim(it->second);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
    return t;
}

std::string KvFile::Table::text_or(const std::string& key, const std::string& fallback) const {
    return values.count(key) ? text(key) : fallback;
}

std::vector<double> KvFile::Table::array(const std::string& key) const {
    auto it = arrays.find(key);
    if (it == arrays.end())
        throw ParseError("missing required array '" + key + "'" + (name.empty() ? "" : " in [" + name + "]"));
    return it->second;
}

KvFile KvFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

KvFile KvFile::parse_string(const std::string& content, const std::string& origin) {
    KvFile kv;
    Table* current = &kv.root_;
    std::istringstream in(content);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        std::string t = trim(strip_comment(line));
        if (t.empty()) continue;

        if (t.size() >= 4 && t.substr(0, 2) == "[[" && t.substr(t.size() - 2) == "]]") {
            std::string name = trim(t.substr(2, t.size() - 4));
            if (name.empty()) throw ParseError(where + ": empty [[table]] name");
            kv.table_arrays_[name].push_back(Table{name, {}, {}});
            current = &kv.table_arrays_[name].back();
            continue;
        }
        if (t.front() == '[' && t.back() == ']') {
            std::string name = trim(t.substr(1, t.size() - 2));
            if (name.empty()) throw ParseError(where + ": empty [table] name");
            kv.tables_.emplace_back(name, Table{name, {}, {}});
            current = &kv.tables_.back().second;
            continue;
        }

        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(where + ": expected 'key = value', got '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ParseError(where + ": empty key");
        if (value.empty()) throw ParseError(where + ": empty value for key '" + key + "'");

        if (value.front() == '[') {
            if (value.back() != ']') throw ParseError(where + ": unterminated array for key '" + key + "'");
            std::vector<double> items;
            std::string inner = value.substr(1, value.size() - 2);
            std::istringstream as(inner);
            std::string item;
            while (std::getline(as, item, ',')) {
                if (trim(item).empty()) continue;
                items.push_back(parse_number(item, where));
            }
            current->arrays[key] = std::move(items);
        } else {
            current->values[key] = value;
        }
    }
    return kv;
}

const KvFile::Table* KvFile::table(const std::string& name) const {
    for (const auto& [n, t] : tables_)
        if (n == name) return &t;
    return nullptr;
}

const std::vector<KvFile::Table>& KvFile::table_array(const std::string& name) const {
    auto it = table_arrays_.find(name);
    return it == table_arrays_.end() ? empty_ : it->second;
}

} // namespace sto
