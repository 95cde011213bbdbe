#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sto {

// Minimal reader for the human-editable key/value + array-of-tables format used
// by line files, train-parameter files and run configs:
//
//   total_length_m = 1280
//   approximate = true
//   [guard]
//   beta = 0.95
//   [[section]]
//   start_m = 0
//
// Values are numbers, booleans, quoted strings, or [a, b, c] arrays of numbers.
// '#' starts a comment. Keys before any table header belong to the root table "".
class KvFile {
public:
    struct Table {
        std::string name;
        std::map<std::string, std::string> values;          // raw value text
        std::map<std::string, std::vector<double>> arrays;  // parsed [..] arrays

        bool has(const std::string& key) const { return values.count(key) || arrays.count(key); }
        double number(const std::string& key) const;
        double number_or(const std::string& key, double fallback) const;
        bool boolean_or(const std::string& key, bool fallback) const;
        std::string text(const std::string& key) const;
        std::string text_or(const std::string& key, const std::string& fallback) const;
        std::vector<double> array(const std::string& key) const;
    };

    static KvFile parse_file(const std::string& path);
    static KvFile parse_string(const std::string& content, const std::string& origin = "<string>");

    // Root-level keys (before the first table header).
    const Table& root() const { return root_; }
    // Singleton table [name]; root defaults if absent.
    const Table* table(const std::string& name) const;
    // All [[name]] occurrences, in file order.
    const std::vector<Table>& table_array(const std::string& name) const;

private:
    Table root_;
    std::vector<std::pair<std::string, Table>> tables_;      // [name]
    std::map<std::string, std::vector<Table>> table_arrays_; // [[name]]
    static const std::vector<Table> empty_;
};

} // namespace sto
