#pragma once

// Plain-text reports: `[section]` headers followed by `key = value` lines in
// insertion order. Reals print with 17 significant digits so equal runs give
// identical bytes.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace skewlab {

class Report {
public:
    Report& section(const std::string& name);

    Report& set(const std::string& key, double value);
    Report& set(const std::string& key, std::int64_t value);
    Report& set(const std::string& key, int value) { return set(key, static_cast<std::int64_t>(value)); }
    Report& set(const std::string& key, std::uint64_t value);
    Report& set(const std::string& key, bool value);
    Report& set(const std::string& key, const std::string& value);
    Report& set(const std::string& key, const char* value) { return set(key, std::string(value)); }
    /// Comma-separated list.
    Report& set(const std::string& key, const std::vector<double>& values);

    std::string str() const;

private:
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
    };
    std::vector<Section> sections_;
};

std::string format_real(double x);

/// Parsed view of a report: (section, key, value) triples in file order.
struct ReportEntry {
    std::string section;
    std::string key;
    std::string value;
};
std::vector<ReportEntry> parse_report(const std::string& text);

}  // namespace skewlab
