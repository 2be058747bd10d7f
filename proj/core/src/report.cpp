#include "skewlab/report.hpp"

#include <cstdio>
#include <sstream>

#include "skewlab/error.hpp"

namespace skewlab {

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Report& Report::section(const std::string& name) {
    sections_.push_back({name, {}});
    return *this;
}

Report& Report::set(const std::string& key, const std::string& value) {
    if (sections_.empty()) throw DomainError("report entry '" + key + "' outside a section");
    if (value.find('\n') != std::string::npos) throw DomainError("report values are single-line");
    sections_.back().entries.emplace_back(key, value);
    return *this;
}

Report& Report::set(const std::string& key, double value) { return set(key, format_real(value)); }
Report& Report::set(const std::string& key, std::int64_t value) { return set(key, std::to_string(value)); }
Report& Report::set(const std::string& key, std::uint64_t value) { return set(key, std::to_string(value)); }
Report& Report::set(const std::string& key, bool value) { return set(key, std::string(value ? "true" : "false")); }

Report& Report::set(const std::string& key, const std::vector<double>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ", ";
        s += format_real(values[i]);
    }
    return set(key, s);
}

std::string Report::str() const {
    std::string out;
    for (std::size_t i = 0; i < sections_.size(); ++i) {
        if (i) out += '\n';
        out += '[' + sections_[i].name + "]\n";
        for (const auto& [k, v] : sections_[i].entries) out += k + " = " + v + '\n';
    }
    return out;
}

std::vector<ReportEntry> parse_report(const std::string& text) {
    std::vector<ReportEntry> out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find(" = ");
        if (eq == std::string::npos || section.empty()) {
            throw ParseError("report line " + std::to_string(lineno) + ": expected key = value");
        }
        out.push_back({section, line.substr(0, eq), line.substr(eq + 3)});
    }
    return out;
}

}  // namespace skewlab
