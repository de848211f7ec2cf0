#pragma once

// CSV tables and `key = value` reports. Doubles are printed with 17
// significant digits so they round-trip exactly; files use LF endings and are
// written atomically (temp file, then rename).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bcsgap::io {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

class CsvTable {
public:
    explicit CsvTable(std::initializer_list<std::string_view> header) {
        bool first = true;
        for (auto h : header) {
            if (!first) text_ += ',';
            text_ += h;
            first = false;
        }
        text_ += '\n';
        columns_ = header.size();
    }

    void row(std::initializer_list<double> values) {
        if (values.size() != columns_) throw std::logic_error("CsvTable: column count mismatch");
        bool first = true;
        for (double v : values) {
            if (!first) text_ += ',';
            text_ += format_double(v);
            first = false;
        }
        text_ += '\n';
    }

    const std::string& str() const noexcept { return text_; }
    void save(const std::filesystem::path& path) const { write_file_atomic(path, text_); }

private:
    std::string text_;
    std::size_t columns_ = 0;
};

/// Ordered `key = value` lines.
class Report {
public:
    Report& add(std::string key, double v) { return add(std::move(key), format_double(v)); }
    Report& add(std::string key, bool v) { return add(std::move(key), std::string(v ? "true" : "false")); }
    Report& add(std::string key, const char* v) { return add(std::move(key), std::string(v)); }
    Report& add(std::string key, std::string v) {
        entries_.emplace_back(std::move(key), std::move(v));
        return *this;
    }
    Report& add_int(std::string key, long long v) { return add(std::move(key), std::to_string(v)); }

    std::string str() const {
        std::string s;
        for (const auto& [k, v] : entries_) s += k + " = " + v + '\n';
        return s;
    }
    void save(const std::filesystem::path& path) const { write_file_atomic(path, str()); }
    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace bcsgap::io
