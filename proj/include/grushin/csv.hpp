#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

namespace grushin::csv {

/// Round-trippable fixed formatting (17 significant digits).
std::string format(double value);
std::string format(long long value);
std::string format(unsigned long long value);
inline std::string format(int value) { return format(static_cast<long long>(value)); }
inline std::string format(unsigned long value) { return format(static_cast<unsigned long long>(value)); }
inline std::string format(long value) { return format(static_cast<long long>(value)); }

/// Accumulates comma-separated rows.
class Writer {
public:
    explicit Writer(std::initializer_list<std::string_view> header);

    template <typename... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((append(format_cell(cells), first)), ...);
        text_ += '\n';
    }

    const std::string& str() const { return text_; }

private:
    static std::string format_cell(const std::string& s) { return s; }
    static std::string format_cell(const char* s) { return s; }
    template <typename T>
    static std::string format_cell(const T& v) { return format(v); }
    void append(const std::string& cell, bool& first);

    std::string text_;
};

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace grushin::csv
