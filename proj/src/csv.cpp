#include "grushin/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace grushin::csv {

std::string format(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string format(long long value) { return std::to_string(value); }

std::string format(unsigned long long value) { return std::to_string(value); }

Writer::Writer(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) append(std::string(h), first);
    text_ += '\n';
}

void Writer::append(const std::string& cell, bool& first) {
    if (!first) text_ += ',';
    text_ += cell;
    first = false;
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace grushin::csv
