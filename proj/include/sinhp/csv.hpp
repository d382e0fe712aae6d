#pragma once

#include "sinhp/errors.hpp"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace sinhp {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// CSV table with '#'-prefixed metadata header lines; comma delimiter,
/// '.' decimal point, mandatory header row.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns,
              const std::vector<std::pair<std::string, std::string>>& metadata) {
        out_.open(path, std::ios::binary);
        if (!out_) throw ConfigError("cannot open output file '" + path + "'");
        for (const auto& [k, v] : metadata) out_ << "# " << k << "=" << v << "\n";
        for (size_t i = 0; i < columns.size(); ++i)
            out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
        out_ << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i)
            out_ << cells[i] << (i + 1 < cells.size() ? "," : "");
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

} // namespace sinhp
