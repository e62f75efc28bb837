#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mobal {

/// Floating-point cell with 17 significant digits (round-trip exact).
inline std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Minimal CSV document with a versioned schema comment line. Rows are
/// emitted in insertion order; rewriting the same content yields identical
/// bytes.
class CsvWriter {
  public:
    explicit CsvWriter(std::string schema) { lines_.push_back("# schema=" + std::move(schema)); }

    void comment(const std::string& text) { lines_.push_back("# " + text); }

    void header(const std::vector<std::string>& names) { lines_.push_back(join(names)); }

    void row(const std::vector<std::string>& cells) { lines_.push_back(join(cells)); }

    std::string str() const {
        std::ostringstream out;
        for (const std::string& line : lines_) out << line << '\n';
        return out.str();
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open output file: " + path);
        out << str();
    }

  private:
    static std::string join(const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ',';
            line += cells[i];
        }
        return line;
    }

    std::vector<std::string> lines_;
};

}  // namespace mobal
