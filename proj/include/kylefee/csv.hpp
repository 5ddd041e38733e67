#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "kylefee/model.hpp"

namespace kylefee {

// 12 significant digits, '.' decimal point, no locale surprises.
inline std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return std::string(buf);
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw config_error("cannot open output file: " + path);
    }

    void comment(const std::string& text) { out_ << "# " << text << "\n"; }

    void header(const std::vector<std::string>& cols) { write_strings(cols); }

    void row(std::initializer_list<double> vals) {
        bool first = true;
        for (double v : vals) {
            if (!first) out_ << ',';
            out_ << fmt12(v);
            first = false;
        }
        out_ << '\n';
    }

    void row_labeled(const std::string& label, const std::vector<double>& vals) {
        out_ << label;
        for (double v : vals) out_ << ',' << fmt12(v);
        out_ << '\n';
    }

    void row_strings(const std::vector<std::string>& cells) { write_strings(cells); }

  private:
    void write_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }
    std::ofstream out_;
};

}  // namespace kylefee
