#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pisim {

/// Plot-ready record table: comma-separated, one header line naming columns
/// (units in the names), plus a leading comment line carrying the only
/// nondeterministic content (the timestamp).
struct RecordTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != columns.size())
            throw std::logic_error("record row arity mismatch for table " + name);
        rows.push_back(std::move(cells));
    }
};

/// Shortest decimal form that parses back to the identical double.
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = 0.0;
    std::sscanf(buf, "%lg", &back);
    if (back == v) {
        for (int prec = 1; prec <= 16; ++prec) {
            char cand[64];
            std::snprintf(cand, sizeof(cand), "%.*g", prec, v);
            std::sscanf(cand, "%lg", &back);
            if (back == v) return cand;
        }
    }
    return buf;
}

inline void write_records(const RecordTable& t, const std::string& path,
                          const std::string& timestamp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot write");
    out << "# " << t.name << " generated_at=" << timestamp << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

inline RecordTable read_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    RecordTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (t.name.empty()) {
                const auto sp = line.find(' ', 2);
                t.name = line.substr(2, sp == std::string::npos ? std::string::npos : sp - 2);
            }
            continue;
        }
        std::vector<std::string> cells;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        cells.push_back(cur);
        if (!have_header) {
            t.columns = cells;
            have_header = true;
        } else {
            t.rows.push_back(cells);
        }
    }
    return t;
}

}  // namespace pisim
