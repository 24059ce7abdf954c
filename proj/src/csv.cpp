#include "roughmill/csv.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "roughmill/errors.hpp"

namespace roughmill {

std::string format_double(double v, int sig) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", sig, v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(path, std::ios::binary), columns_(columns.size()) {
    if (!out_) throw std::runtime_error("cannot open CSV for writing: " + path);
    out_ << kCsvHeader << "\n";
    for (size_t i = 0; i < columns.size(); ++i)
        out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_)
        throw std::runtime_error("CSV row width does not match header");
    for (size_t i = 0; i < cells.size(); ++i)
        out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values, int sig) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v, sig));
    row(cells);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') { out.push_back(cur); cur.clear(); }
        else if (c != '\r') cur.push_back(c);
    }
    out.push_back(cur);
    return out;
}

} // namespace

void save_rough_path_csv(const GridRoughPath& p, const std::string& path) {
    p.validate();
    const int d = p.dim;
    const int k_steps = p.n_steps();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open CSV for writing: " + path);
    out << kCsvHeader << "\n";
    out << "kind,rough-path-v1\n";
    out << "dim," << d << "\n";
    out << "points," << k_steps + 1 << "\n";
    out << "t";
    for (int i = 0; i < d; ++i) out << ",x_" << i;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out << ",a_" << i << "_" << j;
    out << "\n";
    for (int k = 0; k <= k_steps; ++k) {
        out << format_double(p.times[k], 17);
        for (int i = 0; i < d; ++i)
            out << "," << format_double(p.value(k, i), 17);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                out << "," << format_double(k == 0 ? 0.0 : p.area(k - 1, i, j), 17);
        out << "\n";
    }
}

GridRoughPath load_rough_path_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open CSV for reading: " + path);
    std::string line;
    auto next = [&](const char* what) {
        if (!std::getline(in, line))
            throw std::runtime_error(std::string("rough path CSV truncated before ") + what);
        if (!line.empty() && line.back() == '\r') line.pop_back();
    };
    next("schema tag");
    if (line != kCsvHeader) throw std::runtime_error("missing roughmill-csv schema tag");
    next("kind row");
    if (line != "kind,rough-path-v1") throw std::runtime_error("not a rough-path CSV");
    next("dim row");
    int d = std::stoi(split_line(line).at(1));
    next("points row");
    int points = std::stoi(split_line(line).at(1));
    if (d <= 0 || points < 2) throw std::runtime_error("rough path CSV has bad dimensions");
    next("column header");

    GridRoughPath p;
    p.dim = d;
    p.times.resize(points);
    p.values.resize(static_cast<size_t>(points) * d);
    p.step_areas.resize(static_cast<size_t>(points - 1) * d * d);
    for (int k = 0; k < points; ++k) {
        next("data row");
        auto cells = split_line(line);
        if (static_cast<int>(cells.size()) != 1 + d + d * d)
            throw std::runtime_error("rough path CSV row has wrong width");
        size_t c = 0;
        p.times[k] = std::stod(cells[c++]);
        for (int i = 0; i < d; ++i) p.value_ref(k, i) = std::stod(cells[c++]);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double a = std::stod(cells[c++]);
                if (k > 0) p.area_ref(k - 1, i, j) = a;
            }
    }
    p.validate();
    return p;
}

void write_trajectory_csv(const std::string& path, const std::vector<double>& times,
                          const std::vector<ScaleVector>& states) {
    if (times.size() != states.size())
        throw dimension_error("trajectory CSV needs one state per time");
    if (times.empty()) throw dimension_error("trajectory CSV needs at least one row");
    const int n = states[0].size();
    std::vector<std::string> cols = {"t"};
    for (int q = 0; q < n; ++q) cols.push_back("c_" + std::to_string(q));
    CsvWriter w(path, cols);
    for (size_t k = 0; k < times.size(); ++k) {
        if (states[k].size() != n)
            throw dimension_error("trajectory states change dimension mid-run");
        std::vector<double> r;
        r.reserve(1 + n);
        r.push_back(times[k]);
        for (int q = 0; q < n; ++q) r.push_back(states[k][q]);
        w.row(r, 17);
    }
}

} // namespace roughmill
