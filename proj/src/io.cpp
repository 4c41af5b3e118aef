#include "trm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace trm {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open for reading: " + path);
    return f;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& s, const std::string& path, int line_no) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || !std::isfinite(v))
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

void write_rows(std::ofstream& f, const Grid& grid, const Mat& values) {
    f << "t";
    for (int j = 0; j < grid.n_x; ++j) f << ",x" << j;
    f << "\n";
    for (int i = 0; i < grid.n_t; ++i) {
        f << format_double(grid.time(i));
        for (int j = 0; j < grid.n_x; ++j) f << "," << format_double(values(i, j));
        f << "\n";
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_density_csv(const std::string& path, const DensityMatrix& m) {
    auto f = open_out(path);
    write_rows(f, m.grid, m.values);
}

void write_matrix_csv(const std::string& path, const Grid& grid, const Mat& values) {
    if (values.rows() != grid.n_t || values.cols() != grid.n_x)
        throw ShapeMismatch("write_matrix_csv: shape does not match grid");
    auto f = open_out(path);
    write_rows(f, grid, values);
}

CsvTable read_csv_table(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw ParseError(path + ":1: empty file");
    const int n_x = static_cast<int>(split_csv(line).size()) - 1;
    if (n_x < 1) throw ParseError(path + ":1: header must be t,x0,x1,...");

    CsvTable table;
    std::vector<double> data;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (static_cast<int>(fields.size()) != n_x + 1)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(n_x + 1) + " fields");
        table.times.push_back(parse_double(fields[0], path, line_no));
        for (int j = 1; j <= n_x; ++j) data.push_back(parse_double(fields[j], path, line_no));
    }
    const int n_t = static_cast<int>(table.times.size());
    if (n_t < 1) throw ParseError(path + ": no data rows");
    table.values = Mat(n_t, n_x);
    table.values.data() = std::move(data);
    return table;
}

DensityMatrix read_density_csv(const std::string& path, double dx, double x0) {
    CsvTable table = read_csv_table(path);
    const int n_t = table.values.rows();
    if (n_t < 2) throw ParseError(path + ": need at least 2 time rows");
    const double dt = table.times[1] - table.times[0];
    for (int i = 1; i < n_t; ++i) {
        if (std::abs(table.times[i] - table.times[0] - i * dt) > 1e-9 * (1.0 + std::abs(table.times[i])))
            throw ParseError(path + ": non-uniform time stamps");
    }
    return DensityMatrix(Grid(n_t, table.values.cols(), dt, dx, table.times[0], x0),
                         std::move(table.values));
}

void write_density_json(const std::string& path, const DensityMatrix& m) {
    nlohmann::json j;
    j["grid"] = {{"n_t", m.grid.n_t}, {"n_x", m.grid.n_x}, {"dt", m.grid.dt},
                 {"dx", m.grid.dx},   {"t0", m.grid.t0},   {"x0", m.grid.x0}};
    auto& rows = j["values"] = nlohmann::json::array();
    for (int i = 0; i < m.grid.n_t; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int jx = 0; jx < m.grid.n_x; ++jx) row.push_back(m.values(i, jx));
        rows.push_back(std::move(row));
    }
    open_out(path) << j.dump(1) << "\n";
}

DensityMatrix read_density_json(const std::string& path) {
    nlohmann::json j;
    try {
        open_in(path) >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        const auto& g = j.at("grid");
        Grid grid(g.at("n_t").get<int>(), g.at("n_x").get<int>(), g.at("dt").get<double>(),
                  g.at("dx").get<double>(), g.value("t0", 0.0), g.value("x0", 0.0));
        Mat values(grid.n_t, grid.n_x);
        const auto& rows = j.at("values");
        if (static_cast<int>(rows.size()) != grid.n_t)
            throw ShapeMismatch(path + ": values row count does not match grid");
        for (int i = 0; i < grid.n_t; ++i) {
            if (static_cast<int>(rows[i].size()) != grid.n_x)
                throw ShapeMismatch(path + ": values column count does not match grid");
            for (int jx = 0; jx < grid.n_x; ++jx) values(i, jx) = rows[i][jx].get<double>();
        }
        return DensityMatrix(grid, std::move(values));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_fd_points_csv(const std::string& path, const std::vector<FdPoint>& points) {
    auto f = open_out(path);
    f << "density,flow,source\n";
    for (const auto& p : points)
        f << format_double(p.density) << "," << format_double(p.flow) << "," << p.source << "\n";
}

}  // namespace trm
