#pragma once

#include <string>
#include <vector>

#include "trm/grid.hpp"

namespace trm {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// CSV layout: header "t,x0,x1,...", one row per time step, first field is
/// the time stamp. Floats use shortest round-trip formatting.
void write_density_csv(const std::string& path, const DensityMatrix& m);

/// Reads the CSV layout above. dt/t0 come from the time column; dx and x0
/// are not stored in CSV and must be supplied.
DensityMatrix read_density_csv(const std::string& path, double dx, double x0 = 0.0);

/// JSON layout: {"grid": {...}, "values": [[...], ...]}.
void write_density_json(const std::string& path, const DensityMatrix& m);
DensityMatrix read_density_json(const std::string& path);

/// Same CSV layout for raw (non-normalized) matrices such as Edie output.
void write_matrix_csv(const std::string& path, const Grid& grid, const Mat& values);

/// Raw read of the CSV layout: time stamps plus the value matrix, no
/// normalization or grid checks.
struct CsvTable {
    std::vector<double> times;
    Mat values;
};
CsvTable read_csv_table(const std::string& path);

/// One fundamental-diagram sample: density [veh/m] against flow [veh/s].
struct FdPoint {
    double density = 0.0;
    double flow = 0.0;
    std::string source;  ///< "data" or "fit"
};

void write_fd_points_csv(const std::string& path, const std::vector<FdPoint>& points);

}  // namespace trm
