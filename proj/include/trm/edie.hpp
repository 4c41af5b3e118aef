#pragma once

#include <string>
#include <vector>

#include "trm/grid.hpp"

namespace trm {

struct VehicleTrack {
    long long id = 0;
    double length = 0.0;  ///< meters
    std::vector<std::pair<double, double>> samples;  ///< (t [s], x [m]), strictly increasing t
};

struct TrajectorySet {
    std::vector<VehicleTrack> vehicles;  ///< sorted by id
    int dropped_short = 0;               ///< vehicles with fewer than 2 samples
};

/// Names of the CSV columns carrying the trajectory fields, plus unit scale
/// factors applied on ingestion. An empty length_col skips vehicle lengths.
struct ColumnMapping {
    std::string id_col = "id";
    std::string t_col = "t";
    std::string x_col = "x";
    std::string length_col = "length";
    double time_scale = 1.0;      ///< seconds per time unit in the file
    double position_scale = 1.0;  ///< meters per position unit in the file
};

TrajectorySet parse_trajectories(const std::string& path, const ColumnMapping& mapping);

/// Generalized density and flow on a space-time grid. Entry (i,j) covers the
/// region [t_i, t_i + dt) x [x_j - dx/2, x_j + dx/2):
///   density = total vehicle time in the region / (dt * dx)   [veh/m]
///   flow    = total signed distance traveled in it / (dt*dx) [veh/s]
struct EdieMatrices {
    Grid grid;
    Mat density;
    Mat flow;
};

/// Trajectories are piecewise-linear between samples; each segment is clipped
/// exactly against every grid cell rectangle it crosses.
EdieMatrices edie_matrices(const TrajectorySet& trajectories, const Grid& grid);

/// rho_max = lane_count / mean vehicle length.
double estimate_rho_max(const TrajectorySet& trajectories, int lane_count);

}  // namespace trm
