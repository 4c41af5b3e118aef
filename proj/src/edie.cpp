#include "trm/edie.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace trm {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

int find_column(const std::vector<std::string>& header, const std::string& name,
                const std::string& path) {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    throw MissingColumn(path + ": column '" + name + "' not found in header");
}

double to_double(const std::string& s, const std::string& path, int line_no) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || !std::isfinite(v))
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

}  // namespace

TrajectorySet parse_trajectories(const std::string& path, const ColumnMapping& mapping) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open: " + path);
    std::string line;
    TrajectorySet out;
    if (!std::getline(f, line)) return out;  // empty file: empty set, dropped count stays 0

    const auto header = split_csv(line);
    const int id_idx = find_column(header, mapping.id_col, path);
    const int t_idx = find_column(header, mapping.t_col, path);
    const int x_idx = find_column(header, mapping.x_col, path);
    const int len_idx =
        mapping.length_col.empty() ? -1 : find_column(header, mapping.length_col, path);

    struct Raw {
        double length = 0.0;
        std::vector<std::pair<double, double>> samples;
    };
    std::map<long long, Raw> by_id;

    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        const int needed = std::max({id_idx, t_idx, x_idx, len_idx});
        if (static_cast<int>(fields.size()) <= needed)
            throw ParseError(path + ":" + std::to_string(line_no) + ": too few fields");
        char* end = nullptr;
        const long long id = std::strtoll(fields[id_idx].c_str(), &end, 10);
        if (end == fields[id_idx].c_str())
            throw ParseError(path + ":" + std::to_string(line_no) + ": bad vehicle id '" +
                             fields[id_idx] + "'");
        Raw& raw = by_id[id];
        raw.samples.emplace_back(to_double(fields[t_idx], path, line_no) * mapping.time_scale,
                                 to_double(fields[x_idx], path, line_no) * mapping.position_scale);
        if (len_idx >= 0) raw.length = to_double(fields[len_idx], path, line_no);
    }

    for (auto& [id, raw] : by_id) {
        if (raw.samples.size() < 2) {
            ++out.dropped_short;
            continue;
        }
        std::stable_sort(raw.samples.begin(), raw.samples.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (size_t i = 1; i < raw.samples.size(); ++i) {
            if (raw.samples[i].first <= raw.samples[i - 1].first)
                throw ParseError(path + ": duplicate timestamp for vehicle " + std::to_string(id));
        }
        out.vehicles.push_back({id, raw.length, std::move(raw.samples)});
    }
    return out;
}

EdieMatrices edie_matrices(const TrajectorySet& trajectories, const Grid& grid) {
    EdieMatrices out{grid, Mat(grid.n_t, grid.n_x), Mat(grid.n_t, grid.n_x)};
    const double area = grid.dt * grid.dx;
    const double x_lo = grid.x0 - grid.dx / 2.0;  // left edge of cell 0
    const double t_lo = grid.t0;

    for (const auto& vehicle : trajectories.vehicles) {
        for (size_t s = 1; s < vehicle.samples.size(); ++s) {
            const auto [t0, x0] = vehicle.samples[s - 1];
            const auto [t1, x1] = vehicle.samples[s];
            const double speed = (x1 - x0) / (t1 - t0);

            const int i_first = std::max(0, static_cast<int>(std::floor((t0 - t_lo) / grid.dt)));
            const int i_last =
                std::min(grid.n_t - 1, static_cast<int>(std::floor((t1 - t_lo) / grid.dt)));
            for (int i = i_first; i <= i_last; ++i) {
                const double slab_a = std::max(t0, t_lo + i * grid.dt);
                const double slab_b = std::min(t1, t_lo + (i + 1) * grid.dt);
                if (slab_b <= slab_a) continue;
                const double xa = x0 + speed * (slab_a - t0);
                const double xb = x0 + speed * (slab_b - t0);
                const double x_min = std::min(xa, xb);
                const double x_max = std::max(xa, xb);
                const int j_first =
                    std::max(0, static_cast<int>(std::floor((x_min - x_lo) / grid.dx)));
                const int j_last =
                    std::min(grid.n_x - 1, static_cast<int>(std::floor((x_max - x_lo) / grid.dx)));
                for (int j = j_first; j <= j_last; ++j) {
                    double ta = slab_a, tb = slab_b;
                    if (speed != 0.0) {
                        // times at which the segment crosses the cell edges
                        const double cell_lo = x_lo + j * grid.dx;
                        const double cell_hi = cell_lo + grid.dx;
                        double t_enter = slab_a + (cell_lo - xa) / speed;
                        double t_exit = slab_a + (cell_hi - xa) / speed;
                        if (t_enter > t_exit) std::swap(t_enter, t_exit);
                        ta = std::max(slab_a, t_enter);
                        tb = std::min(slab_b, t_exit);
                        if (tb <= ta) continue;
                    } else {
                        const double cell_lo = x_lo + j * grid.dx;
                        if (!(xa >= cell_lo && xa < cell_lo + grid.dx)) continue;
                    }
                    out.density(i, j) += (tb - ta) / area;
                    out.flow(i, j) += speed * (tb - ta) / area;
                }
            }
        }
    }
    return out;
}

double estimate_rho_max(const TrajectorySet& trajectories, int lane_count) {
    if (lane_count < 1) throw InvalidArgument("estimate_rho_max: lane_count must be >= 1");
    if (trajectories.vehicles.empty()) throw NoVehicles("estimate_rho_max: no vehicles");
    double sum = 0.0;
    bool any_positive = false;
    for (const auto& v : trajectories.vehicles) {
        if (v.length > 0.0) any_positive = true;
        sum += v.length;
    }
    if (!any_positive) throw NoVehicles("estimate_rho_max: no vehicle with positive length");
    return lane_count / (sum / trajectories.vehicles.size());
}

}  // namespace trm
