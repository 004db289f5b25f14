#include "barn/lidar.hpp"

#include <limits>
#include <stdexcept>

namespace barn {

namespace {

// Amanatides-Woo traversal along a single ray. Returns the distance to the
// entry boundary of the first occupied cell, or max_range if the ray leaves
// the grid or exceeds it.
double cast_ray(const Vec2& origin, double angle, const OccupancyGrid& grid, double max_range) {
    const Vec2 dir = unit_vector(angle);
    int ix, iy;
    grid.world_to_cell(origin, ix, iy);
    if (!grid.in_bounds(ix, iy)) {
        throw std::invalid_argument("raycast_scan: pose outside grid bounds");
    }

    const double inf = std::numeric_limits<double>::infinity();
    const int step_x = dir.x > 0.0 ? 1 : -1;
    const int step_y = dir.y > 0.0 ? 1 : -1;
    const double t_delta_x = dir.x != 0.0 ? grid.resolution / std::abs(dir.x) : inf;
    const double t_delta_y = dir.y != 0.0 ? grid.resolution / std::abs(dir.y) : inf;

    // Distance along the ray to the first vertical / horizontal cell border.
    const double cell_min_x = grid.origin.x + ix * grid.resolution;
    const double cell_min_y = grid.origin.y + iy * grid.resolution;
    double t_max_x = inf;
    double t_max_y = inf;
    if (dir.x > 0.0) {
        t_max_x = (cell_min_x + grid.resolution - origin.x) / dir.x;
    } else if (dir.x < 0.0) {
        t_max_x = (cell_min_x - origin.x) / dir.x;
    }
    if (dir.y > 0.0) {
        t_max_y = (cell_min_y + grid.resolution - origin.y) / dir.y;
    } else if (dir.y < 0.0) {
        t_max_y = (cell_min_y - origin.y) / dir.y;
    }

    double t_entry = 0.0;
    while (true) {
        if (grid.cells[grid.index(ix, iy)]) return std::min(t_entry, max_range);
        if (t_entry >= max_range) return max_range;
        if (t_max_x < t_max_y) {
            t_entry = t_max_x;
            t_max_x += t_delta_x;
            ix += step_x;
        } else {
            t_entry = t_max_y;
            t_max_y += t_delta_y;
            iy += step_y;
        }
        if (!grid.in_bounds(ix, iy)) return max_range;
    }
}

}  // namespace

Scan raycast_scan(const Pose& pose, const OccupancyGrid& grid, const LidarSpec& spec) {
    Scan scan;
    scan.pose = pose;
    scan.spec = spec;
    scan.ranges.resize(spec.beam_count);
    const Vec2 origin = pose.position();
    for (int k = 0; k < spec.beam_count; ++k) {
        scan.ranges[k] = cast_ray(origin, pose.theta + spec.beam_angle(k), grid, spec.max_range);
    }
    return scan;
}

}  // namespace barn
