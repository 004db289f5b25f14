#ifndef BARN_LIDAR_HPP_
#define BARN_LIDAR_HPP_

#include <vector>

#include "barn/grid.hpp"

namespace barn {

/// Planar LiDAR mounted at the robot center. Beams are ordered by increasing
/// angle; beam 0 points at -fov/2 relative to the heading, the last beam at
/// +fov/2.
struct LidarSpec {
    double fov{1.5 * M_PI};  // 270 degrees
    int beam_count{720};
    double max_range{10.0};

    double beam_angle(int beam) const {
        return -0.5 * fov + beam * (fov / (beam_count - 1));
    }

    friend bool operator==(const LidarSpec&, const LidarSpec&) = default;
};

struct Scan {
    std::vector<double> ranges;  // meters, in [0, max_range]
    Pose pose;                   // capture pose
    LidarSpec spec;

    /// ranges[i] == max_range encodes "no return".
    bool is_max_range(int beam) const { return ranges[beam] >= spec.max_range - 1e-9; }

    double min_range() const {
        double m = spec.max_range;
        for (double r : ranges) m = std::min(m, r);
        return m;
    }
};

/// Per-beam distance to the first occupied-cell boundary (DDA grid
/// traversal), capped at max_range. A ray that leaves the grid without
/// hitting an occupied cell reports max_range (no return).
Scan raycast_scan(const Pose& pose, const OccupancyGrid& grid, const LidarSpec& spec);

}  // namespace barn

#endif  // BARN_LIDAR_HPP_
