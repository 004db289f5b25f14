#ifndef BARN_GRID_HPP_
#define BARN_GRID_HPP_

#include <cstdint>
#include <vector>

#include "barn/geometry.hpp"

namespace barn {

/// Row-major boolean occupancy grid. Cell (ix, iy) covers the square
/// [origin + (ix, iy) * resolution, origin + (ix+1, iy+1) * resolution),
/// with iy increasing toward +y. Queries outside the grid report occupied.
struct OccupancyGrid {
    int width_cells{0};
    int height_cells{0};
    double resolution{0.1};  // meters per cell
    Vec2 origin{0.0, 0.0};
    std::vector<std::uint8_t> cells;  // 1 = occupied, size width*height

    static OccupancyGrid make(int width, int height, double resolution, Vec2 origin = {0.0, 0.0}) {
        OccupancyGrid g;
        g.width_cells = width;
        g.height_cells = height;
        g.resolution = resolution;
        g.origin = origin;
        g.cells.assign(static_cast<std::size_t>(width) * height, 0);
        return g;
    }

    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * width_cells + ix;
    }

    bool in_bounds(int ix, int iy) const {
        return ix >= 0 && ix < width_cells && iy >= 0 && iy < height_cells;
    }

    bool occupied(int ix, int iy) const {
        if (!in_bounds(ix, iy)) return true;
        return cells[index(ix, iy)] != 0;
    }

    void set(int ix, int iy, bool value) { cells[index(ix, iy)] = value ? 1 : 0; }

    double width_m() const { return width_cells * resolution; }
    double height_m() const { return height_cells * resolution; }

    /// Cell containing a world point (floor mapping).
    void world_to_cell(const Vec2& p, int& ix, int& iy) const {
        ix = static_cast<int>(std::floor((p.x - origin.x) / resolution));
        iy = static_cast<int>(std::floor((p.y - origin.y) / resolution));
    }

    Vec2 cell_center(int ix, int iy) const {
        return {origin.x + (ix + 0.5) * resolution, origin.y + (iy + 0.5) * resolution};
    }

    bool occupied_world(const Vec2& p) const {
        int ix, iy;
        world_to_cell(p, ix, iy);
        return occupied(ix, iy);
    }

    friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;
};

}  // namespace barn

#endif  // BARN_GRID_HPP_
