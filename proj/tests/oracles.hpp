#ifndef BARN_TESTS_ORACLES_HPP_
#define BARN_TESTS_ORACLES_HPP_

// Independent reference implementations used to cross-check production code.
// Written directly from the definitions, favoring clarity over speed, and
// deliberately structured differently from the library implementations.

#include <cmath>
#include <limits>
#include <vector>

#include "barn/gap_planner.hpp"
#include "barn/geometry.hpp"
#include "barn/grid.hpp"
#include "barn/sim.hpp"

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// 8-connected flood fill over free cells; returns a reachability mask.
inline std::vector<char> flood_fill_free(const barn::OccupancyGrid& grid, int sx, int sy) {
    std::vector<char> seen(grid.cells.size(), 0);
    if (!grid.in_bounds(sx, sy) || grid.occupied(sx, sy)) return seen;
    std::vector<std::pair<int, int>> stack{{sx, sy}};
    seen[grid.index(sx, sy)] = 1;
    while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = cx + dx;
                const int ny = cy + dy;
                if (!grid.in_bounds(nx, ny) || grid.occupied(nx, ny)) continue;
                if (seen[grid.index(nx, ny)]) continue;
                seen[grid.index(nx, ny)] = 1;
                stack.push_back({nx, ny});
            }
        }
    }
    return seen;
}

/// O(V^2) Dijkstra without a priority queue; kInf when unreachable or an
/// endpoint is blocked.
inline double dijkstra_length(const barn::OccupancyGrid& grid, const barn::Vec2& start,
                              const barn::Vec2& goal) {
    int sx, sy, gx, gy;
    grid.world_to_cell(start, sx, sy);
    grid.world_to_cell(goal, gx, gy);
    if (grid.occupied(sx, sy) || grid.occupied(gx, gy)) return kInf;
    const int n = grid.width_cells * grid.height_cells;
    std::vector<double> dist(static_cast<std::size_t>(n), kInf);
    std::vector<char> done(static_cast<std::size_t>(n), 0);
    dist[grid.index(sx, sy)] = 0.0;
    for (;;) {
        int best = -1;
        double best_dist = kInf;
        for (int i = 0; i < n; ++i) {
            if (!done[i] && dist[i] < best_dist) {
                best_dist = dist[i];
                best = i;
            }
        }
        if (best < 0) break;
        done[best] = 1;
        const int bx = best % grid.width_cells;
        const int by = best / grid.width_cells;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = bx + dx;
                const int ny = by + dy;
                if (!grid.in_bounds(nx, ny) || grid.occupied(nx, ny)) continue;
                const double w =
                    (dx != 0 && dy != 0) ? std::sqrt(2.0) * grid.resolution : grid.resolution;
                const std::size_t ni = grid.index(nx, ny);
                if (dist[best] + w < dist[ni]) dist[ni] = dist[best] + w;
            }
        }
    }
    return dist[grid.index(gx, gy)];
}

/// Brute-force inflation: all-pairs center distance check.
inline barn::OccupancyGrid inflate_brute(const barn::OccupancyGrid& grid, double radius) {
    barn::OccupancyGrid out = grid;
    for (int iy = 0; iy < grid.height_cells; ++iy) {
        for (int ix = 0; ix < grid.width_cells; ++ix) {
            bool hit = false;
            for (int oy = 0; oy < grid.height_cells && !hit; ++oy) {
                for (int ox = 0; ox < grid.width_cells && !hit; ++ox) {
                    if (!grid.cells[grid.index(ox, oy)]) continue;
                    // Same boundary slack as the production contract: a
                    // center exactly at the radius is inflated.
                    if (barn::distance(grid.cell_center(ix, iy), grid.cell_center(ox, oy)) <=
                        radius + 1e-12) {
                        hit = true;
                    }
                }
            }
            out.cells[out.index(ix, iy)] = hit ? 1 : 0;
        }
    }
    return out;
}

/// 1 mm ray march; a ray leaving the grid without a hit reports max_range.
inline double raymarch(const barn::Pose& pose, double world_angle,
                       const barn::OccupancyGrid& grid, double max_range,
                       double step = 0.001) {
    const barn::Vec2 dir = barn::unit_vector(world_angle);
    for (double t = 0.0; t <= max_range; t += step) {
        const barn::Vec2 p = pose.position() + dir * t;
        int ix, iy;
        grid.world_to_cell(p, ix, iy);
        if (!grid.in_bounds(ix, iy)) return max_range;
        if (grid.occupied(ix, iy)) return t;
    }
    return max_range;
}

/// Micrometer point march over a bracket, for settling rays whose chord
/// through a cell is shorter than the coarse march step. A point hit is
/// always sound (the sample itself lies inside an occupied cell); returns
/// t_hi + 1 as a no-hit sentinel.
inline double raymarch_fine(const barn::Pose& pose, double world_angle,
                            const barn::OccupancyGrid& grid, double t_lo, double t_hi,
                            double step = 1e-6) {
    const barn::Vec2 dir = barn::unit_vector(world_angle);
    for (double t = std::max(t_lo, 0.0); t <= t_hi; t += step) {
        const barn::Vec2 p = pose.position() + dir * t;
        int ix, iy;
        grid.world_to_cell(p, ix, iy);
        if (!grid.in_bounds(ix, iy)) break;
        if (grid.occupied(ix, iy)) return t;
    }
    return t_hi + 1.0;
}

/// Euler integration with many substeps, for checking the exact-arc step.
inline barn::Pose euler_step(const barn::Pose& pose, const barn::Twist& cmd, double dt,
                             int substeps) {
    barn::Pose p = pose;
    const double h = dt / substeps;
    for (int i = 0; i < substeps; ++i) {
        p.x += cmd.v * std::cos(p.theta) * h;
        p.y += cmd.v * std::sin(p.theta) * h;
        p.theta += cmd.omega * h;
    }
    p.theta = barn::wrap_angle(p.theta);
    return p;
}

/// Brute-force collision: nearest point of every occupied cell via clamping.
inline bool collision_brute(const barn::Pose& pose, const barn::OccupancyGrid& grid,
                            double radius) {
    for (int iy = 0; iy < grid.height_cells; ++iy) {
        for (int ix = 0; ix < grid.width_cells; ++ix) {
            if (!grid.cells[grid.index(ix, iy)]) continue;
            const double lo_x = grid.origin.x + ix * grid.resolution;
            const double lo_y = grid.origin.y + iy * grid.resolution;
            const double cx = barn::clamp(pose.x, lo_x, lo_x + grid.resolution);
            const double cy = barn::clamp(pose.y, lo_y, lo_y + grid.resolution);
            if (barn::distance({pose.x, pose.y}, {cx, cy}) < radius) return true;
        }
    }
    return false;
}

/// Point-to-segment distance via unit-vector projection (independent form).
inline double segment_distance(const barn::Vec2& p, const barn::Vec2& a, const barn::Vec2& b) {
    const barn::Vec2 d = b - a;
    const double len = d.norm();
    if (len < 1e-15) return (p - a).norm();
    const barn::Vec2 u = d * (1.0 / len);
    const double s = (p - a).dot(u);
    if (s <= 0.0) return (p - a).norm();
    if (s >= len) return (p - b).norm();
    return std::abs((p - a).cross(u));
}

inline bool admissible(const barn::Vec2& a, const barn::Vec2& b,
                       const std::vector<barn::Vec2>& obstacles, double clearance) {
    for (const barn::Vec2& p : obstacles) {
        if (segment_distance(p, a, b) < clearance) return false;
    }
    return true;
}

/// O(n^2) forward gap extraction straight from the published predicates:
/// rising discontinuity at pair (i, i+1) opens a gap at p_i, closed by the
/// nearest strictly-later point; the sweep resumes past the closing point.
inline std::vector<barn::Gap> gaps_forward(const std::vector<barn::Vec2>& pts,
                                           const std::vector<char>& at_max,
                                           const std::vector<double>& ranges, double d_r) {
    std::vector<barn::Gap> out;
    const int n = static_cast<int>(pts.size());
    int from = 0;
    for (int i = 0; i + 1 < n; ++i) {
        if (i < from) continue;
        const bool type2 = at_max[i] != at_max[i + 1];
        const bool type1 = barn::distance(pts[i], pts[i + 1]) > d_r;
        if (!type2 && !type1) continue;
        if (!(ranges[i + 1] > ranges[i])) continue;  // not rising
        int best_j = -1;
        double best_d = kInf;
        for (int j = i + 1; j < n; ++j) {
            const double d = barn::distance(pts[i], pts[j]);
            if (d < best_d) {
                best_d = d;
                best_j = j;
            }
        }
        if (best_d > d_r) out.push_back(barn::Gap{pts[i], pts[best_j]});
        from = best_j + 1;
    }
    return out;
}

/// Mirrored pass: falling discontinuity at pair (i, i+1) opens a gap at its
/// near point p_{i+1}, closed by the nearest strictly-earlier point (ties
/// take the larger index, mirroring the forward tie rule); the sweep then
/// resumes below the closing point.
inline std::vector<barn::Gap> gaps_backward(const std::vector<barn::Vec2>& pts,
                                            const std::vector<char>& at_max,
                                            const std::vector<double>& ranges, double d_r) {
    std::vector<barn::Gap> out;
    const int n = static_cast<int>(pts.size());
    int limit = n - 1;
    for (int i = n - 2; i >= 0; --i) {
        const int m = i + 1;
        if (m > limit) continue;
        const bool type2 = at_max[i] != at_max[m];
        const bool type1 = barn::distance(pts[i], pts[m]) > d_r;
        if (!type2 && !type1) continue;
        if (ranges[m] > ranges[i]) continue;  // rising, not falling
        int best_j = -1;
        double best_d = kInf;
        for (int j = m - 1; j >= 0; --j) {
            const double d = barn::distance(pts[m], pts[j]);
            if (d < best_d) {
                best_d = d;
                best_j = j;
            }
        }
        if (best_d > d_r) out.push_back(barn::Gap{pts[m], pts[best_j]});
        limit = best_j - 1;
    }
    return out;
}

}  // namespace oracle

#endif  // BARN_TESTS_ORACLES_HPP_
