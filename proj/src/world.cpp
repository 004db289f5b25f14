#include "barn/world.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <system_error>

namespace barn {

namespace {

// Deterministic across platforms, unlike std::uniform_real_distribution.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

int count_occupied_neighbors(const OccupancyGrid& g, int ix, int iy) {
    int count = 0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (g.occupied(ix + dx, iy + dy)) ++count;  // out-of-grid counts occupied
        }
    }
    return count;
}

void force_border_walls(OccupancyGrid& g) {
    for (int ix = 0; ix < g.width_cells; ++ix) {
        g.set(ix, 0, true);
        g.set(ix, g.height_cells - 1, true);
    }
    for (int iy = 0; iy < g.height_cells; ++iy) {
        g.set(0, iy, true);
        g.set(g.width_cells - 1, iy, true);
    }
}

OccupancyGrid run_cellular_automata(std::uint64_t seed, const CaParams& p) {
    const int width = static_cast<int>(std::lround(p.width_m / p.resolution));
    const int height = static_cast<int>(std::lround(p.height_m / p.resolution));
    OccupancyGrid grid = OccupancyGrid::make(width, height, p.resolution);

    SplitMix64 rng(seed);
    for (int iy = 0; iy < height; ++iy) {
        for (int ix = 0; ix < width; ++ix) {
            grid.set(ix, iy, rng.next_double() < p.fill_probability);
        }
    }
    if (p.border_walls) force_border_walls(grid);

    OccupancyGrid next = grid;
    for (int it = 0; it < p.iterations; ++it) {
        for (int iy = 0; iy < height; ++iy) {
            for (int ix = 0; ix < width; ++ix) {
                const int n = count_occupied_neighbors(grid, ix, iy);
                const int threshold = grid.occupied(ix, iy) ? p.survival_threshold : p.birth_threshold;
                next.set(ix, iy, n >= threshold);
            }
        }
        if (p.border_walls) force_border_walls(next);
        std::swap(grid, next);
    }

    // Open aprons at the start and goal edges: the robot spawns in free
    // space and traverses the obstacle field, as in the original benchmark.
    const int apron_rows = static_cast<int>(std::lround(p.apron_m / p.resolution));
    const int wall = p.border_walls ? 1 : 0;
    for (int k = 0; k < apron_rows; ++k) {
        const int lo = wall + k;
        const int hi = height - 1 - wall - k;
        if (lo >= hi) break;
        for (int ix = wall; ix < width - wall; ++ix) {
            grid.set(ix, lo, false);
            grid.set(ix, hi, false);
        }
    }
    return grid;
}

// Free cell in `row` closest to the center column, or -1.
int pick_free_cell_in_row(const OccupancyGrid& g, int iy) {
    const int center = g.width_cells / 2;
    for (int d = 0; d < g.width_cells; ++d) {
        for (int sign : {-1, +1}) {
            const int ix = center + sign * d;
            if (ix >= 0 && ix < g.width_cells && !g.occupied(ix, iy)) return ix;
            if (d == 0) break;
        }
    }
    return -1;
}

bool place_endpoints(const OccupancyGrid& placement_grid, int& start_ix, int& start_iy,
                     int& goal_ix, int& goal_iy) {
    start_ix = -1;
    for (int iy = 0; iy < placement_grid.height_cells; ++iy) {
        const int ix = pick_free_cell_in_row(placement_grid, iy);
        if (ix >= 0) {
            start_ix = ix;
            start_iy = iy;
            break;
        }
    }
    if (start_ix < 0) return false;

    goal_ix = -1;
    for (int iy = placement_grid.height_cells - 1; iy >= 0; --iy) {
        const int ix = pick_free_cell_in_row(placement_grid, iy);
        if (ix >= 0) {
            goal_ix = ix;
            goal_iy = iy;
            break;
        }
    }
    return goal_ix >= 0 && !(goal_ix == start_ix && goal_iy == start_iy);
}

bool flood_fill_connected(const OccupancyGrid& g, int sx, int sy, int gx, int gy) {
    if (g.occupied(sx, sy) || g.occupied(gx, gy)) return false;
    std::vector<std::uint8_t> visited(g.cells.size(), 0);
    std::queue<std::pair<int, int>> frontier;
    frontier.push({sx, sy});
    visited[g.index(sx, sy)] = 1;
    while (!frontier.empty()) {
        auto [x, y] = frontier.front();
        frontier.pop();
        if (x == gx && y == gy) return true;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = x + dx;
                const int ny = y + dy;
                if (!g.in_bounds(nx, ny) || g.occupied(nx, ny)) continue;
                if (visited[g.index(nx, ny)]) continue;
                visited[g.index(nx, ny)] = 1;
                frontier.push({nx, ny});
            }
        }
    }
    return false;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, int line_no, const std::string& field) {
    double value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin < end && *begin == ' ') ++begin;
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ParseError("line " + std::to_string(line_no) + ": bad " + field + " value '" +
                         std::string(text) + "'");
    }
    return value;
}

std::uint64_t parse_u64(std::string_view text, int line_no, const std::string& field) {
    std::uint64_t value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin < end && *begin == ' ') ++begin;
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ParseError("line " + std::to_string(line_no) + ": bad " + field + " value '" +
                         std::string(text) + "'");
    }
    return value;
}

std::string_view expect_field(std::string_view line, const std::string& key, int line_no) {
    const std::string prefix = key + ":";
    if (line.substr(0, prefix.size()) != prefix) {
        throw ParseError("line " + std::to_string(line_no) + ": expected '" + key +
                         ":' field, got '" + std::string(line) + "'");
    }
    auto rest = line.substr(prefix.size());
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    return rest;
}

}  // namespace

OccupancyGrid inflate(const OccupancyGrid& grid, double radius) {
    if (radius < 0.0) throw std::invalid_argument("inflate: radius must be >= 0");
    const int reach = static_cast<int>(std::floor(radius / grid.resolution + 1e-9));
    // Offsets whose center-to-center distance is within the radius.
    std::vector<std::pair<int, int>> offsets;
    for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
            if (std::hypot(dx, dy) * grid.resolution <= radius + 1e-12) {
                offsets.push_back({dx, dy});
            }
        }
    }
    OccupancyGrid out = grid;
    for (int iy = 0; iy < grid.height_cells; ++iy) {
        for (int ix = 0; ix < grid.width_cells; ++ix) {
            if (!grid.cells[grid.index(ix, iy)]) continue;
            for (auto [dx, dy] : offsets) {
                const int nx = ix + dx;
                const int ny = iy + dy;
                if (grid.in_bounds(nx, ny)) out.set(nx, ny, true);
            }
        }
    }
    return out;
}

std::vector<Vec2> shortest_path(const OccupancyGrid& grid, const Vec2& start, const Vec2& goal,
                                double* length_out) {
    int sx, sy, gx, gy;
    grid.world_to_cell(start, sx, sy);
    grid.world_to_cell(goal, gx, gy);
    if (grid.occupied(sx, sy)) throw std::invalid_argument("shortest_path: start cell is occupied");
    if (grid.occupied(gx, gy)) throw std::invalid_argument("shortest_path: goal cell is occupied");

    const int n = grid.width_cells * grid.height_cells;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    std::vector<int> parent(n, -1);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;

    const int start_idx = static_cast<int>(grid.index(sx, sy));
    const int goal_idx = static_cast<int>(grid.index(gx, gy));
    dist[start_idx] = 0.0;
    heap.push({0.0, start_idx});

    const double straight = grid.resolution;
    const double diagonal = std::sqrt(2.0) * grid.resolution;

    while (!heap.empty()) {
        auto [d, idx] = heap.top();
        heap.pop();
        if (d > dist[idx]) continue;
        if (idx == goal_idx) break;
        const int x = idx % grid.width_cells;
        const int y = idx / grid.width_cells;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = x + dx;
                const int ny = y + dy;
                if (!grid.in_bounds(nx, ny) || grid.occupied(nx, ny)) continue;
                const int nidx = static_cast<int>(grid.index(nx, ny));
                const double step = (dx != 0 && dy != 0) ? diagonal : straight;
                if (dist[idx] + step < dist[nidx]) {
                    dist[nidx] = dist[idx] + step;
                    parent[nidx] = idx;
                    heap.push({dist[nidx], nidx});
                }
            }
        }
    }

    if (dist[goal_idx] == inf) return {};
    if (length_out) *length_out = dist[goal_idx];

    std::vector<Vec2> path;
    for (int idx = goal_idx; idx != -1; idx = parent[idx]) {
        path.push_back(grid.cell_center(idx % grid.width_cells, idx / grid.width_cells));
    }
    std::reverse(path.begin(), path.end());
    return path;
}

double shortest_path_length(const OccupancyGrid& grid, const Vec2& start, const Vec2& goal) {
    double length = 0.0;
    auto path = shortest_path(grid, start, goal, &length);
    if (path.empty()) throw UnreachableError("shortest_path_length: goal unreachable from start");
    return length;
}

double min_passage_clearance(const WorldSpec& world, double robot_radius) {
    const OccupancyGrid& grid = world.grid;
    std::vector<Vec2> occupied_centers;
    for (int iy = 0; iy < grid.height_cells; ++iy) {
        for (int ix = 0; ix < grid.width_cells; ++ix) {
            if (grid.cells[grid.index(ix, iy)]) {
                occupied_centers.push_back(grid.cell_center(ix, iy));
            }
        }
    }
    if (occupied_centers.empty()) return std::numeric_limits<double>::infinity();

    // Clearance of the widest route: maximize, over start-goal routes the
    // robot can traverse, the minimum distance from a route cell to any
    // occupied cell center (bottleneck / maximin path).  The shortest path
    // may thread tighter pinches; this measures the passage the world forces
    // every route through.
    const OccupancyGrid traversable = inflate(grid, robot_radius);
    int sx, sy, gx, gy;
    traversable.world_to_cell(world.start.position(), sx, sy);
    traversable.world_to_cell(world.goal, gx, gy);
    if (traversable.occupied(sx, sy) || traversable.occupied(gx, gy)) return 0.0;

    const int n = grid.width_cells * grid.height_cells;
    std::vector<double> clearance(static_cast<std::size_t>(n), 0.0);
    for (int iy = 0; iy < grid.height_cells; ++iy) {
        for (int ix = 0; ix < grid.width_cells; ++ix) {
            if (traversable.occupied(ix, iy)) continue;
            const Vec2 p = grid.cell_center(ix, iy);
            double best_sq = std::numeric_limits<double>::infinity();
            for (const Vec2& c : occupied_centers) {
                best_sq = std::min(best_sq, (c - p).norm_sq());
            }
            clearance[grid.index(ix, iy)] = std::sqrt(best_sq);
        }
    }

    std::vector<double> bottleneck(static_cast<std::size_t>(n), 0.0);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry> heap;
    const int start_idx = static_cast<int>(grid.index(sx, sy));
    const int goal_idx = static_cast<int>(grid.index(gx, gy));
    bottleneck[start_idx] = clearance[start_idx];
    heap.push({bottleneck[start_idx], start_idx});
    while (!heap.empty()) {
        auto [b, idx] = heap.top();
        heap.pop();
        if (b < bottleneck[idx]) continue;
        if (idx == goal_idx) break;
        const int x = idx % grid.width_cells;
        const int y = idx / grid.width_cells;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = x + dx;
                const int ny = y + dy;
                if (!traversable.in_bounds(nx, ny) || traversable.occupied(nx, ny)) continue;
                const int nidx = static_cast<int>(grid.index(nx, ny));
                const double via = std::min(b, clearance[nidx]);
                if (via > bottleneck[nidx]) {
                    bottleneck[nidx] = via;
                    heap.push({via, nidx});
                }
            }
        }
    }
    return bottleneck[goal_idx];
}

WorldSpec generate_world(std::uint64_t seed, const CaParams& params) {
    if (!(params.fill_probability > 0.0 && params.fill_probability < 1.0)) {
        throw std::invalid_argument("generate_world: fill_probability must be in (0,1)");
    }
    if (params.resolution <= 0.0) {
        throw std::invalid_argument("generate_world: resolution must be > 0");
    }
    if (params.apron_m < 0.0 || 2.0 * params.apron_m >= params.height_m) {
        throw std::invalid_argument("generate_world: apron_m must be in [0, height/2)");
    }

    for (int attempt = 0; attempt <= params.max_retries; ++attempt) {
        const std::uint64_t effective_seed = seed + static_cast<std::uint64_t>(attempt);
        OccupancyGrid grid = run_cellular_automata(effective_seed, params);

        // Placement uses a slightly wider inflation so start and goal keep a
        // little slack beyond the bare robot radius.
        const OccupancyGrid placement =
            inflate(grid, params.robot_radius + params.clearance_margin);
        int sx, sy, gx, gy;
        if (!place_endpoints(placement, sx, sy, gx, gy)) continue;
        if (!flood_fill_connected(placement, sx, sy, gx, gy)) continue;

        const Vec2 start_pos = grid.cell_center(sx, sy);
        const Vec2 goal_pos = grid.cell_center(gx, gy);
        if (distance(start_pos, goal_pos) < 0.5 * std::min(params.width_m, params.height_m)) {
            continue;
        }

        // Path length (and therefore OT) is measured on the robot-radius
        // inflated grid.
        const OccupancyGrid planning = inflate(grid, params.robot_radius);
        double length = 0.0;
        auto path = shortest_path(planning, start_pos, goal_pos, &length);
        if (path.empty()) continue;

        WorldSpec world;
        world.seed = effective_seed;
        world.id = "barn-" + std::to_string(effective_seed);
        world.grid = std::move(grid);
        world.start = Pose{start_pos.x, start_pos.y,
                           wrap_angle(std::atan2(goal_pos.y - start_pos.y, goal_pos.x - start_pos.x))};
        world.goal = goal_pos;
        world.optimal_path_length = length;

        if (params.min_passage_clearance > 0.0 &&
            min_passage_clearance(world, params.robot_radius) < params.min_passage_clearance) {
            continue;
        }
        return world;
    }
    throw GenerationError("generate_world: no connected world within " +
                          std::to_string(params.max_retries) + " retries (seed " +
                          std::to_string(seed) + ", p=" + format_double(params.fill_probability) +
                          ")");
}

void validate_world(const WorldSpec& world, double robot_radius) {
    const OccupancyGrid planning = inflate(world.grid, robot_radius);
    if (planning.occupied_world(world.start.position())) {
        throw std::invalid_argument("world '" + world.id +
                                    "': start lies in inflated obstacle space");
    }
    if (planning.occupied_world(world.goal)) {
        throw std::invalid_argument("world '" + world.id +
                                    "': goal lies in inflated obstacle space");
    }
    if (shortest_path(planning, world.start.position(), world.goal).empty()) {
        throw UnreachableError("world '" + world.id + "': no free path from start to goal");
    }
}

std::string world_to_string(const WorldSpec& world) {
    std::string out;
    out += "barn-world v1\n";
    out += "seed: " + std::to_string(world.seed) + "\n";
    out += "resolution: " + format_double(world.grid.resolution) + "\n";
    out += "start: " + format_double(world.start.x) + " " + format_double(world.start.y) + " " +
           format_double(world.start.theta) + "\n";
    out += "goal: " + format_double(world.goal.x) + " " + format_double(world.goal.y) + "\n";
    out += "optimal_path_length: " + format_double(world.optimal_path_length) + "\n";
    for (int iy = world.grid.height_cells - 1; iy >= 0; --iy) {  // row 0 = top
        for (int ix = 0; ix < world.grid.width_cells; ++ix) {
            out += world.grid.cells[world.grid.index(ix, iy)] ? '#' : '.';
        }
        out += '\n';
    }
    return out;
}

WorldSpec world_from_string(const std::string& text, const std::string& name) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line)) {
            throw ParseError(name + ": truncated file at line " + std::to_string(line_no + 1));
        }
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    if (next_line() != "barn-world v1") {
        throw ParseError(name + ": line 1: expected header 'barn-world v1'");
    }

    WorldSpec world;
    world.seed = parse_u64(expect_field(next_line(), "seed", line_no), line_no, "seed");
    world.grid.resolution =
        parse_double(expect_field(next_line(), "resolution", line_no), line_no, "resolution");
    if (world.grid.resolution <= 0.0) {
        throw ParseError(name + ": line " + std::to_string(line_no) + ": resolution must be > 0");
    }

    {
        auto rest = expect_field(next_line(), "start", line_no);
        std::istringstream fields{std::string(rest)};
        std::string xs, ys, ts, extra;
        if (!(fields >> xs >> ys >> ts) || (fields >> extra)) {
            throw ParseError(name + ": line " + std::to_string(line_no) +
                             ": start needs exactly 'x y theta'");
        }
        world.start.x = parse_double(xs, line_no, "start.x");
        world.start.y = parse_double(ys, line_no, "start.y");
        world.start.theta = wrap_angle(parse_double(ts, line_no, "start.theta"));
    }
    {
        auto rest = expect_field(next_line(), "goal", line_no);
        std::istringstream fields{std::string(rest)};
        std::string xs, ys, extra;
        if (!(fields >> xs >> ys) || (fields >> extra)) {
            throw ParseError(name + ": line " + std::to_string(line_no) +
                             ": goal needs exactly 'x y'");
        }
        world.goal.x = parse_double(xs, line_no, "goal.x");
        world.goal.y = parse_double(ys, line_no, "goal.y");
    }
    world.optimal_path_length = parse_double(
        expect_field(next_line(), "optimal_path_length", line_no), line_no, "optimal_path_length");

    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!rows.empty() && line.size() != rows.front().size()) {
            throw ParseError(name + ": line " + std::to_string(line_no) + ": row width " +
                             std::to_string(line.size()) + " != " +
                             std::to_string(rows.front().size()));
        }
        for (char c : line) {
            if (c != '.' && c != '#') {
                throw ParseError(name + ": line " + std::to_string(line_no) +
                                 ": invalid cell character '" + std::string(1, c) + "'");
            }
        }
        rows.push_back(line);
    }
    if (rows.empty()) {
        throw ParseError(name + ": truncated file: no grid rows");
    }

    world.grid.width_cells = static_cast<int>(rows.front().size());
    world.grid.height_cells = static_cast<int>(rows.size());
    world.grid.cells.assign(
        static_cast<std::size_t>(world.grid.width_cells) * world.grid.height_cells, 0);
    for (int iy = 0; iy < world.grid.height_cells; ++iy) {
        const std::string& row = rows[world.grid.height_cells - 1 - iy];  // row 0 = top
        for (int ix = 0; ix < world.grid.width_cells; ++ix) {
            world.grid.set(ix, iy, row[ix] == '#');
        }
    }
    world.id = "barn-" + std::to_string(world.seed);
    validate_world(world);
    return world;
}

void save_world(const WorldSpec& world, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_world: cannot open '" + path + "' for writing");
    out << world_to_string(world);
    if (!out) throw std::runtime_error("save_world: write failed for '" + path + "'");
}

WorldSpec load_world(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_world: cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return world_from_string(buffer.str(), path);
}

}  // namespace barn
