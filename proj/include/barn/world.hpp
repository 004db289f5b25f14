#ifndef BARN_WORLD_HPP_
#define BARN_WORLD_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "barn/grid.hpp"

namespace barn {

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnreachableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultRobotRadius = 0.25;

/// Cellular-automata world generation parameters.
struct CaParams {
    double width_m{5.0};
    double height_m{5.0};
    double resolution{0.1};
    double fill_probability{0.35};
    int iterations{4};
    int birth_threshold{5};     // free cell becomes occupied with >= this many occupied neighbors
    int survival_threshold{4};  // occupied cell stays occupied with >= this many occupied neighbors
                                // (4+self = the classic cave rule's 5-of-9 neighborhood)
    bool border_walls{true};
    double apron_m{0.5};            // free strip at the start and goal edges (traverse-the-field entry zones)
    double robot_radius{0.25};      // inflation radius for connectivity and path length
    double clearance_margin{0.05};  // extra inflation when placing start/goal
    double min_passage_clearance{0.0};  // difficulty filter, 0 disables
    int max_retries{16};
};

struct WorldSpec {
    std::string id;
    std::uint64_t seed{0};
    OccupancyGrid grid;
    Pose start;
    Vec2 goal;
    double optimal_path_length{0.0};

    friend bool operator==(const WorldSpec&, const WorldSpec&) = default;
};

/// Generate a connected obstacle world. Pure function of (seed, params):
/// if the CA output fails the connectivity check the seed is incremented
/// and generation retried, up to params.max_retries times.
WorldSpec generate_world(std::uint64_t seed, const CaParams& params = CaParams{});

/// Dilate occupied cells: an output cell is occupied iff some input-occupied
/// cell center lies within `radius` (Euclidean, center-to-center).
OccupancyGrid inflate(const OccupancyGrid& grid, double radius);

/// Length in meters of a shortest 8-connected path (diagonal cost sqrt(2) *
/// resolution) between the cells containing start and goal.
/// Throws UnreachableError if no path exists, std::invalid_argument if either
/// endpoint is occupied.
double shortest_path_length(const OccupancyGrid& grid, const Vec2& start, const Vec2& goal);

/// Same search, returning the path as a polyline of cell centers
/// (start cell first). Empty result means unreachable.
std::vector<Vec2> shortest_path(const OccupancyGrid& grid, const Vec2& start, const Vec2& goal,
                                double* length_out = nullptr);

/// Bottleneck clearance of the widest traversable start-goal route: the
/// best achievable minimum distance from a route cell center to the nearest
/// occupied cell center. 0 when no route exists, +inf for an empty grid.
/// Used as a difficulty indicator.
double min_passage_clearance(const WorldSpec& world, double robot_radius);

/// Throws unless start and goal lie in free space of the robot-radius
/// inflated grid and a free path connects them.
void validate_world(const WorldSpec& world, double robot_radius = kDefaultRobotRadius);

void save_world(const WorldSpec& world, const std::string& path);
WorldSpec load_world(const std::string& path);

std::string world_to_string(const WorldSpec& world);
WorldSpec world_from_string(const std::string& text, const std::string& name = "<string>");

}  // namespace barn

#endif  // BARN_WORLD_HPP_
