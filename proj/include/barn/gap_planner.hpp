#ifndef BARN_GAP_PLANNER_HPP_
#define BARN_GAP_PLANNER_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "barn/geometry.hpp"
#include "barn/lidar.hpp"
#include "barn/quadtree.hpp"
#include "barn/sim.hpp"

namespace barn {

/// Scan converted to world-frame points, one per beam, ordered by beam index.
struct ScanPoints {
    std::vector<Vec2> points;
    std::vector<std::uint8_t> at_max_range;  // 1 when the beam returned nothing
};

ScanPoints scan_to_points(const Scan& scan);

enum class DiscontinuityKind { type1, type2 };
enum class DiscontinuityDirection { rising, falling };

/// Discontinuity between adjacent beams (index, index + 1).
struct Discontinuity {
    int index{0};
    DiscontinuityKind kind{DiscontinuityKind::type1};
    DiscontinuityDirection direction{DiscontinuityDirection::rising};
    Vec2 point;  // scan point at `index`
};

/// Type 1: adjacent points further apart than the robot diameter.
/// Type 2: exactly one of the two beams is at max range (dominates Type 1).
/// Rising when the range increases from beam i to beam i + 1.
std::vector<Discontinuity> detect_discontinuities(const ScanPoints& pts,
                                                  const std::vector<double>& ranges,
                                                  double robot_diameter, double max_range);

/// Traversable opening between two scan points.
struct Gap {
    Vec2 a;
    Vec2 b;
    bool visited{false};

    Vec2 midpoint() const { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }
    double width() const { return distance(a, b); }
};

/// Sweep in beam order: at each rising discontinuity the gap starts at that
/// point and ends at the closest later point; the sweep resumes past the end
/// point. Gaps no wider than the robot diameter are dropped.
std::vector<Gap> extract_gaps_forward(const ScanPoints& pts,
                                      const std::vector<Discontinuity>& discs,
                                      double robot_diameter);

/// Mirror image of the forward pass: runs over falling discontinuities in
/// reverse beam order, pairing each with the closest earlier point.
std::vector<Gap> extract_gaps_backward(const ScanPoints& pts,
                                       const std::vector<Discontinuity>& discs,
                                       double robot_diameter);

struct GapPlannerConfig {
    double k_turn{2.5};           // heading gain
    double k_vel{1.0};            // speed gain
    double alpha{0.9};            // speed cut per unit of normalized turn rate
    double robot_diameter{0.5};
    double max_range{10.0};
    double epsilon_dedup{0.25};   // midpoints closer than this are one gap
    double safety_margin{0.05};   // extra clearance on top of the robot radius
    double region_margin{0.05};   // widens the local corridor check
    double gap_goal_offset{0.25}; // drive-through point sits past the gap line
    double goal_tolerance{0.3};   // proximity that marks a gap visited
    double region_length{10.0};   // corridor length cap
    Vec2 world_min{0.0, 0.0};
    Vec2 world_max{5.0, 5.0};
    int quadtree_capacity{8};
    int quadtree_max_depth{10};
    bool point_memory{false};     // accumulate obstacle points across ticks

    /// Throws std::invalid_argument when a gain leaves its legal range
    /// (k_turn > 0, k_vel in (0, 1], alpha in [0, 1], positive geometry).
    void validate() const;
};

/// Straight segment a-b keeps at least `clearance` to every obstacle point.
bool is_admissible(const Vec2& a, const Vec2& b, const std::vector<Vec2>& obstacles,
                   double clearance);

/// Persistent gap memory: deduplicates by midpoint distance and remembers
/// which gaps were already driven through.
class GapTree {
public:
    explicit GapTree(const GapPlannerConfig& cfg)
        : cfg_(cfg), index_(cfg.world_min, cfg.world_max, cfg.quadtree_capacity,
                            cfg.quadtree_max_depth) {}

    /// Inserts gaps whose midpoint is not within epsilon_dedup of a stored
    /// one. Returns how many were added.
    int update(const std::vector<Gap>& gaps);

    std::size_t size() const { return entries_.size(); }
    const std::vector<Gap>& entries() const { return entries_; }
    void mark_visited(int idx) { entries_.at(static_cast<std::size_t>(idx)).visited = true; }

    /// Index of the unvisited entry with midpoint nearest to `query`
    /// excluding ids in `removed`, or -1.
    int nearest_unvisited(const Vec2& query, const std::vector<std::uint8_t>& removed) const;

    /// Unvisited entries (minus `removed`) whose midpoint falls in the box.
    std::vector<int> unvisited_in_box(const Vec2& lo, const Vec2& hi,
                                      const std::vector<std::uint8_t>& removed) const;

private:
    GapPlannerConfig cfg_;
    std::vector<Gap> entries_;
    PointQuadtree index_;
};

struct GapGoalResult {
    std::optional<Gap> gap;  // empty when every candidate was rejected
    int entry_index{-1};
    int iterations{0};
};

/// Best-first search over the gap tree for a gap that is reachable on a
/// straight line from `robot` while heading toward `goal`. Candidates are
/// tried closest-to-goal first; gaps between the robot and the current
/// candidate may take over when they chain toward it. Throws
/// std::logic_error if the goal itself is already admissible.
GapGoalResult find_gap_goal(const GapTree& tree, const Vec2& robot, const Vec2& goal,
                            const std::vector<Vec2>& obstacles, const GapPlannerConfig& cfg);

struct LocalPlan {
    Vec2 local_goal;
    double theta_des{0.0};
    bool obstructed{false};   // corridor toward the target held an obstacle
    Vec2 nearest_obstacle;    // valid when obstructed
};

/// Checks the corridor from the robot toward `target`; when an obstacle sits
/// inside, reflects the heading away from it and aims at a same-distance
/// local goal instead.
LocalPlan local_plan(const Scan& scan, const ScanPoints& pts, const Pose& pose,
                     const Vec2& target, const GapPlannerConfig& cfg);

/// Proportional heading controller; speed drops with commanded turn rate.
Twist gap_control(double theta_des, const Pose& pose, const GapPlannerConfig& cfg,
                  const RobotParams& robot);

/// Follow-the-gap planner: builds gaps from each scan, keeps them in a
/// persistent tree, picks a reachable gap leading toward the goal, and
/// steers through it; rotates in place when nothing is reachable.
class GapPlanner : public Planner {
public:
    GapPlanner(const GapPlannerConfig& cfg, const RobotParams& robot);

    /// Adopts the world extent as the gap-tree bounds and clears state.
    void prepare(const WorldSpec& world) override;
    Twist tick(const Scan& scan, const Pose& pose, const Vec2& goal) override;
    void reset() override;

    /// Optional JSONL sink receiving one line per tick with the detected
    /// gaps, the chosen target, and the commanded heading.
    void set_debug_sink(std::ostream* sink) { debug_ = sink; }

    const GapTree& tree() const { return *tree_; }
    std::optional<Vec2> last_target() const { return last_target_; }

private:
    GapPlannerConfig cfg_;
    RobotParams robot_;
    std::optional<GapTree> tree_;
    std::vector<Vec2> memory_points_;
    std::vector<std::int64_t> memory_keys_;  // sorted quantized cells, dedup
    int active_entry_{-1};
    std::optional<Vec2> last_target_;
    std::ostream* debug_{nullptr};
    std::int64_t tick_index_{0};

    void remember_points(const ScanPoints& pts);
};

}  // namespace barn

#endif  // BARN_GAP_PLANNER_HPP_
