#include "barn/gap_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace barn {

namespace {

constexpr double kTinyLength = 1e-12;

double point_segment_distance_sq(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len_sq = ab.norm_sq();
    if (len_sq <= 0.0) return (p - a).norm_sq();
    const double t = clamp((p - a).dot(ab) / len_sq, 0.0, 1.0);
    return (p - (a + ab * t)).norm_sq();
}

/// Sweep core shared by both extraction passes. `starts` are indices (in the
/// given point order) where a gap opens; each gap closes at the closest
/// strictly-later point, and the sweep resumes after that point.
std::vector<Gap> sweep_gaps(const std::vector<Vec2>& points, const std::vector<int>& starts,
                            double robot_diameter) {
    std::vector<Gap> gaps;
    const int n = static_cast<int>(points.size());
    int resume = 0;
    for (int i : starts) {
        if (i < resume || i + 1 >= n) continue;
        int best_j = i + 1;
        double best_sq = (points[i] - points[i + 1]).norm_sq();
        for (int j = i + 2; j < n; ++j) {
            const double d_sq = (points[i] - points[j]).norm_sq();
            if (d_sq < best_sq) {
                best_sq = d_sq;
                best_j = j;
            }
        }
        const Gap gap{points[i], points[best_j]};
        if (gap.width() > robot_diameter) gaps.push_back(gap);
        resume = best_j + 1;
    }
    return gaps;
}

Vec2 drive_through_point(const Gap& gap, const Vec2& robot, double offset) {
    const Vec2 mid = gap.midpoint();
    Vec2 u = mid - robot;
    const double d = u.norm();
    u = d > kTinyLength ? u * (1.0 / d) : Vec2{1.0, 0.0};
    const Vec2 line = gap.b - gap.a;
    const double len = line.norm();
    if (len <= kTinyLength) return mid + u * offset;
    Vec2 n{-line.y / len, line.x / len};
    const double side = n.dot(u);
    if (std::abs(side) < 1e-9) return mid + u * offset;  // robot sits on the gap line
    if (side < 0.0) n = n * -1.0;
    return mid + n * offset;
}

}  // namespace

void GapPlannerConfig::validate() const {
    if (!(k_turn > 0.0)) throw std::invalid_argument("gap planner: k_turn must be positive");
    if (!(k_vel > 0.0) || k_vel > 1.0) {
        throw std::invalid_argument("gap planner: k_vel must be in (0, 1]");
    }
    if (alpha < 0.0 || alpha > 1.0) {
        throw std::invalid_argument("gap planner: alpha must be in [0, 1]");
    }
    if (!(robot_diameter > 0.0) || !(max_range > 0.0) || !(region_length > 0.0)) {
        throw std::invalid_argument("gap planner: geometry parameters must be positive");
    }
    if (epsilon_dedup < 0.0 || safety_margin < 0.0 || region_margin < 0.0 ||
        gap_goal_offset < 0.0 || goal_tolerance < 0.0) {
        throw std::invalid_argument("gap planner: distances must be non-negative");
    }
}

ScanPoints scan_to_points(const Scan& scan) {
    ScanPoints out;
    const int n = scan.spec.beam_count;
    out.points.reserve(n);
    out.at_max_range.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double angle = scan.pose.theta + scan.spec.beam_angle(k);
        out.points.push_back(scan.pose.position() + unit_vector(angle) * scan.ranges[k]);
        out.at_max_range.push_back(scan.is_max_range(k) ? 1 : 0);
    }
    return out;
}

std::vector<Discontinuity> detect_discontinuities(const ScanPoints& pts,
                                                  const std::vector<double>& ranges,
                                                  double robot_diameter, double max_range) {
    (void)max_range;  // encoded in the per-beam flags
    std::vector<Discontinuity> out;
    const int n = static_cast<int>(pts.points.size());
    for (int i = 0; i + 1 < n; ++i) {
        const bool max_i = pts.at_max_range[i] != 0;
        const bool max_j = pts.at_max_range[i + 1] != 0;
        DiscontinuityKind kind;
        if (max_i != max_j) {
            kind = DiscontinuityKind::type2;
        } else if (distance(pts.points[i], pts.points[i + 1]) > robot_diameter) {
            kind = DiscontinuityKind::type1;
        } else {
            continue;
        }
        const DiscontinuityDirection dir = ranges[i + 1] > ranges[i]
                                               ? DiscontinuityDirection::rising
                                               : DiscontinuityDirection::falling;
        out.push_back({i, kind, dir, pts.points[i]});
    }
    return out;
}

std::vector<Gap> extract_gaps_forward(const ScanPoints& pts,
                                      const std::vector<Discontinuity>& discs,
                                      double robot_diameter) {
    std::vector<int> starts;
    for (const Discontinuity& d : discs) {
        if (d.direction == DiscontinuityDirection::rising) starts.push_back(d.index);
    }
    return sweep_gaps(pts.points, starts, robot_diameter);
}

std::vector<Gap> extract_gaps_backward(const ScanPoints& pts,
                                       const std::vector<Discontinuity>& discs,
                                       double robot_diameter) {
    const int n = static_cast<int>(pts.points.size());
    std::vector<Vec2> reversed(pts.points.rbegin(), pts.points.rend());
    // A falling pair (i, i+1) opens a gap at its near point p_{i+1}; in the
    // reversed order that is index n - 2 - i.
    std::vector<int> starts;
    for (const Discontinuity& d : discs) {
        if (d.direction == DiscontinuityDirection::falling) starts.push_back(n - 2 - d.index);
    }
    std::sort(starts.begin(), starts.end());
    return sweep_gaps(reversed, starts, robot_diameter);
}

bool is_admissible(const Vec2& a, const Vec2& b, const std::vector<Vec2>& obstacles,
                   double clearance) {
    const double clear_sq = clearance * clearance;
    for (const Vec2& p : obstacles) {
        if (point_segment_distance_sq(p, a, b) < clear_sq) return false;
    }
    return true;
}

int GapTree::update(const std::vector<Gap>& gaps) {
    int added = 0;
    for (const Gap& gap : gaps) {
        const Vec2 mid = gap.midpoint();
        double nearest_dist = 0.0;
        if (index_.nearest(mid, &nearest_dist) >= 0 && nearest_dist <= cfg_.epsilon_dedup) {
            continue;
        }
        const int id = static_cast<int>(entries_.size());
        entries_.push_back(Gap{gap.a, gap.b, false});
        index_.insert(mid, id);
        ++added;
    }
    return added;
}

int GapTree::nearest_unvisited(const Vec2& query,
                               const std::vector<std::uint8_t>& removed) const {
    return index_.nearest(query, nullptr, [&](int id) {
        return !entries_[static_cast<std::size_t>(id)].visited &&
               !removed[static_cast<std::size_t>(id)];
    });
}

std::vector<int> GapTree::unvisited_in_box(const Vec2& lo, const Vec2& hi,
                                           const std::vector<std::uint8_t>& removed) const {
    std::vector<int> ids = index_.query_box(lo, hi);
    std::erase_if(ids, [&](int id) {
        return entries_[static_cast<std::size_t>(id)].visited ||
               removed[static_cast<std::size_t>(id)];
    });
    return ids;
}

GapGoalResult find_gap_goal(const GapTree& tree, const Vec2& robot, const Vec2& goal,
                            const std::vector<Vec2>& obstacles, const GapPlannerConfig& cfg) {
    const double clearance = 0.5 * cfg.robot_diameter + cfg.safety_margin;
    if (is_admissible(robot, goal, obstacles, clearance)) {
        throw std::logic_error("find_gap_goal: goal is already admissible from the robot");
    }

    const auto& entries = tree.entries();
    std::vector<std::uint8_t> removed(entries.size(), 0);
    GapGoalResult res;
    int selected = -1;

    auto reachable = [&](int idx) {
        return is_admissible(robot, entries[static_cast<std::size_t>(idx)].midpoint(),
                             obstacles, clearance);
    };

    while (selected < 0 || !reachable(selected)) {
        const int pick = tree.nearest_unvisited(goal, removed);
        if (pick < 0) {
            selected = -1;
            break;
        }
        ++res.iterations;
        removed[static_cast<std::size_t>(pick)] = 1;
        selected = pick;

        // Gaps lying between the robot and the pick can take over when the
        // robot can reach them and they chain on toward the pick. Try the
        // one deepest along the way first.
        const Vec2 pick_mid = entries[static_cast<std::size_t>(pick)].midpoint();
        const Vec2 lo{std::min(robot.x, pick_mid.x) - cfg.robot_diameter,
                      std::min(robot.y, pick_mid.y) - cfg.robot_diameter};
        const Vec2 hi{std::max(robot.x, pick_mid.x) + cfg.robot_diameter,
                      std::max(robot.y, pick_mid.y) + cfg.robot_diameter};
        std::vector<int> between = tree.unvisited_in_box(lo, hi, removed);
        std::sort(between.begin(), between.end(), [&](int lhs, int rhs) {
            const double dl = (entries[static_cast<std::size_t>(lhs)].midpoint() - robot).norm_sq();
            const double dr = (entries[static_cast<std::size_t>(rhs)].midpoint() - robot).norm_sq();
            if (dl != dr) return dl > dr;
            return lhs < rhs;
        });
        for (int candidate : between) {
            const Vec2 mid = entries[static_cast<std::size_t>(candidate)].midpoint();
            if (reachable(candidate) && is_admissible(mid, pick_mid, obstacles, clearance)) {
                selected = candidate;
                break;
            }
        }
    }

    if (selected >= 0) {
        res.gap = entries[static_cast<std::size_t>(selected)];
        res.entry_index = selected;
    }
    return res;
}

LocalPlan local_plan(const Scan& scan, const ScanPoints& pts, const Pose& pose,
                     const Vec2& target, const GapPlannerConfig& cfg) {
    LocalPlan out;
    const Vec2 robot = pose.position();
    const Vec2 to_target = target - robot;
    const double dist = to_target.norm();
    const double theta_g = dist > kTinyLength ? std::atan2(to_target.y, to_target.x) : pose.theta;
    const double length = std::min(dist, cfg.region_length);
    const double half_width = 0.5 * cfg.robot_diameter + cfg.region_margin;
    const Vec2 u = dist > kTinyLength ? to_target * (1.0 / dist) : unit_vector(pose.theta);
    const Vec2 side{-u.y, u.x};

    // Nearest obstacle inside the corridor swept toward the target.
    double best_sq = std::numeric_limits<double>::infinity();
    Vec2 best_point{};
    for (std::size_t i = 0; i < pts.points.size(); ++i) {
        if (pts.at_max_range[i]) continue;
        const Vec2 rel = pts.points[i] - robot;
        const double along = rel.dot(u);
        if (along < 0.0 || along > length) continue;
        if (std::abs(rel.dot(side)) > half_width) continue;
        const double d_sq = rel.norm_sq();
        if (d_sq < best_sq) {
            best_sq = d_sq;
            best_point = pts.points[i];
        }
    }

    if (!std::isfinite(best_sq)) {
        out.local_goal = robot + u * length;
        out.theta_des = theta_g;
        return out;
    }

    out.obstructed = true;
    out.nearest_obstacle = best_point;
    const double obstacle_dist = std::sqrt(best_sq);
    const double theta_o = std::atan2(best_point.y - robot.y, best_point.x - robot.x);
    const double diff = wrap_angle(theta_g - theta_o);
    double theta_des;
    if (std::abs(diff) < 1e-9) {
        // Obstacle dead on the target bearing: reflection is degenerate, so
        // swerve toward whichever side of the corridor looks more open.
        double sum[2] = {0.0, 0.0};  // right, left
        int count[2] = {0, 0};
        for (int k = 0; k < scan.spec.beam_count; ++k) {
            const double bearing = pose.theta + scan.spec.beam_angle(k);
            const double rel = wrap_angle(bearing - theta_g);
            if (std::abs(rel) > 0.5 * M_PI) continue;
            const int bucket = rel > 0.0 ? 1 : 0;
            sum[bucket] += scan.ranges[static_cast<std::size_t>(k)];
            ++count[bucket];
        }
        const double right_avg = count[0] > 0 ? sum[0] / count[0] : 0.0;
        const double left_avg = count[1] > 0 ? sum[1] / count[1] : 0.0;
        const double ratio = clamp(half_width / std::max(obstacle_dist, half_width), 0.0, 1.0);
        const double swerve = std::asin(ratio);
        theta_des = theta_g + (left_avg >= right_avg ? swerve : -swerve);
    } else {
        theta_des = theta_g + diff;  // reflect the heading off the obstacle bearing
    }
    out.theta_des = wrap_angle(theta_des);
    out.local_goal = robot + unit_vector(out.theta_des) * obstacle_dist;
    return out;
}

Twist gap_control(double theta_des, const Pose& pose, const GapPlannerConfig& cfg,
                  const RobotParams& robot) {
    const double delta = wrap_angle(theta_des - pose.theta);
    const double omega = clamp(cfg.k_turn * delta, -robot.omega_max, robot.omega_max);
    double v = cfg.k_vel * robot.v_max * (1.0 - cfg.alpha * std::abs(omega) / robot.omega_max);
    if (v < 0.0) v = 0.0;
    return {v, omega};
}

GapPlanner::GapPlanner(const GapPlannerConfig& cfg, const RobotParams& robot)
    : cfg_(cfg), robot_(robot) {
    cfg_.validate();
    reset();
}

void GapPlanner::prepare(const WorldSpec& world) {
    cfg_.world_min = world.grid.origin;
    cfg_.world_max = world.grid.origin + Vec2{world.grid.width_m(), world.grid.height_m()};
    reset();
}

void GapPlanner::reset() {
    tree_.emplace(cfg_);
    memory_points_.clear();
    memory_keys_.clear();
    active_entry_ = -1;
    last_target_.reset();
    tick_index_ = 0;
}

void GapPlanner::remember_points(const ScanPoints& pts) {
    // 5 cm dedup lattice keeps the memory bounded by the world area.
    constexpr double kCell = 0.05;
    for (std::size_t i = 0; i < pts.points.size(); ++i) {
        if (pts.at_max_range[i]) continue;
        const Vec2& p = pts.points[i];
        const auto qx = static_cast<std::int64_t>(std::floor(p.x / kCell));
        const auto qy = static_cast<std::int64_t>(std::floor(p.y / kCell));
        const std::int64_t key = (qx << 32) ^ (qy & 0xffffffff);
        const auto it = std::lower_bound(memory_keys_.begin(), memory_keys_.end(), key);
        if (it != memory_keys_.end() && *it == key) continue;
        memory_keys_.insert(it, key);
        memory_points_.push_back(p);
    }
}

Twist GapPlanner::tick(const Scan& scan, const Pose& pose, const Vec2& goal) {
    const Vec2 robot = pose.position();
    const ScanPoints pts = scan_to_points(scan);

    std::vector<Vec2> obstacles;
    obstacles.reserve(pts.points.size());
    for (std::size_t i = 0; i < pts.points.size(); ++i) {
        if (!pts.at_max_range[i]) obstacles.push_back(pts.points[i]);
    }
    if (cfg_.point_memory) {
        remember_points(pts);
        obstacles = memory_points_;
    }

    const auto discs = detect_discontinuities(pts, scan.ranges, cfg_.robot_diameter,
                                              scan.spec.max_range);
    std::vector<Gap> gaps = extract_gaps_forward(pts, discs, cfg_.robot_diameter);
    const std::vector<Gap> backward = extract_gaps_backward(pts, discs, cfg_.robot_diameter);
    gaps.insert(gaps.end(), backward.begin(), backward.end());
    tree_->update(gaps);

    if (active_entry_ >= 0 &&
        distance(robot, tree_->entries()[static_cast<std::size_t>(active_entry_)].midpoint()) <=
            cfg_.goal_tolerance) {
        tree_->mark_visited(active_entry_);
        active_entry_ = -1;
    }

    const double clearance = 0.5 * cfg_.robot_diameter + cfg_.safety_margin;
    std::optional<Vec2> target;
    if (is_admissible(robot, goal, obstacles, clearance)) {
        target = goal;
        active_entry_ = -1;
    } else {
        const GapGoalResult res = find_gap_goal(*tree_, robot, goal, obstacles, cfg_);
        if (res.gap) {
            active_entry_ = res.entry_index;
            target = drive_through_point(*res.gap, robot, cfg_.gap_goal_offset);
        }
    }

    Twist cmd;
    std::optional<double> theta_des;
    if (target) {
        const LocalPlan plan = local_plan(scan, pts, pose, *target, cfg_);
        theta_des = plan.theta_des;
        cmd = gap_control(plan.theta_des, pose, cfg_, robot_);
        last_target_ = target;
    } else {
        cmd = {0.0, 0.5 * robot_.omega_max};  // rotate until a gap opens up
        last_target_.reset();
    }

    if (debug_) {
        nlohmann::ordered_json line;
        line["tick"] = tick_index_;
        line["pose"] = {pose.x, pose.y, pose.theta};
        line["new_gaps"] = nlohmann::ordered_json::array();
        for (const Gap& g : gaps) line["new_gaps"].push_back({g.a.x, g.a.y, g.b.x, g.b.y});
        line["tree_size"] = tree_->size();
        if (target) {
            line["target"] = {target->x, target->y};
        } else {
            line["target"] = nullptr;
        }
        if (theta_des) {
            line["theta_des"] = *theta_des;
        } else {
            line["theta_des"] = nullptr;
        }
        line["cmd"] = {cmd.v, cmd.omega};
        *debug_ << line.dump() << '\n';
    }

    ++tick_index_;
    return cmd;
}

}  // namespace barn
