#include "barn/dwa_planner.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace barn {

void DwaConfig::validate() const {
    if (v_samples < 3 || omega_samples < 3) {
        throw std::invalid_argument("dwa: sample counts must be at least 3");
    }
    if (!(rollout_dt > 0.0) || !(horizon > rollout_dt)) {
        throw std::invalid_argument("dwa: horizon must exceed the rollout step");
    }
    if (!(v_cap > 0.0) || !(control_dt > 0.0)) {
        throw std::invalid_argument("dwa: v_cap and control_dt must be positive");
    }
    if (obstacle_stride < 1) {
        throw std::invalid_argument("dwa: obstacle stride must be at least 1");
    }
}

VelocityWindow dynamic_window(const Twist& last, const DwaConfig& cfg,
                              const RobotParams& robot) {
    VelocityWindow w;
    w.v_lo = std::max(0.0, last.v - cfg.accel_v * cfg.control_dt);
    w.v_hi = std::min(cfg.v_cap, last.v + cfg.accel_v * cfg.control_dt);
    w.omega_lo = std::max(-robot.omega_max, last.omega - cfg.accel_omega * cfg.control_dt);
    w.omega_hi = std::min(robot.omega_max, last.omega + cfg.accel_omega * cfg.control_dt);
    return w;
}

std::vector<Pose> rollout(const Pose& start, const Twist& cmd, double horizon, double dt) {
    const int steps = std::max(1, static_cast<int>(std::lround(horizon / dt)));
    std::vector<Pose> poses;
    poses.reserve(static_cast<std::size_t>(steps));
    Pose pose = start;
    for (int i = 0; i < steps; ++i) {
        pose = step(pose, cmd, dt);
        poses.push_back(pose);
    }
    return poses;
}

double min_obstacle_distance(const std::vector<Pose>& poses,
                             const std::vector<Vec2>& obstacles) {
    double best_sq = std::numeric_limits<double>::infinity();
    for (const Pose& pose : poses) {
        const Vec2 p = pose.position();
        for (const Vec2& obs : obstacles) {
            best_sq = std::min(best_sq, (obs - p).norm_sq());
        }
    }
    return std::sqrt(best_sq);
}

namespace {

bool segment_keeps_clearance(const Vec2& a, const Vec2& b, const std::vector<Vec2>& points,
                             double clearance) {
    const Vec2 ab = b - a;
    const double len_sq = ab.norm_sq();
    const double clear_sq = clearance * clearance;
    for (const Vec2& p : points) {
        const Vec2 ap = p - a;
        const double t = len_sq > 0.0 ? clamp(ap.dot(ab) / len_sq, 0.0, 1.0) : 0.0;
        if ((ap - ab * t).norm_sq() < clear_sq) return false;
    }
    return true;
}

// Farthest path vertex within the lookahead arc whose straight segment from
// the robot keeps the obstacle clearance.  A bare pure-pursuit point can sit
// across a blocked corner pocket; aligning the heading term to it would then
// reward commands that cannot move.
Vec2 select_subgoal(const std::vector<Vec2>& path, const Pose& pose, double lookahead,
                    const std::vector<Vec2>& obstacles, double clearance) {
    const Vec2 robot = pose.position();
    std::size_t nearest = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < path.size(); ++i) {
        const double d_sq = (path[i] - robot).norm_sq();
        if (d_sq < best_sq) {
            best_sq = d_sq;
            nearest = i;
        }
    }
    if (nearest + 1 >= path.size()) return path.back();

    Vec2 best = path[nearest + 1];
    double arc = 0.0;
    for (std::size_t i = nearest + 1; i < path.size(); ++i) {
        arc += distance(path[i - 1], path[i]);
        if (segment_keeps_clearance(robot, path[i], obstacles, clearance)) best = path[i];
        if (arc >= lookahead) break;
    }
    return best;
}

}  // namespace

Twist dwa_tick(const Scan& scan, const Pose& pose, const Vec2& goal,
               const std::vector<Vec2>& path, const DwaConfig& cfg, const RobotParams& robot,
               const Twist& last_cmd) {
    cfg.validate();
    if (path.empty()) {
        throw std::logic_error("dwa_tick: global path not set");
    }

    std::vector<Vec2> obstacles;
    obstacles.reserve(static_cast<std::size_t>(scan.spec.beam_count / cfg.obstacle_stride) + 1);
    for (int k = 0; k < scan.spec.beam_count; k += cfg.obstacle_stride) {
        if (scan.is_max_range(k)) continue;
        const double angle = scan.pose.theta + scan.spec.beam_angle(k);
        obstacles.push_back(scan.pose.position() +
                            unit_vector(angle) * scan.ranges[static_cast<std::size_t>(k)]);
    }

    // Keep the subgoal beyond the straight-cruise rollout reach: if the
    // lookahead were inside it, the rollout end would overshoot the subgoal
    // and the heading term would punish exactly the fast commands the
    // velocity term is meant to reward.
    const double lookahead = cfg.lookahead + cfg.horizon * last_cmd.v;
    Vec2 subgoal = select_subgoal(path, pose, lookahead, obstacles,
                                  0.5 * robot.d_r + cfg.safety_margin);
    if (distance(subgoal, pose.position()) < 1e-9) subgoal = goal;

    const VelocityWindow window = dynamic_window(last_cmd, cfg, robot);
    const double inflation = 0.5 * robot.d_r + cfg.safety_margin;

    bool found = false;
    Twist best_cmd;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int vi = 0; vi < cfg.v_samples; ++vi) {
        const double v =
            window.v_lo + (window.v_hi - window.v_lo) * vi / (cfg.v_samples - 1);
        for (int wi = 0; wi < cfg.omega_samples; ++wi) {
            const double omega = window.omega_lo +
                                 (window.omega_hi - window.omega_lo) * wi /
                                     (cfg.omega_samples - 1);
            const Twist cmd{v, omega};
            const std::vector<Pose> poses = rollout(pose, cmd, cfg.horizon, cfg.rollout_dt);
            const double min_dist = min_obstacle_distance(poses, obstacles);
            if (min_dist < inflation) continue;

            const Pose& end = poses.back();
            double heading = 1.0;
            const Vec2 to_subgoal = subgoal - end.position();
            if (to_subgoal.norm_sq() > 1e-18) {
                const double bearing = std::atan2(to_subgoal.y, to_subgoal.x);
                heading = 1.0 - std::abs(wrap_angle(bearing - end.theta)) / M_PI;
            }
            const double clearance =
                clamp((min_dist - inflation) / cfg.clearance_cap, 0.0, 1.0);
            const double velocity = v / cfg.v_cap;
            const double score =
                cfg.w_heading * heading + cfg.w_clearance * clearance + cfg.w_velocity * velocity;
            if (!found || score > best_score ||
                (score == best_score && std::abs(omega) < std::abs(best_cmd.omega))) {
                found = true;
                best_score = score;
                best_cmd = cmd;
            }
        }
    }

    if (!found) {
        return {0.0, 0.5 * robot.omega_max};  // every rollout collided
    }
    return best_cmd;
}

DwaPlanner::DwaPlanner(const DwaConfig& cfg, const RobotParams& robot)
    : cfg_(cfg), robot_(robot) {
    cfg_.validate();
}

void DwaPlanner::prepare(const WorldSpec& world) {
    // Plan with the inflation the rollout filter enforces plus half a cell
    // diagonal: grid inflation measures center-to-center while scan returns
    // lie on cell faces, so without the slack Dijkstra routes through
    // pinches the local planner is forbidden to enter.  The slack can swallow
    // an endpoint or disconnect the free space; fall back to the bare filter
    // inflation in that case rather than refusing a world the rollout filter
    // could still traverse.
    const double filter = 0.5 * robot_.d_r + cfg_.safety_margin;
    const double quantization = 0.5 * std::sqrt(2.0) * world.grid.resolution;
    path_.clear();
    try {
        path_ = shortest_path(inflate(world.grid, filter + quantization),
                              world.start.position(), world.goal);
    } catch (const std::invalid_argument&) {
    }
    if (path_.empty()) {
        path_ = shortest_path(inflate(world.grid, filter),
                              world.start.position(), world.goal);
    }
    last_cmd_ = Twist{};
}

Twist DwaPlanner::tick(const Scan& scan, const Pose& pose, const Vec2& goal) {
    const Twist cmd = dwa_tick(scan, pose, goal, path_, cfg_, robot_, last_cmd_);
    last_cmd_ = cmd;
    return cmd;
}

}  // namespace barn
