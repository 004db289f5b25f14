#include "barn/sim.hpp"

#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "barn/detail/format.hpp"

namespace barn {

Pose step(const Pose& pose, const Twist& cmd, double dt) {
    Pose next = pose;
    if (std::abs(cmd.omega) < 1e-9) {
        next.x += cmd.v * std::cos(pose.theta) * dt;
        next.y += cmd.v * std::sin(pose.theta) * dt;
    } else {
        // Rotate about the instantaneous center of curvature.
        const double radius = cmd.v / cmd.omega;
        next.x += radius * (std::sin(pose.theta + cmd.omega * dt) - std::sin(pose.theta));
        next.y -= radius * (std::cos(pose.theta + cmd.omega * dt) - std::cos(pose.theta));
    }
    next.theta = wrap_angle(pose.theta + cmd.omega * dt);
    return next;
}

bool check_collision(const Pose& pose, const OccupancyGrid& grid, double radius) {
    const double res = grid.resolution;
    int min_ix, min_iy, max_ix, max_iy;
    grid.world_to_cell({pose.x - radius, pose.y - radius}, min_ix, min_iy);
    grid.world_to_cell({pose.x + radius, pose.y + radius}, max_ix, max_iy);
    min_ix = std::max(min_ix, 0);
    min_iy = std::max(min_iy, 0);
    max_ix = std::min(max_ix, grid.width_cells - 1);
    max_iy = std::min(max_iy, grid.height_cells - 1);

    const double radius_sq = radius * radius;
    for (int iy = min_iy; iy <= max_iy; ++iy) {
        for (int ix = min_ix; ix <= max_ix; ++ix) {
            if (!grid.cells[grid.index(ix, iy)]) continue;
            const double cell_min_x = grid.origin.x + ix * res;
            const double cell_min_y = grid.origin.y + iy * res;
            const double dx = std::max({cell_min_x - pose.x, 0.0, pose.x - (cell_min_x + res)});
            const double dy = std::max({cell_min_y - pose.y, 0.0, pose.y - (cell_min_y + res)});
            if (dx * dx + dy * dy < radius_sq) return true;
        }
    }
    return false;
}

const char* to_string(TrialOutcome outcome) {
    switch (outcome) {
        case TrialOutcome::reached: return "reached";
        case TrialOutcome::collision: return "collision";
        case TrialOutcome::timeout: return "timeout";
        case TrialOutcome::stuck: return "stuck";
        case TrialOutcome::planner_error: return "planner_error";
    }
    return "unknown";
}

TrialResult run_trial(const WorldSpec& world, Planner& planner, const RobotParams& robot,
                      const TrialConfig& cfg) {
    TrialResult result;
    planner.reset();

    Pose pose = world.start;
    Twist applied{};  // zero-order hold of the last applied command
    std::deque<std::pair<long, Twist>> pending;
    const long latency_ticks =
        std::max(0L, static_cast<long>(std::ceil(robot.latency / cfg.dt - 1e-9)));
    const long max_ticks = std::lround(cfg.timeout / cfg.dt);
    const long stuck_ticks = std::lround(cfg.stuck_window / cfg.dt);

    std::mt19937_64 noise_rng(cfg.noise_seed);
    std::normal_distribution<double> noise(0.0, cfg.noise_stddev > 0.0 ? cfg.noise_stddev : 1.0);

    std::vector<Vec2> positions;
    positions.reserve(max_ticks + 1);
    positions.push_back(pose.position());

    if (check_collision(pose, world.grid, 0.5 * robot.d_r)) {
        result.outcome = TrialOutcome::collision;
        result.actual_time = cfg.dt;
        result.diagnostic = "start pose in collision";
        return result;
    }

    for (long k = 0; k < max_ticks; ++k) {
        Scan scan = raycast_scan(pose, world.grid, cfg.lidar);
        if (cfg.noise_stddev > 0.0) {
            for (double& r : scan.ranges) {
                r = clamp(r + noise(noise_rng), 0.0, cfg.lidar.max_range);
            }
        }
        const double min_scan = scan.min_range();

        Twist cmd;
        try {
            cmd = planner.tick(scan, pose, world.goal);
        } catch (const std::exception& e) {
            result.outcome = TrialOutcome::planner_error;
            result.actual_time = (k + 1) * cfg.dt;
            result.diagnostic = std::string("planner tick failed: ") + e.what();
            return result;
        }
        cmd.v = clamp(cmd.v, -robot.v_max, robot.v_max);
        cmd.omega = clamp(cmd.omega, -robot.omega_max, robot.omega_max);

        pending.push_back({k + latency_ticks, cmd});
        while (!pending.empty() && pending.front().first <= k) {
            applied = pending.front().second;
            pending.pop_front();
        }

        pose = step(pose, applied, cfg.dt);
        const double t = (k + 1) * cfg.dt;
        result.trajectory.push_back({t, pose, applied, min_scan});
        positions.push_back(pose.position());

        if (check_collision(pose, world.grid, 0.5 * robot.d_r)) {
            result.outcome = TrialOutcome::collision;
            result.actual_time = t;
            return result;
        }
        if (distance(pose.position(), world.goal) <= cfg.goal_tolerance) {
            result.success = true;
            result.outcome = TrialOutcome::reached;
            result.actual_time = t;
            return result;
        }
        if (k + 1 >= stuck_ticks) {
            const double displacement =
                distance(positions[k + 1 - stuck_ticks], positions[k + 1]);
            if (displacement <= cfg.stuck_min_displacement) {
                result.outcome = TrialOutcome::stuck;
                result.actual_time = t;
                return result;
            }
        }
    }

    result.outcome = TrialOutcome::timeout;
    result.actual_time = cfg.timeout;
    return result;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string trial_result_to_json(const TrialResult& result) {
    nlohmann::ordered_json j;
    j["success"] = result.success;
    j["actual_time"] = result.actual_time;
    j["outcome"] = to_string(result.outcome);
    j["diagnostic"] = result.diagnostic;
    j["trajectory"] = nlohmann::ordered_json::array();
    for (const TrajectorySample& s : result.trajectory) {
        j["trajectory"].push_back({s.t, s.pose.x, s.pose.y, s.pose.theta, s.cmd.v, s.cmd.omega,
                                   s.min_scan_range});
    }
    return j.dump();
}

std::string trajectory_to_csv(const std::vector<TrajectorySample>& trajectory) {
    std::string out = "t,x,y,theta,v,omega,min_scan_range\n";
    for (const auto& s : trajectory) {
        out += format_double(s.t) + "," + format_double(s.pose.x) + "," + format_double(s.pose.y) +
               "," + format_double(s.pose.theta) + "," + format_double(s.cmd.v) + "," +
               format_double(s.cmd.omega) + "," + format_double(s.min_scan_range) + "\n";
    }
    return out;
}

void save_trajectory_csv(const std::vector<TrajectorySample>& trajectory,
                         const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_trajectory_csv: cannot open '" + path + "'");
    out << trajectory_to_csv(trajectory);
}

std::vector<TrajectorySample> load_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_trajectory_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("load_trajectory_csv: empty file '" + path + "'");
    }
    std::vector<TrajectorySample> trajectory;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string cell;
        double values[7];
        for (int i = 0; i < 7; ++i) {
            if (!std::getline(fields, cell, ',')) {
                throw std::runtime_error("load_trajectory_csv: line " + std::to_string(line_no) +
                                         ": expected 7 fields");
            }
            if (!cell.empty() && cell.back() == '\r') cell.pop_back();
            values[i] = detail::parse_double(cell);
        }
        trajectory.push_back({values[0],
                              Pose{values[1], values[2], values[3]},
                              Twist{values[4], values[5]},
                              values[6]});
    }
    return trajectory;
}

}  // namespace barn
