#ifndef BARN_DWA_PLANNER_HPP_
#define BARN_DWA_PLANNER_HPP_

#include <vector>

#include "barn/geometry.hpp"
#include "barn/lidar.hpp"
#include "barn/sim.hpp"

namespace barn {

/// Dynamic-window planner configuration. The two shipped presets differ
/// only in the speed cap.
struct DwaConfig {
    double v_cap{2.0};           // sampled speed ceiling, m/s
    double accel_v{2.0};         // m/s^2
    double accel_omega{4.0};     // rad/s^2
    double control_dt{0.05};     // window growth per tick, s
    double horizon{1.5};         // rollout duration, s
    double rollout_dt{0.1};      // rollout integration step, s
    int v_samples{11};
    int omega_samples{21};
    double w_heading{1.0};
    double w_clearance{0.2};
    double w_velocity{0.4};
    double clearance_cap{3.0};   // clearance saturates at the rollout reach, m
    double safety_margin{0.05};  // obstacle inflation beyond the robot radius
    double lookahead{0.5};       // pure-pursuit distance beyond the rollout reach; the
                                 // subgoal sits lookahead + horizon * v along the path
                                 // so a straight cruise never overshoots it
    int obstacle_stride{8};      // scan-point decimation for rollout checks

    /// Throws std::invalid_argument when sample counts drop below 3 or the
    /// horizon cannot fit one integration step.
    void validate() const;

    static DwaConfig slow() {
        DwaConfig cfg;
        cfg.v_cap = 0.5;
        return cfg;
    }
    static DwaConfig fast() {
        DwaConfig cfg;
        cfg.v_cap = 2.0;
        return cfg;
    }
};

/// Velocities reachable from the last command within one control period.
struct VelocityWindow {
    double v_lo{0.0};
    double v_hi{0.0};
    double omega_lo{0.0};
    double omega_hi{0.0};

    bool contains(const Twist& cmd) const {
        return cmd.v >= v_lo && cmd.v <= v_hi && cmd.omega >= omega_lo && cmd.omega <= omega_hi;
    }
};

VelocityWindow dynamic_window(const Twist& last, const DwaConfig& cfg, const RobotParams& robot);

/// Poses after each integration step (the start pose is not included).
std::vector<Pose> rollout(const Pose& start, const Twist& cmd, double horizon, double dt);

/// Smallest center-to-point distance over all rollout poses; +inf when
/// there are no obstacles.
double min_obstacle_distance(const std::vector<Pose>& poses, const std::vector<Vec2>& obstacles);

/// One dynamic-window step: sample the window, roll each sample forward,
/// drop samples whose rollout passes within the inflated radius of a scan
/// point, and return the best of the rest by
/// w_h * heading-to-path-point + w_c * clearance + w_v * v / v_cap
/// (ties prefer the smaller |omega|). Falls back to a rotate-in-place
/// command when every sample collides. Throws std::logic_error when no
/// global path was provided.
Twist dwa_tick(const Scan& scan, const Pose& pose, const Vec2& goal,
               const std::vector<Vec2>& path, const DwaConfig& cfg, const RobotParams& robot,
               const Twist& last_cmd);

class DwaPlanner : public Planner {
public:
    DwaPlanner(const DwaConfig& cfg, const RobotParams& robot);

    /// Global path for the heading term; kept across reset() so one planner
    /// can run repeated trials on the same world.
    void set_path(std::vector<Vec2> path) { path_ = std::move(path); }
    const std::vector<Vec2>& path() const { return path_; }

    /// Plans the global path on the robot-radius-inflated grid.
    void prepare(const WorldSpec& world) override;
    Twist tick(const Scan& scan, const Pose& pose, const Vec2& goal) override;
    void reset() override { last_cmd_ = Twist{}; }

    Twist last_cmd() const { return last_cmd_; }

private:
    DwaConfig cfg_;
    RobotParams robot_;
    std::vector<Vec2> path_;
    Twist last_cmd_{};
};

}  // namespace barn

#endif  // BARN_DWA_PLANNER_HPP_
