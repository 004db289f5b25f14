#ifndef BARN_SIM_HPP_
#define BARN_SIM_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "barn/lidar.hpp"
#include "barn/world.hpp"

namespace barn {

struct RobotParams {
    double d_r{0.5};        // circumscribed diameter, meters
    double v_max{2.0};      // m/s
    double omega_max{2.0};  // rad/s
    double latency{0.0};    // actuation delay, seconds
};

struct Twist {
    double v{0.0};
    double omega{0.0};

    friend bool operator==(const Twist&, const Twist&) = default;
};

/// Exact-arc unicycle integration over one timestep.
Pose step(const Pose& pose, const Twist& cmd, double dt);

/// True iff the nearest point of any occupied cell lies strictly within
/// `radius` of the pose position (circumscribed-circle footprint).
bool check_collision(const Pose& pose, const OccupancyGrid& grid, double radius);

class Planner {
public:
    virtual ~Planner() = default;
    /// Per-world setup run once before any trial on that world (global
    /// paths, workspace bounds). Default: nothing.
    virtual void prepare(const WorldSpec& world) { (void)world; }
    virtual Twist tick(const Scan& scan, const Pose& pose, const Vec2& goal) = 0;
    virtual void reset() {}
};

enum class TrialOutcome { reached, collision, timeout, stuck, planner_error };

const char* to_string(TrialOutcome outcome);

struct TrajectorySample {
    double t{0.0};
    Pose pose;
    Twist cmd;  // command applied during this step
    double min_scan_range{0.0};
};

struct TrialResult {
    bool success{false};
    double actual_time{0.0};  // AT; elapsed-until-failure on failed trials
    TrialOutcome outcome{TrialOutcome::timeout};
    std::vector<TrajectorySample> trajectory;
    std::string diagnostic;
};

struct TrialConfig {
    double dt{0.05};  // 20 Hz control period
    double timeout{100.0};
    double goal_tolerance{0.3};
    double stuck_window{10.0};
    double stuck_min_displacement{0.05};
    LidarSpec lidar{};
    double noise_stddev{0.0};  // seeded Gaussian range noise, off by default
    std::uint64_t noise_seed{0};
};

/// Fixed-timestep trial: scan, planner tick, latency queue, exact-arc step,
/// then collision / goal / stuck / timeout checks.
TrialResult run_trial(const WorldSpec& world, Planner& planner, const RobotParams& robot,
                      const TrialConfig& cfg = TrialConfig{});

/// JSON record mirroring TrialResult (trajectory included).
std::string trial_result_to_json(const TrialResult& result);

std::string trajectory_to_csv(const std::vector<TrajectorySample>& trajectory);
void save_trajectory_csv(const std::vector<TrajectorySample>& trajectory,
                         const std::string& path);
std::vector<TrajectorySample> load_trajectory_csv(const std::string& path);

}  // namespace barn

#endif  // BARN_SIM_HPP_
