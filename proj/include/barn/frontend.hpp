#ifndef BARN_FRONTEND_HPP_
#define BARN_FRONTEND_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "barn/lidar.hpp"
#include "barn/sim.hpp"

namespace barn {

inline constexpr int kLidarMapSize = 80;
inline constexpr int kHistoryDepth = 10;  // 0.5 s of scans at 20 Hz
inline constexpr int kWindowsPerScan = kLidarMapSize * kLidarMapSize / kHistoryDepth;  // 640
inline constexpr int kRowsPerScan = kLidarMapSize / kHistoryDepth;                     // 8

/// Ring buffer of the most recent scans, ordered oldest to newest.
class ScanHistory {
public:
    void push(const Scan& scan) {
        if (scans_.size() == kHistoryDepth) scans_.erase(scans_.begin());
        scans_.push_back(scan);
    }

    std::size_t size() const { return scans_.size(); }
    bool empty() const { return scans_.empty(); }
    const Scan& at(std::size_t i) const { return scans_.at(i); }
    const Scan& oldest() const { return scans_.front(); }
    void clear() { scans_.clear(); }

private:
    std::vector<Scan> scans_;
};

/// Two-channel 80x80 range image pooled from a scan history. Row-major;
/// scan s (oldest = 0) fills rows [8s, 8s + 8), window w lands at
/// row 8s + w / 80, column w % 80.
struct LidarMap {
    std::vector<double> min_pool;  // kLidarMapSize^2 values
    std::vector<double> avg_pool;

    double min_at(int row, int col) const {
        return min_pool[static_cast<std::size_t>(row) * kLidarMapSize + col];
    }
    double avg_at(int row, int col) const {
        return avg_pool[static_cast<std::size_t>(row) * kLidarMapSize + col];
    }
};

/// Min/avg-pools each scan into 640 contiguous beam windows and stacks the
/// history into the 80x80 channels. A short history is padded by repeating
/// the oldest scan. Throws std::invalid_argument when the history is empty
/// or the beam count does not divide into 640 windows.
LidarMap pool_history(const ScanHistory& history);

std::string lidar_map_to_string(const LidarMap& map);
void save_lidar_map(const LidarMap& map, const std::string& path);

/// All-zero 80x80 map standing in for the pedestrian channel.
std::vector<double> pedestrian_map();

/// First path vertex at arc length >= lookahead beyond the vertex nearest
/// the robot; the final vertex when the path ends sooner. Throws
/// std::invalid_argument on an empty path.
Vec2 pure_pursuit_subgoal(const std::vector<Vec2>& path, const Pose& pose, double lookahead);

struct SpeedGateConfig {
    double d_near{0.5};  // at or below: crawl
    double d_far{1.5};   // at or above: full speed
    double v_slow{0.5};
    double v_fast{2.0};
};

/// Piecewise-linear speed cap from the distance to the nearest obstacle:
/// v_slow at d_near, v_fast at d_far, linear between, monotone.
double speed_gate(double min_obstacle_distance, const SpeedGateConfig& cfg = {});

/// Wraps a planner and clamps its commanded speed by the speed gate fed
/// with the current scan's minimum range.
class SpeedGatedPlanner : public Planner {
public:
    explicit SpeedGatedPlanner(Planner& inner, const SpeedGateConfig& cfg = {})
        : inner_(inner), cfg_(cfg) {}

    void prepare(const WorldSpec& world) override { inner_.prepare(world); }

    Twist tick(const Scan& scan, const Pose& pose, const Vec2& goal) override {
        Twist cmd = inner_.tick(scan, pose, goal);
        const double cap = speed_gate(scan.min_range(), cfg_);
        if (cmd.v > cap) cmd.v = cap;
        return cmd;
    }

    void reset() override { inner_.reset(); }

private:
    Planner& inner_;
    SpeedGateConfig cfg_;
};

}  // namespace barn

#endif  // BARN_FRONTEND_HPP_
