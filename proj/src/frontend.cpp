#include "barn/frontend.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "barn/detail/format.hpp"

namespace barn {

LidarMap pool_history(const ScanHistory& history) {
    if (history.empty()) {
        throw std::invalid_argument("pool_history: empty scan history");
    }
    const int beam_count = history.at(0).spec.beam_count;
    if (beam_count <= 0 || beam_count % kWindowsPerScan != 0) {
        throw std::invalid_argument("pool_history: beam count " + std::to_string(beam_count) +
                                    " does not divide into " +
                                    std::to_string(kWindowsPerScan) + " windows");
    }
    const int beams_per_window = beam_count / kWindowsPerScan;
    const std::size_t cells = static_cast<std::size_t>(kLidarMapSize) * kLidarMapSize;

    LidarMap map;
    map.min_pool.assign(cells, 0.0);
    map.avg_pool.assign(cells, 0.0);

    const std::size_t pad = kHistoryDepth - std::min<std::size_t>(history.size(), kHistoryDepth);
    for (int s = 0; s < kHistoryDepth; ++s) {
        const std::size_t source =
            static_cast<std::size_t>(s) < pad ? 0 : static_cast<std::size_t>(s) - pad;
        const Scan& scan = history.at(source);
        if (scan.spec.beam_count != beam_count) {
            throw std::invalid_argument("pool_history: inconsistent beam counts in history");
        }
        for (int w = 0; w < kWindowsPerScan; ++w) {
            double lo = std::numeric_limits<double>::infinity();
            double sum = 0.0;
            for (int b = 0; b < beams_per_window; ++b) {
                const double r = scan.ranges[static_cast<std::size_t>(w * beams_per_window + b)];
                lo = std::min(lo, r);
                sum += r;
            }
            const int row = s * kRowsPerScan + w / kLidarMapSize;
            const int col = w % kLidarMapSize;
            const std::size_t idx = static_cast<std::size_t>(row) * kLidarMapSize + col;
            map.min_pool[idx] = lo;
            map.avg_pool[idx] = sum / beams_per_window;
        }
    }
    return map;
}

std::string lidar_map_to_string(const LidarMap& map) {
    std::string out = "lidar-map v1\nsize: 80 80\n";
    const auto dump_channel = [&out](const char* name, const std::vector<double>& values) {
        out += "channel: ";
        out += name;
        out += '\n';
        for (int row = 0; row < kLidarMapSize; ++row) {
            for (int col = 0; col < kLidarMapSize; ++col) {
                if (col > 0) out += ' ';
                out += detail::format_double(
                    values[static_cast<std::size_t>(row) * kLidarMapSize + col]);
            }
            out += '\n';
        }
    };
    dump_channel("min", map.min_pool);
    dump_channel("avg", map.avg_pool);
    return out;
}

void save_lidar_map(const LidarMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << lidar_map_to_string(map);
    if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

std::vector<double> pedestrian_map() {
    return std::vector<double>(static_cast<std::size_t>(kLidarMapSize) * kLidarMapSize, 0.0);
}

Vec2 pure_pursuit_subgoal(const std::vector<Vec2>& path, const Pose& pose, double lookahead) {
    if (path.empty()) {
        throw std::invalid_argument("pure_pursuit_subgoal: empty path");
    }
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
    double arc = 0.0;
    for (std::size_t i = nearest + 1; i < path.size(); ++i) {
        arc += distance(path[i - 1], path[i]);
        if (arc >= lookahead) return path[i];
    }
    return path.back();
}

double speed_gate(double min_obstacle_distance, const SpeedGateConfig& cfg) {
    const double d = std::max(min_obstacle_distance, 0.0);
    if (d <= cfg.d_near) return cfg.v_slow;
    if (d >= cfg.d_far) return cfg.v_fast;
    const double t = (d - cfg.d_near) / (cfg.d_far - cfg.d_near);
    return cfg.v_slow + t * (cfg.v_fast - cfg.v_slow);
}

}  // namespace barn
