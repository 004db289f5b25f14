#ifndef BARN_BENCH_HPP_
#define BARN_BENCH_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "barn/sim.hpp"
#include "barn/world.hpp"

namespace barn {

/// Time to drive the shortest path at top speed. Throws
/// std::invalid_argument on non-positive inputs.
double optimal_time(double path_length, double v_max);

/// Benchmark score: 0 on failure, otherwise OT / clip(AT, 4*OT, 8*OT),
/// which lands in [0.125, 0.25]. Throws std::invalid_argument on
/// non-positive times.
double trial_score(bool success, double actual_time, double optimal_time);

struct ScoreRecord {
    std::string world_id;
    int trial{0};
    bool success{false};
    double actual_time{0.0};
    double optimal_time{0.0};
    double score{0.0};
    std::string outcome;
};

struct WorldSummary {
    std::string world_id;
    int trials{0};
    double mean_score{0.0};
    double success_rate{0.0};
};

struct SuiteReport {
    std::string planner;
    int worlds{0};
    int trials{0};
    double mean_score{0.0};
    double success_rate{0.0};
    std::vector<WorldSummary> per_world;
    std::vector<std::string> diagnostics;  // skipped worlds, unreadable files
};

struct SuiteResult {
    std::vector<ScoreRecord> records;
    SuiteReport report;
};

struct SuiteConfig {
    std::string planner_name{"gap"};
    int trials_per_world{10};
    std::uint64_t suite_seed{0};
    RobotParams robot{};
    TrialConfig trial{};
};

/// Deterministic per-trial RNG seed from (suite seed, world id, trial).
std::uint64_t mix_trial_seed(std::uint64_t suite_seed, const std::string& world_id, int trial);

/// Aggregates records into per-world and overall means (insertion order of
/// world ids is preserved, so aggregation is a stable keyed reduction).
SuiteReport report_from_records(const std::vector<ScoreRecord>& records,
                                const std::string& planner);

/// Runs trials_per_world trials on every world and scores each. A world
/// whose preparation fails is skipped with a diagnostic; the suite never
/// aborts. Throws std::invalid_argument on an empty world list.
SuiteResult run_suite(const std::vector<WorldSpec>& worlds, Planner& planner,
                      const SuiteConfig& cfg);

struct LoadedWorlds {
    std::vector<WorldSpec> worlds;
    std::vector<std::string> diagnostics;  // files that failed to load
};

/// Loads every *.world file in the directory, sorted by filename. Unreadable
/// or malformed files become diagnostics instead of aborting.
LoadedWorlds load_worlds_dir(const std::string& dir);

/// Planner factory for the CLI names: "gap", "dwa-0.5", "dwa-2.0". Throws
/// std::invalid_argument on unknown names.
std::unique_ptr<Planner> make_planner(const std::string& name, const RobotParams& robot);

std::string results_to_json(const SuiteResult& result, std::uint64_t suite_seed);
void save_results(const SuiteResult& result, std::uint64_t suite_seed,
                  const std::string& path);
SuiteResult load_results(const std::string& path);

/// SVG of the world (occupied cells, start disc, goal ring), the trajectory
/// polyline, and one marker per line of the planner debug stream.
std::string render_svg(const WorldSpec& world, const std::vector<TrajectorySample>& trajectory,
                       const std::vector<std::string>& debug_lines = {});

/// File-level wrapper: reads the trajectory CSV (and optional debug JSONL)
/// and writes the SVG. Throws std::runtime_error on missing inputs.
void render_trajectory(const WorldSpec& world, const std::string& trajectory_csv,
                       const std::string& out_svg, const std::string& debug_jsonl = "");

}  // namespace barn

#endif  // BARN_BENCH_HPP_
