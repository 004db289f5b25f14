#include <cstdio>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "barn/bench.hpp"
#include "barn/frontend.hpp"
#include "barn/world.hpp"

namespace {

void print_report(const barn::SuiteReport& report) {
    std::printf("planner: %s\n", report.planner.c_str());
    std::printf("worlds: %d  trials: %d\n", report.worlds, report.trials);
    std::printf("mean score: %.4f\n", report.mean_score);
    std::printf("success rate: %.4f\n", report.success_rate);
    for (const barn::WorldSummary& ws : report.per_world) {
        std::printf("  %-16s trials %3d  mean %.4f  success %.2f\n", ws.world_id.c_str(),
                    ws.trials, ws.mean_score, ws.success_rate);
    }
    for (const std::string& d : report.diagnostics) {
        std::fprintf(stderr, "diagnostic: %s\n", d.c_str());
    }
}

int cmd_generate(std::uint64_t seed, int count, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    barn::CaParams params;
    std::set<std::string> ids;
    std::uint64_t next_seed = seed;
    int failures = 0;
    while (static_cast<int>(ids.size()) < count) {
        barn::WorldSpec world;
        try {
            world = barn::generate_world(next_seed, params);
        } catch (const barn::GenerationError& e) {
            std::fprintf(stderr, "seed %llu: %s\n",
                         static_cast<unsigned long long>(next_seed), e.what());
            ++next_seed;
            ++failures;
            if (failures > 4 * count + 64) {
                std::fprintf(stderr, "giving up after repeated generation failures\n");
                return 1;
            }
            continue;
        }
        ++next_seed;
        // Retries inside generate_world can reuse a later seed; keep only the
        // first world per id so the directory stays unique.
        if (!ids.insert(world.id).second) continue;
        const std::string path = (fs::path(out_dir) / (world.id + ".world")).string();
        barn::save_world(world, path);
        std::printf("%s  (optimal path %.3f m)\n", path.c_str(), world.optimal_path_length);
    }
    return 0;
}

int cmd_run(const std::string& worlds_dir, const std::string& planner_name, int trials,
            const std::string& out_path, double latency, bool speed_gate,
            std::uint64_t suite_seed, const std::string& trajectories_dir) {
    barn::LoadedWorlds loaded = barn::load_worlds_dir(worlds_dir);
    for (const std::string& d : loaded.diagnostics) {
        std::fprintf(stderr, "diagnostic: %s\n", d.c_str());
    }
    if (loaded.worlds.empty()) {
        std::fprintf(stderr, "no loadable worlds in %s\n", worlds_dir.c_str());
        return 1;
    }

    barn::SuiteConfig cfg;
    cfg.planner_name = planner_name;
    cfg.trials_per_world = trials;
    cfg.suite_seed = suite_seed;
    cfg.robot.latency = latency;

    std::unique_ptr<barn::Planner> planner = barn::make_planner(planner_name, cfg.robot);
    std::unique_ptr<barn::SpeedGatedPlanner> gated;
    barn::Planner* active = planner.get();
    if (speed_gate) {
        gated = std::make_unique<barn::SpeedGatedPlanner>(*planner);
        active = gated.get();
    }

    barn::SuiteResult result = barn::run_suite(loaded.worlds, *active, cfg);

    if (!trajectories_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(trajectories_dir);
        // Re-run record-by-record would double the cost; instead re-run each
        // world's first trial for inspection.
        for (const barn::WorldSpec& world : loaded.worlds) {
            try {
                active->prepare(world);
            } catch (const std::exception&) {
                continue;
            }
            barn::TrialConfig trial_cfg = cfg.trial;
            trial_cfg.noise_seed = barn::mix_trial_seed(suite_seed, world.id, 0);
            const barn::TrialResult r = barn::run_trial(world, *active, cfg.robot, trial_cfg);
            const std::string path =
                (fs::path(trajectories_dir) / (world.id + "-t0.csv")).string();
            barn::save_trajectory_csv(r.trajectory, path);
        }
    }

    barn::save_results(result, suite_seed, out_path);
    print_report(result.report);
    std::printf("results written to %s\n", out_path.c_str());
    return (loaded.diagnostics.empty() && result.report.diagnostics.empty()) ? 0 : 1;
}

int cmd_score(const std::string& results_path) {
    const barn::SuiteResult result = barn::load_results(results_path);
    print_report(result.report);
    return 0;
}

int cmd_render(const std::string& world_path, const std::string& trajectory_path,
               const std::string& out_path, const std::string& debug_path) {
    const barn::WorldSpec world = barn::load_world(world_path);
    barn::render_trajectory(world, trajectory_path, out_path, debug_path);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale BARN navigation benchmark"};
    app.require_subcommand(1);

    auto* generate = app.add_subcommand("generate", "Generate worlds");
    std::uint64_t gen_seed = 0;
    int gen_count = 1;
    std::string gen_out = "worlds";
    generate->add_option("--seed", gen_seed, "Base seed")->required();
    generate->add_option("--count", gen_count, "Number of worlds")->required();
    generate->add_option("--out", gen_out, "Output directory")->required();

    auto* run = app.add_subcommand("run", "Run a planner over a world directory");
    std::string run_worlds;
    std::string run_planner = "gap";
    int run_trials = 10;
    std::string run_out = "results.json";
    double run_latency = 0.0;
    bool run_speed_gate = false;
    std::uint64_t run_suite_seed = 0;
    std::string run_trajectories;
    run->add_option("--worlds", run_worlds, "World directory")->required();
    run->add_option("--planner", run_planner, "gap | dwa-0.5 | dwa-2.0")->required();
    run->add_option("--trials", run_trials, "Trials per world");
    run->add_option("--out", run_out, "Results JSON path")->required();
    run->add_option("--latency", run_latency, "Actuation latency in seconds");
    run->add_flag("--speed-gate", run_speed_gate, "Clamp speed near obstacles");
    run->add_option("--suite-seed", run_suite_seed, "Suite RNG seed");
    run->add_option("--trajectories", run_trajectories,
                    "Also write each world's first-trial trajectory CSV here");

    auto* score = app.add_subcommand("score", "Print the report from a results file");
    std::string score_results;
    score->add_option("--results", score_results, "Results JSON path")->required();

    auto* render = app.add_subcommand("render", "Render a world + trajectory to SVG");
    std::string render_world;
    std::string render_traj;
    std::string render_out = "out.svg";
    std::string render_debug;
    render->add_option("--world", render_world, "World file")->required();
    render->add_option("--trajectory", render_traj, "Trajectory CSV")->required();
    render->add_option("--out", render_out, "Output SVG path")->required();
    render->add_option("--debug", render_debug, "Planner debug JSONL for annotations");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_generate(gen_seed, gen_count, gen_out);
        if (run->parsed()) {
            return cmd_run(run_worlds, run_planner, run_trials, run_out, run_latency,
                           run_speed_gate, run_suite_seed, run_trajectories);
        }
        if (score->parsed()) return cmd_score(score_results);
        if (render->parsed()) {
            return cmd_render(render_world, render_traj, render_out, render_debug);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
