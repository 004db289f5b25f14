#include "barn/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "barn/dwa_planner.hpp"
#include "barn/gap_planner.hpp"

namespace barn {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

double optimal_time(double path_length, double v_max) {
    if (!(path_length > 0.0) || !(v_max > 0.0)) {
        throw std::invalid_argument("optimal_time: path length and v_max must be positive");
    }
    return path_length / v_max;
}

double trial_score(bool success, double actual_time, double optimal_time) {
    if (!(actual_time > 0.0) || !(optimal_time > 0.0)) {
        throw std::invalid_argument("trial_score: times must be positive");
    }
    if (!success) return 0.0;
    return optimal_time / clamp(actual_time, 4.0 * optimal_time, 8.0 * optimal_time);
}

std::uint64_t mix_trial_seed(std::uint64_t suite_seed, const std::string& world_id, int trial) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a over id, seed, trial
    const auto eat_byte = [&h](std::uint64_t byte) {
        h ^= byte & 0xff;
        h *= 1099511628211ull;
    };
    for (const char c : world_id) eat_byte(static_cast<unsigned char>(c));
    for (int i = 0; i < 8; ++i) eat_byte(suite_seed >> (8 * i));
    for (int i = 0; i < 4; ++i) eat_byte(static_cast<std::uint64_t>(trial) >> (8 * i));
    h += 0x9e3779b97f4a7c15ull;  // splitmix finalizer decorrelates close inputs
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

SuiteReport report_from_records(const std::vector<ScoreRecord>& records,
                                const std::string& planner) {
    SuiteReport report;
    report.planner = planner;
    report.trials = static_cast<int>(records.size());

    std::vector<std::string> order;
    for (const ScoreRecord& rec : records) {
        if (std::find(order.begin(), order.end(), rec.world_id) == order.end()) {
            order.push_back(rec.world_id);
        }
    }
    report.worlds = static_cast<int>(order.size());

    double score_sum = 0.0;
    int success_count = 0;
    for (const std::string& id : order) {
        WorldSummary summary;
        summary.world_id = id;
        double world_sum = 0.0;
        int world_success = 0;
        for (const ScoreRecord& rec : records) {
            if (rec.world_id != id) continue;
            ++summary.trials;
            world_sum += rec.score;
            world_success += rec.success ? 1 : 0;
        }
        summary.mean_score = summary.trials > 0 ? world_sum / summary.trials : 0.0;
        summary.success_rate =
            summary.trials > 0 ? static_cast<double>(world_success) / summary.trials : 0.0;
        report.per_world.push_back(summary);
        score_sum += world_sum;
        success_count += world_success;
    }
    report.mean_score = report.trials > 0 ? score_sum / report.trials : 0.0;
    report.success_rate =
        report.trials > 0 ? static_cast<double>(success_count) / report.trials : 0.0;
    return report;
}

SuiteResult run_suite(const std::vector<WorldSpec>& worlds, Planner& planner,
                      const SuiteConfig& cfg) {
    if (worlds.empty()) {
        throw std::invalid_argument("run_suite: world list is empty");
    }
    SuiteResult out;
    std::vector<std::string> diagnostics;
    for (const WorldSpec& world : worlds) {
        try {
            planner.prepare(world);
        } catch (const std::exception& e) {
            diagnostics.push_back(world.id + ": prepare failed: " + e.what());
            continue;
        }
        const double ot = optimal_time(world.optimal_path_length, cfg.robot.v_max);
        for (int t = 0; t < cfg.trials_per_world; ++t) {
            TrialConfig trial_cfg = cfg.trial;
            trial_cfg.noise_seed = mix_trial_seed(cfg.suite_seed, world.id, t);
            const TrialResult result = run_trial(world, planner, cfg.robot, trial_cfg);
            ScoreRecord rec;
            rec.world_id = world.id;
            rec.trial = t;
            rec.success = result.success;
            rec.actual_time = result.actual_time;
            rec.optimal_time = ot;
            rec.score = result.success ? trial_score(true, result.actual_time, ot) : 0.0;
            rec.outcome = to_string(result.outcome);
            out.records.push_back(std::move(rec));
        }
    }
    out.report = report_from_records(out.records, cfg.planner_name);
    out.report.diagnostics = std::move(diagnostics);
    return out;
}

LoadedWorlds load_worlds_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    LoadedWorlds out;
    if (!fs::is_directory(dir)) {
        throw std::runtime_error("not a directory: " + dir);
    }
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".world") {
            paths.push_back(entry.path().string());
        }
    }
    std::sort(paths.begin(), paths.end());
    for (const std::string& path : paths) {
        try {
            out.worlds.push_back(load_world(path));
        } catch (const std::exception& e) {
            out.diagnostics.push_back(path + ": " + e.what());
        }
    }
    return out;
}

std::unique_ptr<Planner> make_planner(const std::string& name, const RobotParams& robot) {
    if (name == "gap") {
        return std::make_unique<GapPlanner>(GapPlannerConfig{}, robot);
    }
    if (name == "dwa-0.5") {
        return std::make_unique<DwaPlanner>(DwaConfig::slow(), robot);
    }
    if (name == "dwa-2.0") {
        return std::make_unique<DwaPlanner>(DwaConfig::fast(), robot);
    }
    throw std::invalid_argument("unknown planner: " + name +
                                " (expected gap, dwa-0.5, or dwa-2.0)");
}

std::string results_to_json(const SuiteResult& result, std::uint64_t suite_seed) {
    ordered_json root;
    root["planner"] = result.report.planner;
    root["suite_seed"] = suite_seed;
    root["records"] = ordered_json::array();
    for (const ScoreRecord& rec : result.records) {
        ordered_json j;
        j["world"] = rec.world_id;
        j["trial"] = rec.trial;
        j["success"] = rec.success;
        j["at"] = rec.actual_time;
        j["ot"] = rec.optimal_time;
        j["score"] = rec.score;
        j["outcome"] = rec.outcome;
        root["records"].push_back(std::move(j));
    }
    ordered_json rep;
    rep["planner"] = result.report.planner;
    rep["worlds"] = result.report.worlds;
    rep["trials"] = result.report.trials;
    rep["mean_score"] = result.report.mean_score;
    rep["success_rate"] = result.report.success_rate;
    rep["per_world"] = ordered_json::array();
    for (const WorldSummary& ws : result.report.per_world) {
        ordered_json j;
        j["world"] = ws.world_id;
        j["trials"] = ws.trials;
        j["mean_score"] = ws.mean_score;
        j["success_rate"] = ws.success_rate;
        rep["per_world"].push_back(std::move(j));
    }
    rep["diagnostics"] = result.report.diagnostics;
    root["report"] = std::move(rep);
    return root.dump(2) + "\n";
}

void save_results(const SuiteResult& result, std::uint64_t suite_seed,
                  const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << results_to_json(result, suite_seed);
    if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

SuiteResult load_results(const std::string& path) {
    const ordered_json root = ordered_json::parse(read_file(path));
    SuiteResult result;
    for (const auto& j : root.at("records")) {
        ScoreRecord rec;
        rec.world_id = j.at("world").get<std::string>();
        rec.trial = j.at("trial").get<int>();
        rec.success = j.at("success").get<bool>();
        rec.actual_time = j.at("at").get<double>();
        rec.optimal_time = j.at("ot").get<double>();
        rec.score = j.at("score").get<double>();
        rec.outcome = j.at("outcome").get<std::string>();
        result.records.push_back(std::move(rec));
    }
    result.report = report_from_records(result.records, root.at("planner").get<std::string>());
    if (root.contains("report") && root["report"].contains("diagnostics")) {
        for (const auto& d : root["report"]["diagnostics"]) {
            result.report.diagnostics.push_back(d.get<std::string>());
        }
    }
    return result;
}

namespace {

constexpr double kSvgScale = 120.0;  // pixels per meter

std::string px(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

}  // namespace

std::string render_svg(const WorldSpec& world, const std::vector<TrajectorySample>& trajectory,
                       const std::vector<std::string>& debug_lines) {
    const OccupancyGrid& grid = world.grid;
    const double w_px = grid.width_m() * kSvgScale;
    const double h_px = grid.height_m() * kSvgScale;
    const auto sx = [&](double x) { return (x - grid.origin.x) * kSvgScale; };
    const auto sy = [&](double y) { return (grid.origin.y + grid.height_m() - y) * kSvgScale; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(w_px) + "\" height=\"" +
           px(h_px) + "\" viewBox=\"0 0 " + px(w_px) + " " + px(h_px) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

    const double cell_px = grid.resolution * kSvgScale;
    for (int iy = 0; iy < grid.height_cells; ++iy) {
        for (int ix = 0; ix < grid.width_cells; ++ix) {
            if (!grid.occupied(ix, iy)) continue;
            const double x = ix * cell_px;
            const double y = h_px - (iy + 1) * cell_px;
            svg += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(cell_px) +
                   "\" height=\"" + px(cell_px) + "\" fill=\"#37474f\"/>\n";
        }
    }

    svg += "<circle cx=\"" + px(sx(world.start.x)) + "\" cy=\"" + px(sy(world.start.y)) +
           "\" r=\"" + px(0.25 * kSvgScale) + "\" fill=\"#1565c0\" fill-opacity=\"0.8\"/>\n";
    svg += "<circle cx=\"" + px(sx(world.goal.x)) + "\" cy=\"" + px(sy(world.goal.y)) +
           "\" r=\"" + px(0.3 * kSvgScale) +
           "\" fill=\"none\" stroke=\"#e65100\" stroke-width=\"3\"/>\n";

    if (trajectory.size() >= 2) {
        svg += "<polyline fill=\"none\" stroke=\"#2e7d32\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < trajectory.size(); ++i) {
            if (i > 0) svg += ' ';
            svg += px(sx(trajectory[i].pose.x)) + "," + px(sy(trajectory[i].pose.y));
        }
        svg += "\"/>\n";
    }

    for (const std::string& line : debug_lines) {
        if (line.empty()) continue;
        const ordered_json j = ordered_json::parse(line);
        const auto& pose = j.at("pose");
        svg += "<circle class=\"tick\" cx=\"" + px(sx(pose[0].get<double>())) + "\" cy=\"" +
               px(sy(pose[1].get<double>())) + "\" r=\"2\" fill=\"#6a1b9a\"/>\n";
        if (j.contains("target") && !j["target"].is_null()) {
            const auto& target = j["target"];
            svg += "<circle class=\"target\" cx=\"" + px(sx(target[0].get<double>())) +
                   "\" cy=\"" + px(sy(target[1].get<double>())) +
                   "\" r=\"3\" fill=\"none\" stroke=\"#6a1b9a\"/>\n";
        }
    }

    svg += "</svg>\n";
    return svg;
}

void render_trajectory(const WorldSpec& world, const std::string& trajectory_csv,
                       const std::string& out_svg, const std::string& debug_jsonl) {
    const std::vector<TrajectorySample> trajectory = load_trajectory_csv(trajectory_csv);
    std::vector<std::string> debug_lines;
    if (!debug_jsonl.empty()) {
        std::ifstream in(debug_jsonl, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open: " + debug_jsonl);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) debug_lines.push_back(line);
        }
    }
    std::ofstream out(out_svg, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_svg);
    out << render_svg(world, trajectory, debug_lines);
    if (!out.flush()) throw std::runtime_error("write failed: " + out_svg);
}

}  // namespace barn
