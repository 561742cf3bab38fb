// pembench: run scenarios, microbenchmark memory queries, snapshot
// memories, and verify replay determinism.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pem/querybench.hpp"
#include "pem/report.hpp"
#include "pem/runner.hpp"
#include "pem/scenario.hpp"
#include "pem/snapshot.hpp"

namespace fs = std::filesystem;
using namespace pem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

void write_file(const std::string& path, const std::string& content) {
    if (const fs::path p = fs::path(path); p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

// --out directory default, overridable by environment.
std::string default_out_dir() {
    if (const char* env = std::getenv("PEMBENCH_OUT")) return env;
    return "out";
}

ScenarioSpec load_scenario(const std::string& path, std::uint64_t seed_override,
                           bool has_seed, const std::string& variant_override) {
    ScenarioSpec spec = scenario_from_json_text(read_file(path));
    if (has_seed) spec.seed = seed_override;
    if (!variant_override.empty())
        spec.memory.variant = memory_variant_from_string(variant_override);
    return spec;
}

int cmd_run(const std::string& scenario_file, int episodes, std::uint64_t seed_base,
            const std::string& out_dir, const std::string& variant, int jobs, bool logs) {
    const ScenarioSpec spec = load_scenario(scenario_file, 0, false, variant);
    const auto results = run_episodes(spec, seed_base, episodes, jobs);

    std::ostringstream report;
    double wall_ms = 0.0;
    for (const auto& r : results) {
        report << episode_to_line(r, spec.budget) << '\n';
        wall_ms += r.query_wall_ms;
    }
    report << aggregate_to_line(results) << '\n';
    std::cerr << "mean query wall ms/episode: " << wall_ms / results.size() << "\n";

    const std::string stem = to_string(spec.kind) + "_" + to_string(spec.memory.variant);
    const std::string report_path = (fs::path(out_dir) / (stem + ".report.jsonl")).string();
    write_file(report_path, report.str());
    std::cout << report.str();
    std::cerr << "report: " << report_path << "\n";

    if (logs) {
        for (int i = 0; i < episodes; ++i) {
            std::vector<std::string> lines;
            run_episode(spec, seed_base + static_cast<std::uint64_t>(i), &lines);
            std::ostringstream log;
            for (const auto& l : lines) log << l << '\n';
            const std::string log_path =
                (fs::path(out_dir) /
                 (stem + ".seed" + std::to_string(seed_base + static_cast<std::uint64_t>(i)) +
                  ".log.jsonl"))
                    .string();
            write_file(log_path, log.str());
            std::cerr << "log: " << log_path << "\n";
        }
    }
    return 0;
}

int cmd_bench_query(std::int64_t frames, int queries, int dimension, int top_k,
                    std::uint64_t seed, const std::vector<std::string>& variants,
                    const std::string& out_dir) {
    QueryBenchConfig cfg;
    cfg.frames = frames;
    cfg.queries = queries;
    cfg.dimension = dimension;
    cfg.top_k = top_k;
    cfg.seed = seed;
    if (!variants.empty()) {
        cfg.variants.clear();
        for (const auto& v : variants) cfg.variants.push_back(memory_variant_from_string(v));
    }
    const auto rows = run_query_bench(cfg);
    const std::string json = query_bench_to_json(rows);
    write_file((fs::path(out_dir) / "query_bench.json").string(), json);

    std::printf("%-12s %10s %9s %12s %16s %14s\n", "variant", "frames", "clusters",
                "median_ms", "clusters_scored", "frames_scored");
    for (const auto& r : rows)
        std::printf("%-12s %10lld %9lld %12.3f %16.1f %14.1f\n",
                    to_string(r.variant).c_str(), static_cast<long long>(r.frames),
                    static_cast<long long>(r.clusters), r.median_ms, r.mean_clusters_scored,
                    r.mean_frames_scored);
    return 0;
}

int cmd_snapshot(const std::string& scenario_file, std::uint64_t seed, std::int64_t steps,
                 const std::string& out_path, const std::string& verify_path,
                 const std::string& variant) {
    if (!verify_path.empty()) {
        const std::string text = read_file(verify_path);
        const EpisodicMemory loaded = load_snapshot(text);
        const std::string again = save_snapshot(loaded);
        if (again != text) {
            std::cerr << "snapshot round-trip mismatch\n";
            return 1;
        }
        std::cout << "snapshot ok: " << loaded.frame_count() << " frames, "
                  << loaded.cluster_count() << " clusters\n";
        return 0;
    }
    ScenarioSpec spec = load_scenario(scenario_file, 0, false, variant);
    if (steps > 0) spec.budget = steps;
    EpisodicMemory memory(spec.memory);
    run_episode(spec, seed, nullptr, &memory);
    write_file(out_path, save_snapshot(memory));
    std::cout << "snapshot: " << out_path << " (" << memory.frame_count() << " frames, "
              << memory.cluster_count() << " clusters)\n";
    return 0;
}

int cmd_replay(const std::string& log_path) {
    const ReplayVerdict v = replay_verify(read_lines(log_path));
    if (v.ok) {
        std::cout << "replay ok\n";
        return 0;
    }
    std::cerr << "replay divergence at line " << v.divergence_line << ": " << v.message
              << "\n";
    return 1;
}

int cmd_report(const std::string& in_path, bool check, const std::string& table_path) {
    const std::vector<std::string> lines = read_lines(in_path);
    if (check) {
        const ReportCheck rc = check_report_lines(lines);
        if (!rc.ok) {
            std::cerr << "report check failed: " << rc.message << "\n";
            return 1;
        }
        std::cout << "report ok\n";
    }
    std::vector<EpisodeResult> episodes;
    for (const auto& line : lines) {
        if (line.find("\"type\":\"episode\"") != std::string::npos)
            episodes.push_back(episode_from_line(line));
    }
    if (!table_path.empty()) {
        write_file(table_path, table_from_lines(lines));
        std::cerr << "table: " << table_path << "\n";
    } else {
        std::cout << table_from_lines(lines);
    }
    std::cout << aggregate_to_line(episodes) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Place-event episodic memory benchmark harness"};
    app.require_subcommand(1);

    std::string scenario_file, out_dir = default_out_dir(), variant, table_path;
    std::string log_path, in_path, snapshot_out = "memory.snapshot.json", verify_path;
    int episodes = 1, jobs = 2, queries = 1000, dimension = 512, top_k = 30;
    std::uint64_t seed_base = 1, seed = 1;
    std::int64_t frames = 100000, steps = 0;
    bool logs = false, check = false;
    std::vector<std::string> variants;

    CLI::App* run = app.add_subcommand("run", "run scenario episodes and emit a report");
    run->add_option("--scenario", scenario_file, "scenario JSON file")->required();
    run->add_option("--episodes", episodes, "episodes to run");
    run->add_option("--seed-base", seed_base, "first episode seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--variant", variant, "override the memory variant");
    run->add_option("--jobs", jobs, "parallel episodes");
    run->add_flag("--logs", logs, "also write per-episode trajectory logs");

    CLI::App* bench = app.add_subcommand("bench-query", "memory query microbenchmark");
    bench->add_option("--frames", frames, "trajectory length");
    bench->add_option("--queries", queries, "measured queries");
    bench->add_option("--dimension", dimension, "embedding width");
    bench->add_option("--top-k", top_k, "clusters fetched per read");
    bench->add_option("--seed", seed, "trajectory seed");
    bench->add_option("--variant", variants, "variants to benchmark (repeatable)");
    bench->add_option("--out", out_dir, "output directory");

    CLI::App* snap = app.add_subcommand("snapshot", "write or verify a memory snapshot");
    snap->add_option("--scenario", scenario_file, "scenario JSON file");
    snap->add_option("--seed", seed, "episode seed");
    snap->add_option("--steps", steps, "truncate the episode after this many steps");
    snap->add_option("--out", snapshot_out, "snapshot output path");
    snap->add_option("--verify", verify_path, "verify a snapshot file round-trips");
    snap->add_option("--variant", variant, "override the memory variant");

    CLI::App* replay = app.add_subcommand("replay", "re-execute a trajectory log");
    replay->add_option("--log", log_path, "trajectory log file")->required();

    CLI::App* report = app.add_subcommand("report", "aggregate and validate report files");
    report->add_option("--in", in_path, "report JSONL file")->required();
    report->add_flag("--check", check, "validate schema and aggregates");
    report->add_option("--table", table_path, "write a TSV table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(scenario_file, episodes, seed_base, out_dir, variant, jobs, logs);
        if (bench->parsed())
            return cmd_bench_query(frames, queries, dimension, top_k, seed, variants, out_dir);
        if (snap->parsed())
            return cmd_snapshot(scenario_file, seed, steps, snapshot_out, verify_path, variant);
        if (replay->parsed()) return cmd_replay(log_path);
        if (report->parsed()) return cmd_report(in_path, check, table_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
