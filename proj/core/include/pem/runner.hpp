#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pem/agent.hpp"
#include "pem/memory.hpp"
#include "pem/scenario.hpp"

namespace pem {

struct TaskResult {
    std::string id;
    bool success = false;
    std::int64_t duration = 0;
    std::int64_t start_clock = 0;
    std::int64_t goal_tick = -1;  // image goals: tick of the goal frame
    bool goal_retained_at_issue = false;
};

struct EpisodeResult {
    std::string scenario;
    std::uint64_t seed = 0;
    std::int64_t steps = 0;
    std::vector<TaskResult> tasks;
    double coverage = 0.0;
    double revisit = 0.0;
    std::int64_t memory_frames = 0;
    std::int64_t memory_clusters = 0;
    std::int64_t memory_buffered = 0;
    std::int64_t memory_evictions = 0;
    std::int64_t reads = 0;
    std::int64_t clusters_scored = 0;
    std::int64_t frames_scored = 0;
    double query_wall_ms = 0.0;
    std::map<std::string, int> inventory;

    int successes() const;
    double success_rate() const;
};

// Walks a list of tour stops: path toward each waypoint, face its yaw,
// hold for the dwell, move on. Depends only on the world, never on the
// memory, so every memory variant sees an identical observation stream.
class TourDriver {
public:
    explicit TourDriver(std::vector<TourStop> stops);

    Action next(const World& world);
    const std::vector<std::int64_t>& arrival_ticks() const { return arrivals_; }

private:
    std::vector<TourStop> stops_;
    std::size_t stop_ = 0;
    bool dwelling_ = false;
    bool turned_ = false;
    std::int64_t dwell_left_ = 0;
    std::vector<std::int64_t> arrivals_;

    std::vector<Cell> path_;
    std::size_t path_index_ = 0;
    bool path_valid_ = false;
};

// Runs one full episode: scripted exploration phase when the scenario
// has one, then the task stream until the budget runs out. Fully
// deterministic in (spec, episode_seed).
EpisodeResult run_episode(const ScenarioSpec& spec, std::uint64_t episode_seed,
                          std::vector<std::string>* log_lines = nullptr,
                          EpisodicMemory* final_memory = nullptr);

// Episodes are independent; runs them across `jobs` threads and returns
// results ordered by seed offset.
std::vector<EpisodeResult> run_episodes(const ScenarioSpec& spec, std::uint64_t seed_base,
                                        int episodes, int jobs);

struct ReplayVerdict {
    bool ok = false;
    std::size_t divergence_line = 0;  // 0-based, valid when !ok
    std::string message;
};

// Re-executes a logged episode and compares every emitted line.
ReplayVerdict replay_verify(const std::vector<std::string>& log_lines);

}  // namespace pem
