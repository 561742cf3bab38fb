#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pem/embedding.hpp"
#include "pem/exploration.hpp"
#include "pem/memory.hpp"
#include "pem/rng.hpp"
#include "pem/world.hpp"

namespace pem {

enum class ScenarioKind {
    aba_sparse,
    memory_task_water,
    memory_task_death_spot,
    memory_task_twin_houses,
    long_instruction,
    long_navigation,
    exploration_only,
    random_plains,
};

std::string to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& s);

enum class ExplorePolicy { count_based, random_goal, memoryless_walk };

std::string to_string(ExplorePolicy p);
ExplorePolicy explore_policy_from_string(const std::string& s);

struct AgentConfig {
    int mode_timeout = 600;        // L, steps before a mode resets and re-queries
    double interact_radius = 3.0;  // rho_int
    int interact_steps = 20;       // k_int consecutive interacts per item
    ExplorePolicy policy = ExplorePolicy::count_based;
};

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::exploration_only;
    int map_side = 100;
    std::uint64_t seed = 0;  // layout seed (per-episode for random_plains)
    std::int64_t budget = 6000;
    std::int64_t task_limit = 0;  // 0 = only the episode budget caps a task

    std::string task_a;  // A-B-A resource pair
    std::string task_b;
    std::string schedule = "aba";  // random_plains: "aba" | "seq4"

    MemoryConfig memory;
    OracleConfig oracle;
    ExploreConfig explore;
    AgentConfig agent;

    void validate() const;
};

// Published-default parameters for a scenario family, with the simulator's
// pacing knobs (update frequency, embedding width) set per family.
ScenarioSpec default_scenario(ScenarioKind kind);

// Strict JSON codec: unknown keys are rejected with their full path.
ScenarioSpec scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const ScenarioSpec& spec);

// One stop of a scripted exploration phase: walk to the waypoint, face
// `yaw`, and hold until the dwell runs out.
struct TourStop {
    Cell waypoint;
    double yaw = 0.0;
    std::int64_t dwell = 0;
};

struct WorldBlueprint {
    TerrainGrid terrain{1};
    std::vector<WorldEntity> entities;
    std::vector<TourStop> tour;        // scripted phase, empty when free-running
    std::int64_t tour_length = 0;      // ticks the scripted phase occupies
    std::vector<std::int64_t> goal_frame_ticks;  // designated image-goal frames
    // Entities whose scripts must be timed relative to tour arrivals:
    // (entity index, phase index, offset after arrival at tour stop k).
    struct PendingScript {
        std::size_t entity = 0;
        std::size_t phase = 0;
        std::size_t stop = 0;
        std::int64_t offset = 0;
    };
    std::vector<PendingScript> pending_scripts;
};

// Deterministic map construction for a scenario. The layout depends on
// (kind, map_side, seed) only.
WorldBlueprint make_blueprint(const ScenarioSpec& spec, std::uint64_t episode_seed);

struct TaskRequest {
    std::string kind;  // resource kind, or "goal:<k>" for image goals
    std::int64_t time_limit = 0;
};

// Ordered task schedule of a scenario. Fixed families (A-B-A, SEQ(4))
// return a finite list; the long-horizon streams draw seeded random
// tasks until the budget would be exhausted.
class TaskStream {
public:
    TaskStream(const ScenarioSpec& spec, std::uint64_t episode_seed);

    std::optional<TaskRequest> next(std::int64_t clock_now);

private:
    const ScenarioSpec& spec_;
    Rng rng_;
    std::size_t index_ = 0;
    std::vector<TaskRequest> fixed_;
    bool random_stream_ = false;
    std::vector<std::string> random_kinds_;
};

}  // namespace pem
