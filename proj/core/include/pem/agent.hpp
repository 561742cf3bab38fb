#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pem/exploration.hpp"
#include "pem/memory.hpp"
#include "pem/rng.hpp"
#include "pem/scenario.hpp"
#include "pem/world.hpp"

namespace pem {

enum class Mode { none, explore, execute };

const char* mode_name(Mode m);

// A task handed to the agent: either "obtain <resource>" (query/execute
// prompt embeddings plus an interaction target) or an image goal (reach
// the pose of a previously seen frame, success checked by the runner
// against goal_pose).
struct TaskSpec {
    std::string id;
    bool image_goal = false;
    Embedding query_embedding;
    Embedding execute_embedding;
    std::string target_kind;  // resource kind, empty for image goals
    Pose goal_pose;           // image-goal ground truth
    std::int64_t time_limit = 0;
};

struct AgentState {
    Mode mode = Mode::none;
    int mode_elapsed = 0;
    std::optional<Pose> goal;  // g_t; yaw/pitch kept for camera adjustment
    bool reached = false;
};

// One control step of the task-solving loop: write the current frame to
// memory, mark the visitation map, re-query on mode timeout, then act
// (explore via the count-based goal selector, or navigate to a recalled
// frame and run the skill executor). Strictly single-threaded per
// episode.
class Agent {
public:
    Agent(const ScenarioSpec& spec, World& world, EpisodicMemory& memory,
          VisitationMap& map, WindowEncoder& encoder, std::uint64_t seed);

    void begin_task(const TaskSpec& task);  // resets mode state, re-queries next step
    void clear_task();

    struct StepOutcome {
        Action action;
        StepEvents events;
        Mode mode = Mode::none;
        bool queried = false;
        ExperienceFrame frame;  // populated only while capture is enabled
    };

    StepOutcome step();                             // agent picks the action
    StepOutcome step_scripted(const Action& action);  // scripted exploration phase

    // When enabled, StepOutcome.frame carries the written frame (the
    // runner records these during scripted phases to mint image goals).
    void set_capture(bool on) { capture_ = on; }

    const AgentState& state() const { return state_; }
    const std::optional<TaskSpec>& task() const { return task_; }

    std::int64_t reads() const { return reads_; }
    QueryCost total_query_cost() const { return total_cost_; }
    double query_wall_ms() const { return query_wall_ns_ / 1e6; }

private:
    StepOutcome run_step(const Action* forced);
    Action policy_action(StepOutcome& out);
    void reset_mode();
    void select_mode(StepOutcome& out);
    Action explore_action();
    Action execute_action();
    Action skill_action();
    Action walk_action();
    Action follow_path_toward(Cell goal, bool best_effort);
    void replan(Cell goal, bool best_effort);

    const ScenarioSpec& spec_;
    World& world_;
    EpisodicMemory& memory_;
    VisitationMap& map_;
    WindowEncoder& encoder_;
    Rng rng_;

    std::optional<TaskSpec> task_;
    AgentState state_;
    bool camera_adjusted_ = false;
    bool capture_ = false;
    bool last_blocked_ = false;

    // Cached plan for the current navigation goal.
    std::vector<Cell> nav_path_;
    std::size_t nav_index_ = 0;
    Cell nav_goal_{0, 0};
    bool nav_valid_ = false;

    std::optional<std::pair<double, double>> random_goal_;
    int walk_heading_ = 0;

    std::int64_t reads_ = 0;
    QueryCost total_cost_;
    double query_wall_ns_ = 0.0;
};

}  // namespace pem
