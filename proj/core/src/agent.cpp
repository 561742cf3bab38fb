#include "pem/agent.hpp"

#include <chrono>
#include <cmath>

#include "pem/navigation.hpp"

namespace pem {

namespace {

constexpr int kDirX[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDirY[8] = {0, 1, 1, 1, 0, -1, -1, -1};

Cell agent_cell(const World& world) {
    return {static_cast<int>(std::llround(world.agent().x)),
            static_cast<int>(std::llround(world.agent().y))};
}

}  // namespace

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::none: return "none";
        case Mode::explore: return "explore";
        case Mode::execute: return "execute";
    }
    return "?";
}

Agent::Agent(const ScenarioSpec& spec, World& world, EpisodicMemory& memory,
             VisitationMap& map, WindowEncoder& encoder, std::uint64_t seed)
    : spec_(spec), world_(world), memory_(memory), map_(map), encoder_(encoder),
      rng_(fnv1a_value(seed, 0x6167656e74ULL)) {}

void Agent::begin_task(const TaskSpec& task) {
    task_ = task;
    reset_mode();
    if (!task.image_goal && !task.target_kind.empty())
        world_.set_active_target(target_for(task.target_kind));
    else
        world_.set_active_target(std::nullopt);
}

void Agent::clear_task() {
    task_.reset();
    reset_mode();
    world_.set_active_target(std::nullopt);
}

void Agent::reset_mode() {
    state_.mode = Mode::none;
    state_.mode_elapsed = 0;
    state_.goal.reset();
    state_.reached = false;
    camera_adjusted_ = false;
    nav_valid_ = false;
}

Agent::StepOutcome Agent::step() { return run_step(nullptr); }

Agent::StepOutcome Agent::step_scripted(const Action& action) { return run_step(&action); }

Agent::StepOutcome Agent::run_step(const Action* forced) {
    StepOutcome out;

    // Every step writes the current observation, whatever the mode.
    ExperienceFrame frame;
    frame.time = world_.clock();
    frame.pose = world_.agent();
    if (memory_.variant() != MemoryVariant::none)
        frame.embedding = encoder_.encode(world_.window());
    if (capture_) out.frame = frame;
    memory_.write(std::move(frame));
    map_.mark(world_.agent());

    out.action = forced ? *forced : policy_action(out);
    out.mode = state_.mode;
    out.events = world_.step(out.action);
    last_blocked_ = out.events.blocked;
    return out;
}

Action Agent::policy_action(StepOutcome& out) {
    if (!task_) {
        state_.mode = Mode::explore;
        return explore_action();
    }

    if (state_.mode != Mode::none && state_.mode_elapsed > spec_.agent.mode_timeout)
        reset_mode();
    if (state_.mode == Mode::none) select_mode(out);

    Action a;
    if (state_.mode == Mode::explore)
        a = explore_action();
    else
        a = execute_action();
    ++state_.mode_elapsed;
    return a;
}

void Agent::select_mode(StepOutcome& out) {
    out.queried = true;
    ++reads_;
    const auto t0 = std::chrono::steady_clock::now();
    const ReadResult rr = memory_.read(task_->query_embedding);
    query_wall_ns_ += std::chrono::duration<double, std::nano>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    total_cost_.clusters_scored += rr.cost.clusters_scored;
    total_cost_.frames_scored += rr.cost.frames_scored;

    state_.mode_elapsed = 0;
    state_.reached = false;
    camera_adjusted_ = false;
    nav_valid_ = false;
    if (rr.candidates.empty()) {
        state_.mode = Mode::explore;
        state_.goal.reset();
        return;
    }
    // Candidates arrive score-descending with recency tie-break; the
    // head is PickOne.
    state_.mode = Mode::execute;
    state_.goal = rr.candidates.front().pose;
}

Action Agent::explore_action() {
    switch (spec_.agent.policy) {
        case ExplorePolicy::count_based: {
            const GoalSelection g = map_.select_goal(world_.agent().x, world_.agent().y);
            return follow_path_toward({static_cast<int>(std::floor(g.goal_x)),
                                       static_cast<int>(std::floor(g.goal_y))},
                                      true);
        }
        case ExplorePolicy::random_goal: {
            // Count-free baseline: a goal one coarse grid cell away in a
            // uniformly random compass direction, redrawn on arrival.
            constexpr double kHop = 9.0;
            const Pose& p = world_.agent();
            if (!random_goal_ ||
                distance2d(p.x, p.y, random_goal_->first, random_goal_->second) <=
                    kSuccessRadius) {
                constexpr int kNsew[4][2] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
                const auto& d = kNsew[rng_.next_below(4)];
                const double m = map_.config().map_side / 2.0 - 2.0;
                random_goal_ = {std::clamp(p.x + kHop * d[0], -m, m),
                                std::clamp(p.y + kHop * d[1], -m, m)};
            }
            const Action a =
                follow_path_toward({static_cast<int>(std::floor(random_goal_->first)),
                                    static_cast<int>(std::floor(random_goal_->second))},
                                   true);
            // Unreachable pick (e.g. inside a wall): drop it and draw
            // again next step instead of idling against the boundary.
            if (a.kind == ActionKind::noop) random_goal_.reset();
            return a;
        }
        case ExplorePolicy::memoryless_walk:
            return skill_action();
    }
    return Action::noop_action();
}

Action Agent::execute_action() {
    const Pose& pos = world_.agent();
    const Pose& goal = *state_.goal;
    if (!state_.reached && distance2d(pos, goal) <= kSuccessRadius) state_.reached = true;

    if (!state_.reached) {
        return follow_path_toward({static_cast<int>(std::llround(goal.x)),
                                   static_cast<int>(std::llround(goal.y))},
                                  false);
    }
    if (!camera_adjusted_) {
        camera_adjusted_ = true;
        return Action::turn(goal.yaw, goal.pitch);
    }
    if (task_ && task_->image_goal) {
        // Re-enact the recalled frame: close the remaining gap to its
        // exact cell, then hold.
        if (distance2d(pos, goal) >= 0.75)
            return follow_path_toward({static_cast<int>(std::llround(goal.x)),
                                       static_cast<int>(std::llround(goal.y))},
                                      true);
        return Action::noop_action();
    }
    return skill_action();
}

Action Agent::skill_action() {
    if (world_.nearest_target_cell()) return Action::interact();
    return walk_action();
}

Action Agent::walk_action() {
    if (last_blocked_ || rng_.next_double() < 0.6)
        walk_heading_ = static_cast<int>(rng_.next_below(8));
    return Action::move(kDirX[walk_heading_], kDirY[walk_heading_]);
}

void Agent::replan(Cell goal, bool best_effort) {
    const Cell pos = agent_cell(world_);
    PlanResult p = best_effort ? plan_toward(world_.terrain(), pos, goal)
                               : plan(world_.terrain(), pos, goal);
    nav_goal_ = goal;
    nav_valid_ = true;
    if (!p.reachable) {
        nav_path_.clear();
        nav_index_ = 0;
        return;
    }
    nav_path_ = std::move(p.path);
    nav_index_ = 1;  // path[0] is the current cell
}

Action Agent::follow_path_toward(Cell goal, bool best_effort) {
    const Cell pos = agent_cell(world_);
    if (!nav_valid_ || !(nav_goal_ == goal)) replan(goal, best_effort);

    if (nav_index_ < nav_path_.size() && nav_path_[nav_index_] == pos) ++nav_index_;
    if (nav_index_ >= nav_path_.size()) {
        if (!nav_path_.empty() && !(nav_path_.back() == pos)) replan(goal, best_effort);
        if (nav_index_ >= nav_path_.size()) return Action::noop_action();
    }
    Cell next = nav_path_[nav_index_];
    if (nav_index_ > 0 && !(nav_path_[nav_index_ - 1] == pos)) {
        replan(goal, best_effort);
        if (nav_index_ >= nav_path_.size()) return Action::noop_action();
        next = nav_path_[nav_index_];
    }
    if (!world_.terrain().traversable(next.x, next.y)) {
        replan(goal, best_effort);
        if (nav_index_ >= nav_path_.size()) return Action::noop_action();
        next = nav_path_[nav_index_];
    }
    return Action::move(next.x - pos.x, next.y - pos.y);
}

}  // namespace pem
