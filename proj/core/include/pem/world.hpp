#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pem/embedding.hpp"
#include "pem/navigation.hpp"
#include "pem/pose.hpp"

namespace pem {

// Scripted visual state change: from t_start on, the entity looks like
// `visual` ("" = not visible). Timelines are strictly increasing in t.
struct ScriptPhase {
    std::int64_t t_start = 0;
    std::string visual;
    KindId visual_id = kGoneKind;

    static constexpr KindId kGoneKind = 0xffff;
};

struct WorldEntity {
    std::string kind;  // base kind, what a task interacts with
    Cell cell;
    bool alive = true;
    std::vector<ScriptPhase> script;  // empty = always visible as `kind`

    KindId base_id = 0;
};

// What an interact action is trying to harvest.
struct TargetSpec {
    bool is_terrain = false;
    Terrain terrain = Terrain::flat;
    std::string entity_kind;
    std::string item;
    bool consumes = false;
};

// Registry of the resource task kinds: water, beef, wool, milk, log,
// dirt, leaves, seeds, sand. Throws on unknown kinds.
const TargetSpec& target_for(const std::string& task_kind);
bool is_resource_task(const std::string& task_kind);
const std::vector<std::string>& resource_task_kinds();

// Registers every kind name the simulator can emit (terrains, resource
// tiles, entity kinds) plus the resource task anchors, in a fixed order
// so base embeddings are reproducible across scenarios.
void register_world_kinds(EncoderOracle& oracle);

enum class ActionKind : std::uint8_t { noop, move, turn, interact };

struct Action {
    ActionKind kind = ActionKind::noop;
    int dx = 0;  // move direction, each in {-1, 0, 1}
    int dy = 0;
    double yaw = 0.0;  // turn target
    double pitch = 0.0;

    static Action noop_action() { return {}; }
    static Action move(int dx, int dy) { return {ActionKind::move, dx, dy, 0.0, 0.0}; }
    static Action turn(double yaw, double pitch = 0.0) {
        return {ActionKind::turn, 0, 0, yaw, pitch};
    }
    static Action interact() { return {ActionKind::interact, 0, 0, 0.0, 0.0}; }
};

const char* action_name(ActionKind k);

struct WorldOptions {
    double fov_radius = 8.0;
    double fov_half_angle = 30.0;
    double interact_radius = 3.0;
    int interact_steps = 20;
    int window = 16;  // descriptor history depth H
};

struct StepEvents {
    bool moved = false;
    bool blocked = false;
    std::string item_gained;  // non-empty when an interaction completed
};

// Deterministic top-down gridworld. One step() call is one clock tick;
// moving into cost-k terrain freezes the agent for k-1 further ticks
// (the pending ticks ignore incoming actions), so travel time scales
// with terrain difficulty. The agent spawns at the origin facing +x.
class World {
public:
    World(TerrainGrid terrain, std::vector<WorldEntity> entities,
          const EncoderOracle& oracle, WorldOptions options);

    StepEvents step(const Action& action);

    const TerrainGrid& terrain() const { return terrain_; }
    const std::vector<WorldEntity>& entities() const { return entities_; }
    const Pose& agent() const { return agent_; }
    std::int64_t clock() const { return clock_; }
    bool frozen() const { return freeze_ > 0; }
    const std::map<std::string, int>& inventory() const { return inventory_; }
    int inventory_count(const std::string& item) const;
    const WorldOptions& options() const { return options_; }

    // The task whose target interact actions are resolved against.
    void set_active_target(std::optional<TargetSpec> target);

    // Descriptor history, most recent last, at most `window` entries.
    const std::deque<SceneDescriptor>& window() const { return window_; }
    const SceneDescriptor& current_descriptor() const { return window_.back(); }

    // Nearest active-target cell within the interact radius and facing
    // half-plane, if any; what an interact action would work on.
    std::optional<Cell> nearest_target_cell() const;

    // Visual kind id of an entity at time t, or ScriptPhase::kGoneKind.
    KindId visual_at(const WorldEntity& e, std::int64_t t) const;

private:
    SceneDescriptor build_descriptor() const;
    void push_descriptor();
    void resolve_interact(StepEvents& ev);

    TerrainGrid terrain_;
    std::vector<WorldEntity> entities_;
    const EncoderOracle& oracle_;
    WorldOptions options_;

    Pose agent_;
    std::int64_t clock_ = 0;
    int freeze_ = 0;
    std::map<std::string, int> inventory_;
    std::optional<TargetSpec> active_target_;

    // Consecutive-interact bookkeeping: -2 none, -1 terrain cell, >= 0
    // entity index.
    int interact_target_ = -2;
    Cell interact_cell_{0, 0};
    int interact_count_ = 0;

    std::deque<SceneDescriptor> window_;

    KindId terrain_ids_[6] = {0, 0, 0, 0, 0, 0};
    KindId water_tile_id_ = 0;
    KindId sand_tile_id_ = 0;
};

// Caches per-descriptor embeddings by content hash and pools windows
// through the oracle; the hot path for per-tick frame encoding.
class WindowEncoder {
public:
    explicit WindowEncoder(const EncoderOracle& oracle) : oracle_(oracle) {}

    Embedding encode(const std::deque<SceneDescriptor>& window);

private:
    const EncoderOracle& oracle_;
    std::unordered_map<std::uint64_t, Embedding> cache_;
};

}  // namespace pem
