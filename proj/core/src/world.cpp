#include "pem/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pem {

namespace {

const std::vector<std::pair<std::string, TargetSpec>>& target_table() {
    static const std::vector<std::pair<std::string, TargetSpec>> table = {
        {"water", {true, Terrain::water, "", "water", false}},
        {"dirt", {true, Terrain::flat, "", "dirt", false}},
        {"sand", {true, Terrain::sand, "", "sand", false}},
        {"seeds", {true, Terrain::grass, "", "seeds", false}},
        {"log", {false, Terrain::flat, "tree", "log", false}},
        {"leaves", {false, Terrain::flat, "tree", "leaves", false}},
        {"beef", {false, Terrain::flat, "cow", "beef", true}},
        {"milk", {false, Terrain::flat, "cow", "milk", false}},
        {"wool", {false, Terrain::flat, "sheep", "wool", true}},
    };
    return table;
}

}  // namespace

const TargetSpec& target_for(const std::string& task_kind) {
    for (const auto& [kind, spec] : target_table())
        if (kind == task_kind) return spec;
    throw std::invalid_argument("unknown resource task '" + task_kind + "'");
}

bool is_resource_task(const std::string& task_kind) {
    for (const auto& [kind, spec] : target_table())
        if (kind == task_kind) return true;
    return false;
}

const std::vector<std::string>& resource_task_kinds() {
    static const std::vector<std::string> kinds = [] {
        std::vector<std::string> v;
        for (const auto& [kind, spec] : target_table()) v.push_back(kind);
        return v;
    }();
    return kinds;
}

void register_world_kinds(EncoderOracle& oracle) {
    for (int t = 0; t < 6; ++t)
        oracle.register_kind(std::string("terrain.") + terrain_name(static_cast<Terrain>(t)));
    for (const char* k : {"water", "sand", "tree", "cow", "sheep", "house",
                          "zombie_burning", "sugarcane", "spider"})
        oracle.register_kind(k);

    oracle.register_task("water", "water");
    oracle.register_task("dirt", "terrain.flat");
    oracle.register_task("sand", "sand");
    oracle.register_task("seeds", "terrain.grass");
    oracle.register_task("log", "tree");
    oracle.register_task("leaves", "tree");
    oracle.register_task("beef", "cow");
    oracle.register_task("milk", "cow");
    oracle.register_task("wool", "sheep");
}

const char* action_name(ActionKind k) {
    switch (k) {
        case ActionKind::noop: return "noop";
        case ActionKind::move: return "move";
        case ActionKind::turn: return "turn";
        case ActionKind::interact: return "interact";
    }
    return "?";
}

World::World(TerrainGrid terrain, std::vector<WorldEntity> entities,
             const EncoderOracle& oracle, WorldOptions options)
    : terrain_(std::move(terrain)), entities_(std::move(entities)), oracle_(oracle),
      options_(options) {
    for (int t = 0; t < 6; ++t)
        terrain_ids_[t] =
            oracle_.kind_id(std::string("terrain.") + terrain_name(static_cast<Terrain>(t)));
    water_tile_id_ = oracle_.kind_id("water");
    sand_tile_id_ = oracle_.kind_id("sand");

    for (auto& e : entities_) {
        e.base_id = oracle_.kind_id(e.kind);
        for (auto& phase : e.script)
            phase.visual_id =
                phase.visual.empty() ? ScriptPhase::kGoneKind : oracle_.kind_id(phase.visual);
    }
    push_descriptor();
}

int World::inventory_count(const std::string& item) const {
    auto it = inventory_.find(item);
    return it == inventory_.end() ? 0 : it->second;
}

void World::set_active_target(std::optional<TargetSpec> target) {
    active_target_ = std::move(target);
    interact_target_ = -2;
    interact_count_ = 0;
}

KindId World::visual_at(const WorldEntity& e, std::int64_t t) const {
    if (!e.alive) return ScriptPhase::kGoneKind;
    if (e.script.empty()) return e.base_id;
    KindId id = ScriptPhase::kGoneKind;
    for (const auto& phase : e.script) {
        if (phase.t_start > t) break;
        id = phase.visual_id;
    }
    return id;
}

SceneDescriptor World::build_descriptor() const {
    SceneDescriptor d;
    const int ax = static_cast<int>(std::llround(agent_.x));
    const int ay = static_cast<int>(std::llround(agent_.y));
    const int r = static_cast<int>(std::ceil(options_.fov_radius));
    const double r2 = options_.fov_radius * options_.fov_radius;

    auto in_fov = [&](int dx, int dy) {
        if (dx == 0 && dy == 0) return true;
        if (static_cast<double>(dx) * dx + static_cast<double>(dy) * dy > r2) return false;
        const double ang = std::atan2(static_cast<double>(dy), static_cast<double>(dx)) *
                           (180.0 / 3.14159265358979323846);
        return std::abs(normalize_yaw(ang - agent_.yaw)) <= options_.fov_half_angle;
    };

    std::uint16_t terrain_counts[6] = {0, 0, 0, 0, 0, 0};
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            if (!in_fov(dx, dy)) continue;
            const Terrain t = terrain_.at(ax + dx, ay + dy);
            ++terrain_counts[static_cast<int>(t)];
            if (t == Terrain::water)
                d.entities.push_back({water_tile_id_, static_cast<std::int16_t>(dx),
                                      static_cast<std::int16_t>(dy)});
            else if (t == Terrain::sand)
                d.entities.push_back({sand_tile_id_, static_cast<std::int16_t>(dx),
                                      static_cast<std::int16_t>(dy)});
        }
    }
    for (int t = 0; t < 6; ++t)
        if (terrain_counts[t] > 0) d.terrain.push_back({terrain_ids_[t], terrain_counts[t]});

    for (const auto& e : entities_) {
        const KindId visual = visual_at(e, clock_);
        if (visual == ScriptPhase::kGoneKind) continue;
        const int dx = e.cell.x - ax;
        const int dy = e.cell.y - ay;
        if (!in_fov(dx, dy)) continue;
        d.entities.push_back(
            {visual, static_cast<std::int16_t>(dx), static_cast<std::int16_t>(dy)});
    }

    d.pose_bucket = static_cast<int>(std::floor((normalize_yaw(agent_.yaw) + 180.0) / 45.0));
    if (d.pose_bucket > 7) d.pose_bucket = 7;
    d.canonicalize();
    return d;
}

void World::push_descriptor() {
    window_.push_back(build_descriptor());
    while (window_.size() > static_cast<std::size_t>(options_.window)) window_.pop_front();
}

std::optional<Cell> World::nearest_target_cell() const {
    if (!active_target_) return std::nullopt;
    const TargetSpec& t = *active_target_;
    const int ax = static_cast<int>(std::llround(agent_.x));
    const int ay = static_cast<int>(std::llround(agent_.y));
    const double fx = std::cos(agent_.yaw * 3.14159265358979323846 / 180.0);
    const double fy = std::sin(agent_.yaw * 3.14159265358979323846 / 180.0);

    auto facing = [&](double dx, double dy) { return dx * fx + dy * fy >= 0.0; };

    std::optional<Cell> best;
    double best_dist = 0.0;
    auto consider = [&](Cell c) {
        const double dx = c.x - agent_.x, dy = c.y - agent_.y;
        const double dist = std::sqrt(dx * dx + dy * dy);
        if (dist > options_.interact_radius || !facing(dx, dy)) return;
        if (!best || dist < best_dist - 1e-12 ||
            (std::abs(dist - best_dist) <= 1e-12 && std::pair(c.y, c.x) < std::pair(best->y, best->x))) {
            best = c;
            best_dist = dist;
        }
    };

    if (t.is_terrain) {
        const int r = static_cast<int>(std::ceil(options_.interact_radius));
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx)
                if (terrain_.at(ax + dx, ay + dy) == t.terrain) consider({ax + dx, ay + dy});
    } else {
        for (const auto& e : entities_)
            if (e.alive && e.kind == t.entity_kind) consider(e.cell);
    }
    return best;
}

void World::resolve_interact(StepEvents& ev) {
    if (!active_target_) {
        interact_target_ = -2;
        interact_count_ = 0;
        return;
    }
    const std::optional<Cell> cell = nearest_target_cell();
    if (!cell) {
        interact_target_ = -2;
        interact_count_ = 0;
        return;
    }
    const TargetSpec& t = *active_target_;
    int target_id = -1;  // terrain
    if (!t.is_terrain) {
        for (std::size_t i = 0; i < entities_.size(); ++i) {
            if (entities_[i].alive && entities_[i].kind == t.entity_kind &&
                entities_[i].cell == *cell) {
                target_id = static_cast<int>(i);
                break;
            }
        }
        if (target_id < 0) {
            interact_target_ = -2;
            interact_count_ = 0;
            return;
        }
    }

    if (interact_target_ != target_id || !(interact_cell_ == *cell)) {
        interact_target_ = target_id;
        interact_cell_ = *cell;
        interact_count_ = 0;
    }
    if (++interact_count_ >= options_.interact_steps) {
        ++inventory_[t.item];
        ev.item_gained = t.item;
        if (t.consumes && target_id >= 0) entities_[static_cast<std::size_t>(target_id)].alive = false;
        interact_target_ = -2;
        interact_count_ = 0;
    }
}

StepEvents World::step(const Action& action) {
    StepEvents ev;
    if (freeze_ > 0) {
        --freeze_;
        ++clock_;
        push_descriptor();
        return ev;
    }

    switch (action.kind) {
        case ActionKind::noop:
            interact_count_ = 0;
            interact_target_ = -2;
            break;
        case ActionKind::turn:
            agent_.yaw = normalize_yaw(action.yaw);
            agent_.pitch = action.pitch;
            interact_count_ = 0;
            interact_target_ = -2;
            break;
        case ActionKind::move: {
            const int dx = std::clamp(action.dx, -1, 1);
            const int dy = std::clamp(action.dy, -1, 1);
            interact_count_ = 0;
            interact_target_ = -2;
            if (dx == 0 && dy == 0) break;
            agent_.yaw = normalize_yaw(std::atan2(static_cast<double>(dy), static_cast<double>(dx)) *
                                       (180.0 / 3.14159265358979323846));
            const int nx = static_cast<int>(std::llround(agent_.x)) + dx;
            const int ny = static_cast<int>(std::llround(agent_.y)) + dy;
            const bool diagonal = dx != 0 && dy != 0;
            bool ok = terrain_.traversable(nx, ny);
            if (ok && diagonal)
                ok = terrain_.traversable(nx, ny - dy) && terrain_.traversable(nx - dx, ny);
            if (!ok) {
                ev.blocked = true;
                break;
            }
            agent_.x = nx;
            agent_.y = ny;
            ev.moved = true;
            const double cost = terrain_.cost(nx, ny);
            freeze_ = static_cast<int>(cost) - 1;
            break;
        }
        case ActionKind::interact:
            resolve_interact(ev);
            break;
    }

    ++clock_;
    push_descriptor();
    return ev;
}

Embedding WindowEncoder::encode(const std::deque<SceneDescriptor>& window) {
    if (window.empty()) throw std::invalid_argument("encode: empty window");
    std::vector<const Embedding*> frames;
    frames.reserve(window.size());
    std::uint64_t wh = 0xcbf29ce484222325ULL;
    for (const auto& d : window) {
        const std::uint64_t h = d.hash();
        auto it = cache_.find(h);
        if (it == cache_.end())
            it = cache_.emplace(h, oracle_.descriptor_embedding(d)).first;
        frames.push_back(&it->second);
        wh = fnv1a_value(h, wh);
    }
    return oracle_.pool_window(frames, wh);
}

}  // namespace pem
