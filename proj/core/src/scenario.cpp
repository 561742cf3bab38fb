#include "pem/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace pem {

using nlohmann::json;

std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::aba_sparse: return "aba_sparse";
        case ScenarioKind::memory_task_water: return "memory_task_water";
        case ScenarioKind::memory_task_death_spot: return "memory_task_death_spot";
        case ScenarioKind::memory_task_twin_houses: return "memory_task_twin_houses";
        case ScenarioKind::long_instruction: return "long_instruction";
        case ScenarioKind::long_navigation: return "long_navigation";
        case ScenarioKind::exploration_only: return "exploration_only";
        case ScenarioKind::random_plains: return "random_plains";
    }
    return "?";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
    for (int k = 0; k <= static_cast<int>(ScenarioKind::random_plains); ++k)
        if (to_string(static_cast<ScenarioKind>(k)) == s) return static_cast<ScenarioKind>(k);
    throw std::invalid_argument("unknown scenario '" + s + "'");
}

std::string to_string(ExplorePolicy p) {
    switch (p) {
        case ExplorePolicy::count_based: return "count_based";
        case ExplorePolicy::random_goal: return "random_goal";
        case ExplorePolicy::memoryless_walk: return "memoryless_walk";
    }
    return "?";
}

ExplorePolicy explore_policy_from_string(const std::string& s) {
    if (s == "count_based") return ExplorePolicy::count_based;
    if (s == "random_goal") return ExplorePolicy::random_goal;
    if (s == "memoryless_walk") return ExplorePolicy::memoryless_walk;
    throw std::invalid_argument("unknown explore policy '" + s + "'");
}

void ScenarioSpec::validate() const {
    if (map_side != 100 && map_side != 200)
        throw std::invalid_argument("scenario: map_side must be 100 or 200");
    if (budget < 1) throw std::invalid_argument("scenario: budget must be >= 1");
    if (task_limit < 0) throw std::invalid_argument("scenario: task_limit must be >= 0");
    memory.validate();
    explore.validate();
    if (agent.mode_timeout < 1) throw std::invalid_argument("scenario: mode_timeout must be >= 1");
    if (agent.interact_steps < 1)
        throw std::invalid_argument("scenario: interact_steps must be >= 1");

    if (kind == ScenarioKind::aba_sparse ||
        (kind == ScenarioKind::random_plains && schedule == "aba")) {
        static const std::vector<std::string> a_kinds = {"water", "beef", "wool", "milk"};
        static const std::vector<std::string> b_kinds = {"log", "dirt", "leaves", "seeds",
                                                         "sand"};
        if (std::find(a_kinds.begin(), a_kinds.end(), task_a) == a_kinds.end())
            throw std::invalid_argument("scenario: task a must be a sparse resource");
        if (std::find(b_kinds.begin(), b_kinds.end(), task_b) == b_kinds.end())
            throw std::invalid_argument("scenario: task b must be a dense resource");
    }
    if (kind == ScenarioKind::random_plains && schedule != "aba" && schedule != "seq4")
        throw std::invalid_argument("scenario: schedule must be aba or seq4");
}

ScenarioSpec default_scenario(ScenarioKind kind) {
    ScenarioSpec s;
    s.kind = kind;
    s.oracle.seed = 7;
    s.oracle.dimension = 512;
    s.oracle.noise_angle = 0.0;
    s.oracle.window = 16;

    switch (kind) {
        case ScenarioKind::aba_sparse:
            s.map_side = 100;
            s.budget = 12000;
            s.task_a = "water";
            s.task_b = "log";
            s.memory.capacity = 12000;  // effectively unlimited for the episode
            s.memory.update_frequency = 2;
            s.oracle.dimension = 64;
            break;
        case ScenarioKind::random_plains:
            s.map_side = 100;
            s.budget = 12000;
            s.task_a = "water";
            s.task_b = "log";
            s.schedule = "aba";
            s.memory.capacity = 16000;
            s.memory.update_frequency = 2;
            s.oracle.dimension = 64;
            break;
        case ScenarioKind::memory_task_water:
        case ScenarioKind::memory_task_death_spot:
        case ScenarioKind::memory_task_twin_houses:
            s.map_side = 100;
            s.budget = 4500;  // 3K scripted exploration + the task phase
            s.memory.capacity = 2000;
            s.memory.update_frequency = 100;
            s.oracle.dimension = 64;
            break;
        case ScenarioKind::long_instruction:
            s.map_side = 200;
            s.budget = 500000;
            s.task_limit = 20000;
            s.memory.capacity = 20000;
            s.memory.update_frequency = 2;
            s.oracle.dimension = 32;
            s.explore.map_side = 240;
            s.explore.super_cell = 30;
            break;
        case ScenarioKind::long_navigation:
            s.map_side = 200;
            s.budget = 500000;
            s.task_limit = 20000;
            s.memory.capacity = 20000;
            s.memory.update_frequency = 2;
            s.oracle.dimension = 32;
            s.explore.map_side = 240;
            s.explore.super_cell = 30;
            break;
        case ScenarioKind::exploration_only:
            s.map_side = 100;
            s.budget = 6000;
            s.memory.variant = MemoryVariant::none;
            s.memory.capacity = 6000;
            s.oracle.dimension = 32;
            break;
    }
    return s;
}

namespace {

void require_keys(const json& j, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw std::invalid_argument("scenario: '" + path + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok)
            throw std::invalid_argument("scenario: unknown key '" + path + "." + key + "'");
    }
}

template <typename T>
void read_if(const json& j, const char* key, T& out, const std::string& path) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("scenario: bad value at '" + path + "." + key + "'");
    }
}

}  // namespace

ScenarioSpec scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scenario: parse error: ") + e.what());
    }
    require_keys(j, "$",
                 {"scenario", "map_side", "seed", "budget", "task_limit", "tasks", "memory",
                  "oracle", "explore", "agent"});
    if (!j.contains("scenario"))
        throw std::invalid_argument("scenario: missing key '$.scenario'");

    ScenarioSpec s = default_scenario(
        scenario_kind_from_string(j.at("scenario").get<std::string>()));
    read_if(j, "map_side", s.map_side, "$");
    read_if(j, "seed", s.seed, "$");
    read_if(j, "budget", s.budget, "$");
    read_if(j, "task_limit", s.task_limit, "$");

    if (j.contains("tasks")) {
        const json& t = j.at("tasks");
        require_keys(t, "$.tasks", {"a", "b", "schedule"});
        read_if(t, "a", s.task_a, "$.tasks");
        read_if(t, "b", s.task_b, "$.tasks");
        read_if(t, "schedule", s.schedule, "$.tasks");
    }
    if (j.contains("memory")) {
        const json& m = j.at("memory");
        require_keys(m, "$.memory",
                     {"variant", "capacity", "C", "W", "R", "K", "c", "h", "search_buffer",
                      "dp_init_clusters", "dp_max_iters"});
        std::string variant = to_string(s.memory.variant);
        read_if(m, "variant", variant, "$.memory");
        s.memory.variant = memory_variant_from_string(variant);
        read_if(m, "capacity", s.memory.capacity, "$.memory");
        read_if(m, "C", s.memory.place_size, "$.memory");
        read_if(m, "W", s.memory.yaw_window, "$.memory");
        read_if(m, "R", s.memory.update_frequency, "$.memory");
        read_if(m, "K", s.memory.top_k, "$.memory");
        read_if(m, "c", s.memory.merge_score, "$.memory");
        read_if(m, "h", s.memory.task_threshold, "$.memory");
        read_if(m, "search_buffer", s.memory.search_buffer, "$.memory");
        read_if(m, "dp_init_clusters", s.memory.dp_init_clusters, "$.memory");
        read_if(m, "dp_max_iters", s.memory.dp_max_iters, "$.memory");
    }
    if (j.contains("oracle")) {
        const json& o = j.at("oracle");
        require_keys(o, "$.oracle", {"seed", "dimension", "noise_angle", "window"});
        read_if(o, "seed", s.oracle.seed, "$.oracle");
        read_if(o, "dimension", s.oracle.dimension, "$.oracle");
        read_if(o, "noise_angle", s.oracle.noise_angle, "$.oracle");
        read_if(o, "window", s.oracle.window, "$.oracle");
    }
    if (j.contains("explore")) {
        const json& e = j.at("explore");
        require_keys(e, "$.explore",
                     {"map_side", "super_cell", "fov_radius", "fov_half_angle"});
        read_if(e, "map_side", s.explore.map_side, "$.explore");
        read_if(e, "super_cell", s.explore.super_cell, "$.explore");
        read_if(e, "fov_radius", s.explore.fov_radius, "$.explore");
        read_if(e, "fov_half_angle", s.explore.fov_half_angle, "$.explore");
    }
    if (j.contains("agent")) {
        const json& a = j.at("agent");
        require_keys(a, "$.agent",
                     {"mode_timeout", "interact_radius", "interact_steps", "policy"});
        read_if(a, "mode_timeout", s.agent.mode_timeout, "$.agent");
        read_if(a, "interact_radius", s.agent.interact_radius, "$.agent");
        read_if(a, "interact_steps", s.agent.interact_steps, "$.agent");
        std::string policy = to_string(s.agent.policy);
        read_if(a, "policy", policy, "$.agent");
        s.agent.policy = explore_policy_from_string(policy);
    }
    s.validate();
    return s;
}

std::string scenario_to_json_text(const ScenarioSpec& s) {
    json j;
    j["scenario"] = to_string(s.kind);
    j["map_side"] = s.map_side;
    j["seed"] = s.seed;
    j["budget"] = s.budget;
    j["task_limit"] = s.task_limit;
    j["tasks"] = {{"a", s.task_a}, {"b", s.task_b}, {"schedule", s.schedule}};
    j["memory"] = {{"variant", to_string(s.memory.variant)},
                   {"capacity", s.memory.capacity},
                   {"C", s.memory.place_size},
                   {"W", s.memory.yaw_window},
                   {"R", s.memory.update_frequency},
                   {"K", s.memory.top_k},
                   {"c", s.memory.merge_score},
                   {"h", s.memory.task_threshold},
                   {"search_buffer", s.memory.search_buffer},
                   {"dp_init_clusters", s.memory.dp_init_clusters},
                   {"dp_max_iters", s.memory.dp_max_iters}};
    j["oracle"] = {{"seed", s.oracle.seed},
                   {"dimension", s.oracle.dimension},
                   {"noise_angle", s.oracle.noise_angle},
                   {"window", s.oracle.window}};
    j["explore"] = {{"map_side", s.explore.map_side},
                    {"super_cell", s.explore.super_cell},
                    {"fov_radius", s.explore.fov_radius},
                    {"fov_half_angle", s.explore.fov_half_angle}};
    j["agent"] = {{"mode_timeout", s.agent.mode_timeout},
                  {"interact_radius", s.agent.interact_radius},
                  {"interact_steps", s.agent.interact_steps},
                  {"policy", to_string(s.agent.policy)}};
    return j.dump();
}

namespace {

struct MapBuilder {
    TerrainGrid grid;
    std::vector<WorldEntity> entities;
    Rng rng;

    MapBuilder(int side, std::uint64_t seed) : grid(side, Terrain::flat), rng(seed) {}

    void border_walls() {
        const int lo = grid.min_coord(), hi = grid.max_coord();
        for (int x = lo; x <= hi; ++x) {
            grid.set(x, lo, Terrain::wall);
            grid.set(x, hi, Terrain::wall);
        }
        for (int y = lo; y <= hi; ++y) {
            grid.set(lo, y, Terrain::wall);
            grid.set(hi, y, Terrain::wall);
        }
    }

    void disc(int cx, int cy, double radius, Terrain t) {
        const int r = static_cast<int>(std::ceil(radius));
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
                if (dx * dx + dy * dy > radius * radius) continue;
                const int x = cx + dx, y = cy + dy;
                if (x <= grid.min_coord() || x >= grid.max_coord() || y <= grid.min_coord() ||
                    y >= grid.max_coord())
                    continue;
                grid.set(x, y, t);
            }
    }

    void band_x(int x0, int x1, int y0, int y1, Terrain t) {
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                if (x <= grid.min_coord() || x >= grid.max_coord() || y <= grid.min_coord() ||
                    y >= grid.max_coord())
                    continue;
                grid.set(x, y, t);
            }
    }

    int rand_in(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    void grass_patches(int n, double rmin = 2.5, double rmax = 5.0) {
        const int m = grid.side() / 2 - 6;
        for (int i = 0; i < n; ++i) {
            const int cx = rand_in(-m, m), cy = rand_in(-m, m);
            const double r = rmin + rng.next_double() * (rmax - rmin);
            if (std::abs(cx) < 5 && std::abs(cy) < 5) continue;  // keep spawn clear
            disc_if_flat(cx, cy, r, Terrain::grass);
        }
    }

    void disc_if_flat(int cx, int cy, double radius, Terrain t) {
        const int r = static_cast<int>(std::ceil(radius));
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
                if (dx * dx + dy * dy > radius * radius) continue;
                const int x = cx + dx, y = cy + dy;
                if (x <= grid.min_coord() || x >= grid.max_coord() || y <= grid.min_coord() ||
                    y >= grid.max_coord())
                    continue;
                if (grid.at(x, y) == Terrain::flat) grid.set(x, y, t);
            }
    }

    bool cell_free(int x, int y) const {
        if (grid.at(x, y) == Terrain::wall || grid.at(x, y) == Terrain::water) return false;
        for (const auto& e : entities)
            if (e.cell.x == x && e.cell.y == y) return false;
        return true;
    }

    void add_entity(const std::string& kind, int x, int y,
                    std::vector<ScriptPhase> script = {}) {
        WorldEntity e;
        e.kind = kind;
        e.cell = {x, y};
        e.script = std::move(script);
        entities.push_back(std::move(e));
    }

    void scatter_entities(const std::string& kind, int n, int x0, int x1, int y0, int y1) {
        int placed = 0, guard = 0;
        while (placed < n && guard++ < 10000) {
            const int x = rand_in(x0, x1), y = rand_in(y0, y1);
            if (!cell_free(x, y)) continue;
            if (std::abs(x) < 4 && std::abs(y) < 4) continue;
            add_entity(kind, x, y);
            ++placed;
        }
    }

    void clear_spawn() {
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) grid.set(dx, dy, Terrain::flat);
    }
};

// Map 1: water only as a pond in the upper-right corner, trees on the
// left, mountain ridges as barriers. Used for the water A-B-A family
// and for the exploration benchmark.
void build_map1(MapBuilder& b) {
    const int h = b.grid.side() / 2;
    b.grass_patches(10);
    b.band_x(-12, -9, -h + 1, h / 4, Terrain::mountain);  // ridge with a northern gap
    b.band_x(8, h - 8, 14, 16, Terrain::mountain);        // ridge shielding the pond
    b.disc(h - 12, h - 12, 4.0, Terrain::water);          // the corner pond
    b.scatter_entities("tree", 24, -h + 3, -h / 3, -h + 3, h - 3);
    b.clear_spawn();
}

// Map 2: trees left, cows and sheep right, separated by a central
// mountain ridge. The surface is grassland; dirt shows only in bands
// along the far left and right edges.
void build_map2(MapBuilder& b) {
    const int h = b.grid.side() / 2;
    for (int y = -h + 1; y < h - 1; ++y)
        for (int x = -h + 1; x < h - 1; ++x) b.grid.set(x, y, Terrain::grass);
    b.band_x(-h + 1, -h + 8, -h + 1, h - 2, Terrain::flat);
    b.band_x(h - 9, h - 2, -h + 1, h - 2, Terrain::flat);
    b.band_x(-1, 1, -h + 1, h - 2, Terrain::mountain);
    b.scatter_entities("tree", 24, -h + 12, -h / 3, -h + 3, h - 3);
    const int cx = h / 2, cy = h / 2;
    for (int i = 0; i < 3; ++i) b.add_entity("cow", cx + i % 2, cy + i / 2);
    for (int i = 0; i < 3; ++i) b.add_entity("sheep", cx + i % 2, -cy + i / 2);
    b.clear_spawn();
}

// Map 3: map 2 plus a pond ringed with sand at the top.
void build_map3(MapBuilder& b) {
    build_map2(b);
    const int h = b.grid.side() / 2;
    b.disc(0, h - 9, 6.0, Terrain::sand);
    b.disc(0, h - 9, 3.0, Terrain::water);
}

void build_long_instruction(MapBuilder& b) {
    const int h = b.grid.side() / 2;  // 100
    b.grass_patches(14, 3.0, 6.0);
    b.scatter_entities("tree", 8, -h + 10, -h + 30, -h + 10, -h + 30);
    b.scatter_entities("tree", 8, -10, 10, -h + 5, -h + 25);
    for (int i = 0; i < 4; ++i) b.add_entity("sheep", -h + 20 + i % 2, h - 22 + i / 2);
    for (int i = 0; i < 4; ++i) b.add_entity("cow", h - 22 + i % 2, -h + 20 + i / 2);
    b.disc(h - 20, h - 20, 4.0, Terrain::water);
    b.clear_spawn();
}

std::vector<TourStop> travel_tour(MapBuilder& b, std::int64_t dwell, int stops) {
    std::vector<TourStop> tour;
    const int m = b.grid.side() / 2 - 8;
    for (int i = 0; i < stops; ++i) {
        int x = 0, y = 0, guard = 0;
        do {
            x = b.rand_in(-m, m);
            y = b.rand_in(-m, m);
        } while ((!b.cell_free(x, y) || b.grid.at(x, y) != Terrain::flat) && guard++ < 1000);
        tour.push_back({{x, y}, static_cast<double>(45 * b.rand_in(0, 7) - 180), dwell});
    }
    return tour;
}

}  // namespace

WorldBlueprint make_blueprint(const ScenarioSpec& spec, std::uint64_t episode_seed) {
    // Fixed custom maps share the scenario seed; randomly generated maps
    // and the scripted memory-task tours vary with the episode so that
    // seed sweeps sample genuinely different runs.
    const bool episodic_layout = spec.kind == ScenarioKind::random_plains ||
                                 spec.kind == ScenarioKind::memory_task_water ||
                                 spec.kind == ScenarioKind::memory_task_death_spot ||
                                 spec.kind == ScenarioKind::memory_task_twin_houses;
    const std::uint64_t layout_seed = episodic_layout ? episode_seed : spec.seed;
    MapBuilder b(spec.map_side, fnv1a_value(layout_seed, 0x6d61705fULL));
    b.border_walls();

    WorldBlueprint out;
    switch (spec.kind) {
        case ScenarioKind::aba_sparse: {
            if (spec.task_a == "water")
                build_map1(b);
            else if (spec.task_b == "sand")
                build_map3(b);
            else
                build_map2(b);
            break;
        }
        case ScenarioKind::exploration_only:
            build_map1(b);
            break;
        case ScenarioKind::random_plains: {
            const int h = spec.map_side / 2;
            b.grass_patches(8);
            const int qx = b.rand_in(0, 1) ? 1 : -1, qy = b.rand_in(0, 1) ? 1 : -1;
            b.disc(qx * (h - 14), qy * (h - 14), 3.0, Terrain::water);
            b.scatter_entities("tree", 6, -h + 4, -h / 4, -h + 4, h - 4);
            const int cx = b.rand_in(h / 4, h - 8), cy = b.rand_in(-h + 8, h - 8);
            for (int i = 0; i < 3; ++i) b.add_entity("cow", cx + i % 2, cy + i / 2);
            const int sx = b.rand_in(h / 4, h - 8), sy = b.rand_in(-h + 8, h - 8);
            for (int i = 0; i < 3; ++i) b.add_entity("sheep", sx + i % 2, sy + i / 2);
            b.clear_spawn();
            break;
        }
        case ScenarioKind::memory_task_water: {
            // Pond away from the map center: returning to it within the
            // task budget takes recall, not sweep luck.
            b.grass_patches(6);
            b.disc(28, 10, 2.5, Terrain::water);
            b.clear_spawn();
            // Straight-east final leg: approach frames outside the dwell
            // place cell stay more than 3 blocks from the viewpoint.
            out.tour.push_back({{14, 10}, 0.0, 0});
            out.tour.push_back({{24, 10}, 0.0, 500});
            for (auto& stop : travel_tour(b, 450, 4)) out.tour.push_back(stop);
            out.tour.push_back({{0, -30}, 180.0, 1 << 30});  // hold until the phase ends
            out.tour_length = 3000;
            out.goal_frame_ticks = {250};
            break;
        }
        case ScenarioKind::memory_task_death_spot: {
            b.grass_patches(6);
            b.clear_spawn();
            b.add_entity("zombie_burning", 26, 10,
                         {{0, "zombie_burning"}, {500, ""}});
            b.add_entity("zombie_burning", 26, 11,
                         {{0, "zombie_burning"}, {500, ""}});
            out.tour.push_back({{14, 10}, 0.0, 0});
            out.tour.push_back({{24, 10}, 0.0, 1000});
            for (auto& stop : travel_tour(b, 450, 4)) out.tour.push_back(stop);
            out.tour.push_back({{-20, -25}, 180.0, 1 << 30});
            out.tour_length = 3000;
            out.goal_frame_ticks = {250};
            break;
        }
        case ScenarioKind::memory_task_twin_houses: {
            b.clear_spawn();
            b.add_entity("house", 2, 0);
            b.add_entity("house", 2, 40);
            // The second site carries a little grass so the two houses
            // look alike without being pixel-identical.
            b.grid.set(4, 38, Terrain::grass);
            b.grid.set(4, 42, Terrain::grass);
            out.tour.push_back({{0, 0}, 0.0, 100});
            out.tour.push_back({{0, 40}, 0.0, 1840});
            for (auto& stop : travel_tour(b, 350, 2)) out.tour.push_back(stop);
            out.tour.push_back({{-20, -20}, 180.0, 1 << 30});
            out.tour_length = 3000;
            out.goal_frame_ticks = {50};
            break;
        }
        case ScenarioKind::long_instruction:
            build_long_instruction(b);
            break;
        case ScenarioKind::long_navigation: {
            const double tau = 6.283185307179586;
            b.grass_patches(10, 3.0, 6.0);
            for (int k = 0; k < 6; ++k) {
                const double ang = tau * k / 6.0;
                const int ax = static_cast<int>(std::llround(60.0 * std::cos(ang)));
                const int ay = static_cast<int>(std::llround(60.0 * std::sin(ang)));
                const std::size_t first_entity = b.entities.size();
                switch (k) {
                    case 0:
                        b.add_entity("zombie_burning", ax + 2, ay,
                                     {{0, "zombie_burning"}, {0, ""}});
                        out.pending_scripts.push_back({first_entity, 1, 0, 1000});
                        break;
                    case 1:
                        b.disc(ax + 3, ay, 2.5, Terrain::water);
                        break;
                    case 2:
                        b.add_entity("sugarcane", ax + 2, ay, {{0, "sugarcane"}, {0, ""}});
                        b.add_entity("sugarcane", ax + 2, ay + 1, {{0, "sugarcane"}, {0, ""}});
                        out.pending_scripts.push_back({first_entity, 1, 2, 1000});
                        out.pending_scripts.push_back({first_entity + 1, 1, 2, 1000});
                        break;
                    case 3:
                        // Sandy clearing: the pre-spawn view stays
                        // visually distinct from generic plains.
                        b.disc(ax + 3, ay, 2.0, Terrain::sand);
                        b.add_entity("spider", ax + 2, ay, {{0, ""}, {0, "spider"}});
                        out.pending_scripts.push_back({first_entity, 1, 3, 1000});
                        break;
                    case 4:
                        for (int i = 0; i < 4; ++i)
                            b.add_entity("tree", ax + 2 + i % 2, ay + i / 2);
                        break;
                    case 5:
                        b.add_entity("house", ax + 2, ay);
                        break;
                }
                out.tour.push_back({{ax, ay}, 0.0, 2000});
            }
            b.clear_spawn();
            out.tour.push_back({{0, 0}, 0.0, 1 << 30});
            out.tour_length = 16000;
            break;
        }
    }

    out.terrain = std::move(b.grid);
    out.entities = std::move(b.entities);
    return out;
}

TaskStream::TaskStream(const ScenarioSpec& spec, std::uint64_t episode_seed)
    : spec_(spec), rng_(fnv1a_value(episode_seed, 0x7461736bULL)) {
    switch (spec.kind) {
        case ScenarioKind::aba_sparse:
            fixed_ = {{spec.task_a, 0}, {spec.task_b, 0}, {spec.task_a, 0}};
            break;
        case ScenarioKind::random_plains:
            if (spec.schedule == "seq4")
                fixed_ = {{"log", 0}, {"water", 0}, {"wool", 0}, {"beef", 0}};
            else
                fixed_ = {{spec.task_a, 0}, {spec.task_b, 0}, {spec.task_a, 0}};
            break;
        case ScenarioKind::memory_task_water:
        case ScenarioKind::memory_task_death_spot:
        case ScenarioKind::memory_task_twin_houses:
            fixed_ = {{"goal:0", 0}};
            break;
        case ScenarioKind::long_instruction:
            random_stream_ = true;
            random_kinds_ = {"water", "beef", "wool", "log", "dirt", "seeds"};
            break;
        case ScenarioKind::long_navigation:
            random_stream_ = true;
            for (int k = 0; k < 6; ++k) random_kinds_.push_back("goal:" + std::to_string(k));
            break;
        case ScenarioKind::exploration_only:
            break;
    }
}

std::optional<TaskRequest> TaskStream::next(std::int64_t clock_now) {
    if (clock_now >= spec_.budget) return std::nullopt;
    const std::int64_t cap = spec_.task_limit > 0 ? spec_.task_limit : spec_.budget;
    if (random_stream_) {
        const std::string kind =
            random_kinds_[rng_.next_below(random_kinds_.size())];
        return TaskRequest{kind, cap};
    }
    if (index_ >= fixed_.size()) return std::nullopt;
    TaskRequest req = fixed_[index_++];
    if (req.time_limit == 0) req.time_limit = cap;
    return req;
}

}  // namespace pem
