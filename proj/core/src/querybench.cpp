#include "pem/querybench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "pem/runner.hpp"

namespace pem {

namespace {

// One identical observation stream for every variant: wander between
// seeded waypoints and hold each one for ~a buffer length so the place
// timers actually fire. The bench world is deliberately varied (terrain
// patches and many scattered entities) so dwell spots form distinct
// events; a little encoder noise adds cluster texture on top.
ScenarioSpec bench_spec(const QueryBenchConfig& cfg) {
    ScenarioSpec spec = default_scenario(ScenarioKind::random_plains);
    spec.map_side = 200;
    spec.seed = cfg.seed;
    spec.oracle.dimension = cfg.dimension;
    spec.oracle.noise_angle = 0.45;
    spec.memory.capacity = cfg.frames;
    spec.memory.update_frequency = 100;
    spec.memory.top_k = cfg.top_k;
    return spec;
}

void diversify_bench_world(TerrainGrid& terrain, std::vector<WorldEntity>& entities,
                           std::uint64_t seed) {
    Rng rng(fnv1a_value(seed, 0x7761726cULL));
    const int h = terrain.side() / 2 - 4;
    const Terrain patches[4] = {Terrain::grass, Terrain::sand, Terrain::water,
                                Terrain::mountain};
    for (int i = 0; i < 80; ++i) {
        const int cx = -h + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(2 * h)));
        const int cy = -h + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(2 * h)));
        const double r = 2.0 + rng.next_double() * 4.0;
        const Terrain t = patches[rng.next_below(4)];
        const int ri = static_cast<int>(std::ceil(r));
        for (int dy = -ri; dy <= ri; ++dy)
            for (int dx = -ri; dx <= ri; ++dx) {
                if (dx * dx + dy * dy > r * r) continue;
                const int x = cx + dx, y = cy + dy;
                if (x <= terrain.min_coord() || x >= terrain.max_coord() ||
                    y <= terrain.min_coord() || y >= terrain.max_coord())
                    continue;
                terrain.set(x, y, t);
            }
    }
    const char* kinds[7] = {"tree", "cow", "sheep", "house", "zombie_burning", "sugarcane",
                            "spider"};
    for (int i = 0; i < 500; ++i) {
        WorldEntity e;
        e.kind = kinds[rng.next_below(7)];
        e.cell = {-h + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(2 * h))),
                  -h + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(2 * h)))};
        if (!terrain.traversable(e.cell.x, e.cell.y)) continue;
        entities.push_back(std::move(e));
    }
}

std::vector<TourStop> bench_tour(const QueryBenchConfig& cfg, const TerrainGrid& grid) {
    Rng rng(fnv1a_value(cfg.seed, 0x62656e6368ULL));
    std::vector<TourStop> tour;
    const int m = grid.side() / 2 - 8;
    const std::int64_t stops = cfg.frames / 150 + 16;
    for (std::int64_t i = 0; i < stops; ++i) {
        const int x = -m + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(2 * m)));
        const int y = -m + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(2 * m)));
        const double yaw = 45.0 * static_cast<double>(rng.next_below(8)) - 180.0;
        tour.push_back({{x, y}, yaw, 100 + static_cast<std::int64_t>(rng.next_below(60))});
    }
    tour.push_back({{0, 0}, 0.0, 1 << 30});
    return tour;
}

}  // namespace

std::vector<QueryBenchRow> run_query_bench(const QueryBenchConfig& cfg) {
    const ScenarioSpec base = bench_spec(cfg);

    // Pick the query ticks up front so all variants share them.
    Rng qrng(fnv1a_value(cfg.seed, 0x717565ULL));
    const int total_queries = cfg.warmup + cfg.queries;
    std::vector<std::int64_t> query_ticks(static_cast<std::size_t>(total_queries));
    for (auto& t : query_ticks)
        t = static_cast<std::int64_t>(qrng.next_below(static_cast<std::uint64_t>(cfg.frames)));

    std::vector<QueryBenchRow> rows;
    for (MemoryVariant variant : cfg.variants) {
        ScenarioSpec spec = base;
        spec.memory.variant = variant;

        EncoderOracle oracle(spec.oracle);
        register_world_kinds(oracle);
        WorldBlueprint bp = make_blueprint(spec, cfg.seed);
        diversify_bench_world(bp.terrain, bp.entities, cfg.seed);
        WorldOptions wopts;
        wopts.fov_radius = spec.explore.fov_radius;
        wopts.fov_half_angle = spec.explore.fov_half_angle;
        wopts.window = spec.oracle.window;
        World world(bp.terrain, bp.entities, oracle, wopts);
        WindowEncoder encoder(oracle);
        EpisodicMemory memory(spec.memory);
        TourDriver driver(bench_tour(cfg, world.terrain()));

        std::unordered_map<std::int64_t, Embedding> queries;
        for (std::int64_t t : query_ticks) queries.emplace(t, Embedding{});

        for (std::int64_t t = 0; t < cfg.frames; ++t) {
            ExperienceFrame frame;
            frame.time = t;
            frame.pose = world.agent();
            frame.embedding = encoder.encode(world.window());
            if (auto it = queries.find(t); it != queries.end()) it->second = frame.embedding;
            memory.write(std::move(frame));
            world.step(driver.next(world));
        }

        QueryBenchRow row;
        row.variant = variant;
        row.frames = memory.frame_count();
        row.clusters = memory.cluster_count();
        row.buffered = memory.buffered_count();
        for (const auto& [id, ec] : memory.events())
            row.max_cluster = std::max(row.max_cluster, ec.size());
        if (variant == MemoryVariant::place)
            for (const auto& [id, pc] : memory.places())
                row.max_cluster =
                    std::max(row.max_cluster, static_cast<std::int64_t>(pc.frames.size()));

        std::vector<double> times_ms;
        times_ms.reserve(static_cast<std::size_t>(cfg.queries));
        double sum_clusters = 0.0, sum_frames = 0.0;
        row.min_total_scored = std::numeric_limits<std::int64_t>::max();
        for (int q = 0; q < total_queries; ++q) {
            const Embedding& query = queries.at(query_ticks[static_cast<std::size_t>(q)]);
            const auto t0 = std::chrono::steady_clock::now();
            const ReadResult rr = memory.read(query, cfg.top_k, spec.memory.task_threshold);
            const double ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
            if (q < cfg.warmup) continue;
            times_ms.push_back(ms);
            sum_clusters += static_cast<double>(rr.cost.clusters_scored);
            sum_frames += static_cast<double>(rr.cost.frames_scored);
            row.min_total_scored = std::min(row.min_total_scored, rr.cost.total());
            row.max_total_scored = std::max(row.max_total_scored, rr.cost.total());
        }
        std::sort(times_ms.begin(), times_ms.end());
        const std::size_t n = times_ms.size();
        row.median_ms = n == 0 ? 0.0
                               : (n % 2 ? times_ms[n / 2]
                                        : 0.5 * (times_ms[n / 2 - 1] + times_ms[n / 2]));
        double total = 0.0;
        for (double t : times_ms) total += t;
        row.mean_ms = n == 0 ? 0.0 : total / static_cast<double>(n);
        row.mean_clusters_scored = n == 0 ? 0.0 : sum_clusters / static_cast<double>(n);
        row.mean_frames_scored = n == 0 ? 0.0 : sum_frames / static_cast<double>(n);
        rows.push_back(row);
    }
    return rows;
}

std::string query_bench_to_json(const std::vector<QueryBenchRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j;
        j["variant"] = to_string(r.variant);
        j["frames"] = r.frames;
        j["clusters"] = r.clusters;
        j["max_cluster"] = r.max_cluster;
        j["buffered"] = r.buffered;
        j["median_ms"] = r.median_ms;
        j["mean_ms"] = r.mean_ms;
        j["mean_clusters_scored"] = r.mean_clusters_scored;
        j["mean_frames_scored"] = r.mean_frames_scored;
        j["min_total_scored"] = r.min_total_scored;
        j["max_total_scored"] = r.max_total_scored;
        out.push_back(std::move(j));
    }
    return out.dump(2);
}

}  // namespace pem
